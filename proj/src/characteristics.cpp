#include "alfven/characteristics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>

#include "alfven/csv.hpp"
#include "alfven/interpolation.hpp"
#include "alfven/parallel.hpp"
#include "alfven/snapshot_io.hpp"
#include "alfven/spectral.hpp"

namespace alfven {

double det3(const Mat3& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

namespace {

bool same_time(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); }

/// Velocity (and optionally velocity-gradient) data of one snapshot interval.
struct Slab {
    double ta = 0.0;
    double tb = 0.0;
    std::vector<const double*> fields;  // 3 (+9) components at a, then at b
    int per_end = 3;
};

class GradientCache {
public:
    GradientCache(const Trajectory& traj, Family g) : traj_(traj), g_(g) {}
    const std::array<VectorField, 3>& get(std::size_t s) {
        auto it = cache_.find(s);
        if (it != cache_.end()) return it->second;
        if (cache_.size() >= 2) cache_.erase(cache_.begin()->first == s ? std::next(cache_.begin()) : cache_.begin());
        return cache_.emplace(s, component_gradients(traj_.states[s].field(g_))).first->second;
    }

private:
    const Trajectory& traj_;
    Family g_;
    std::map<std::size_t, std::array<VectorField, 3>> cache_;
};

}  // namespace

void trace_points(const Trajectory& traj, Family g, double t_from, double t_to, std::vector<Vec3>& points,
                  std::vector<Mat3>* jacobians, const TraceOptions& options, const SnapshotVisitor& visit) {
    if (traj.size() == 0) throw Error("trace: empty trajectory");
    if (jacobians && jacobians->size() != points.size()) throw Error("trace: jacobian count mismatch");
    if (options.substeps < 1) throw Error("trace: substeps must be >= 1");
    const std::size_t ns = traj.size();
    auto visit_if_snapshot = [&](double t) {
        if (!visit) return;
        for (std::size_t s = 0; s < ns; ++s)
            if (same_time(traj.states[s].t, t)) {
                visit(s);
                return;
            }
    };
    if (same_time(t_from, t_to)) {
        if (ns == 1 && !same_time(traj.states[0].t, t_from)) throw Error("time outside trajectory");
        visit_if_snapshot(t_from);
        return;
    }
    (void)traj.bracket(t_from);
    (void)traj.bracket(t_to);

    // Breakpoints: t_from, the snapshot times strictly inside, t_to.
    std::vector<double> marks{t_from};
    const double dir = t_to > t_from ? 1.0 : -1.0;
    std::vector<double> inside;
    for (const auto& st : traj.states) {
        if ((st.t - t_from) * dir > 0.0 && (t_to - st.t) * dir > 0.0 && !same_time(st.t, t_from) &&
            !same_time(st.t, t_to))
            inside.push_back(st.t);
    }
    std::sort(inside.begin(), inside.end(), [&](double a, double b) { return (a - b) * dir < 0.0; });
    marks.insert(marks.end(), inside.begin(), inside.end());
    marks.push_back(t_to);

    const PeriodicInterpolator interp(traj.grid(), options.interp_points);
    const double sg = sign_of(g);
    const bool with_jac = jacobians != nullptr;
    GradientCache grads(traj, g);

    visit_if_snapshot(t_from);
    for (std::size_t piece = 0; piece + 1 < marks.size(); ++piece) {
        const double a = marks[piece];
        const double b = marks[piece + 1];
        const std::size_t s = traj.bracket(0.5 * (a + b));
        Slab slab;
        slab.ta = traj.states[s].t;
        slab.tb = traj.states[s + 1].t;
        slab.per_end = with_jac ? 12 : 3;
        for (std::size_t e : {s, s + 1}) {
            const auto& z = traj.states[e].field(g);
            for (int c = 0; c < 3; ++c) slab.fields.push_back(z.c[c].data());
            if (with_jac) {
                const auto& gz = grads.get(e);
                for (int c = 0; c < 3; ++c)
                    for (int l = 0; l < 3; ++l) slab.fields.push_back(gz[c].c[l].data());
            }
        }
        const double span = slab.tb - slab.ta;
        const int nf = static_cast<int>(slab.fields.size());
        const double h = (b - a) / options.substeps;

        parallel_for(points.size(), [&](std::size_t begin, std::size_t end) {
            std::vector<double> buf(nf);
            auto rate = [&](double t, const Vec3& x, const Mat3* J, Vec3& v, Mat3* dJ) {
                const double lam = (t - slab.ta) / span;
                interp.evaluate(slab.fields, x, buf.data());
                const int pe = slab.per_end;
                for (int c = 0; c < 3; ++c) v[c] = (1.0 - lam) * buf[c] + lam * buf[pe + c];
                v[2] += sg;
                if (J) {
                    Mat3 G{};
                    for (int c = 0; c < 3; ++c)
                        for (int l = 0; l < 3; ++l)
                            G[c][l] = (1.0 - lam) * buf[3 + 3 * c + l] + lam * buf[pe + 3 + 3 * c + l];
                    for (int i = 0; i < 3; ++i)
                        for (int j = 0; j < 3; ++j) {
                            double acc = 0.0;
                            for (int k = 0; k < 3; ++k) acc += G[i][k] * (*J)[k][j];
                            (*dJ)[i][j] = acc;
                        }
                }
            };
            for (std::size_t p = begin; p < end; ++p) {
                Vec3 x = points[p];
                Mat3 J = with_jac ? (*jacobians)[p] : Mat3{};
                double t = a;
                for (int step = 0; step < options.substeps; ++step) {
                    Vec3 k1, k2, k3, k4, y;
                    Mat3 m1{}, m2{}, m3{}, m4{}, Jy{};
                    auto shift = [&](const Vec3& k, const Mat3& m, double f) {
                        for (int c = 0; c < 3; ++c) y[c] = x[c] + f * k[c];
                        if (with_jac)
                            for (int i = 0; i < 3; ++i)
                                for (int j = 0; j < 3; ++j) Jy[i][j] = J[i][j] + f * m[i][j];
                    };
                    rate(t, x, with_jac ? &J : nullptr, k1, &m1);
                    shift(k1, m1, 0.5 * h);
                    rate(t + 0.5 * h, y, with_jac ? &Jy : nullptr, k2, &m2);
                    shift(k2, m2, 0.5 * h);
                    rate(t + 0.5 * h, y, with_jac ? &Jy : nullptr, k3, &m3);
                    shift(k3, m3, h);
                    rate(t + h, y, with_jac ? &Jy : nullptr, k4, &m4);
                    for (int c = 0; c < 3; ++c) x[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
                    if (with_jac)
                        for (int i = 0; i < 3; ++i)
                            for (int j = 0; j < 3; ++j)
                                J[i][j] += h / 6.0 * (m1[i][j] + 2.0 * m2[i][j] + 2.0 * m3[i][j] + m4[i][j]);
                    t = a + (step + 1) * h;
                }
                points[p] = x;
                if (with_jac) (*jacobians)[p] = J;
            }
        });
        visit_if_snapshot(b);
    }
}

FlowMap identity_flow(const Grid3& grid, Family g, double t) {
    FlowMap m;
    m.t = t;
    m.family = g;
    m.grid = grid;
    m.positions.resize(grid.size());
    for (std::size_t q = 0; q < grid.size(); ++q) m.positions[q] = grid.centered_point(q);
    m.jacobian.assign(grid.size(), identity3());
    return m;
}

FlowMap advance_flow(const FlowMap& map, const Trajectory& traj, double dt, const TraceOptions& options) {
    require_same_grid(map.grid, traj.grid());
    FlowMap out = map;
    trace_points(traj, map.family, map.t, map.t + dt, out.positions, &out.jacobian, options);
    out.t = map.t + dt;
    return out;
}

Vec3 LabelField::label(std::size_t q) const {
    Vec3 x = disp.grid.centered_point(q);
    x[2] -= sign_of(family) * t;
    for (int c = 0; c < 3; ++c) x[c] += disp.c[c][q];
    return x;
}

double LabelField::u(std::size_t q) const {
    return disp.grid.centered_point(q)[2] - sign_of(family) * t + disp.c[2][q];
}

VectorField LabelField::labels() const {
    VectorField out(disp.grid);
    for (std::size_t q = 0; q < disp.size(); ++q) {
        const Vec3 l = label(q);
        for (int c = 0; c < 3; ++c) out.c[c][q] = l[c];
    }
    return out;
}

ScalarField LabelField::weight(const WeightParams& w) const {
    ScalarField out(disp.grid);
    for (std::size_t q = 0; q < disp.size(); ++q) out[q] = weight_of(u(q), w);
    return out;
}

LabelField straight_labels(const Grid3& grid, Family g, double t) {
    LabelField l;
    l.family = g;
    l.t = t;
    l.disp = VectorField(grid);
    return l;
}

double snapshot_density_error(const Trajectory& traj) {
    if (traj.size() < 3) return 0.0;
    double worst = 0.0;
    for (std::size_t s = 1; s + 1 < traj.size(); ++s) {
        for (Family f : {Family::plus, Family::minus}) {
            const auto& a = traj.states[s - 1].field(f);
            const auto& b = traj.states[s].field(f);
            const auto& c = traj.states[s + 1].field(f);
            for (int d = 0; d < 3; ++d)
                for (std::size_t q = 0; q < a.size(); ++q)
                    worst = std::max(worst, std::abs(a.c[d][q] - 2.0 * b.c[d][q] + c.c[d][q]));
        }
    }
    return std::abs(traj.t_end() - traj.t_begin()) * worst / 8.0;
}

namespace {

void require_dense(const Trajectory& traj) {
    if (snapshot_density_error(traj) > 0.01 * traj.grid().min_spacing()) {
        throw Error("insufficient snapshot density");
    }
}

std::vector<Vec3> grid_points(const Grid3& g) {
    std::vector<Vec3> p(g.size());
    for (std::size_t q = 0; q < g.size(); ++q) p[q] = g.centered_point(q);
    return p;
}

}  // namespace

LabelField backtrace_labels(const Trajectory& traj, Family g, double t, const TraceOptions& options) {
    require_dense(traj);
    const Grid3& grid = traj.grid();
    auto pts = grid_points(grid);
    trace_points(traj, g, t, traj.t_begin(), pts, nullptr, options);
    LabelField out = straight_labels(grid, g, t);
    const double sg = sign_of(g);
    for (std::size_t q = 0; q < grid.size(); ++q) {
        const Vec3 x = grid.centered_point(q);
        out.disp.c[0][q] = pts[q][0] - x[0];
        out.disp.c[1][q] = pts[q][1] - x[1];
        out.disp.c[2][q] = pts[q][2] - x[2] + sg * t;
    }
    return out;
}

CharacteristicChart label_chart(const Trajectory& traj, double t, const TraceOptions& options) {
    CharacteristicChart c;
    c.t = t;
    c.plus = backtrace_labels(traj, Family::plus, t, options);
    c.minus = backtrace_labels(traj, Family::minus, t, options);
    return c;
}

void chart_series(const Trajectory& traj, const std::function<void(std::size_t, const CharacteristicChart&)>& visit,
                  const TraceOptions& options) {
    require_dense(traj);
    const Grid3& grid = traj.grid();
    const PeriodicInterpolator interp(grid, options.interp_points);
    CharacteristicChart chart;
    chart.t = traj.t_begin();
    chart.plus = straight_labels(grid, Family::plus, chart.t);
    chart.minus = straight_labels(grid, Family::minus, chart.t);
    visit(0, chart);
    for (std::size_t s = 0; s + 1 < traj.size(); ++s) {
        const double ta = traj.states[s].t;
        const double tb = traj.states[s + 1].t;
        for (LabelField* lf : {&chart.plus, &chart.minus}) {
            auto feet = grid_points(grid);
            trace_points(traj, lf->family, tb, ta, feet, nullptr, options);
            VectorField next(grid);
            const double sg = sign_of(lf->family);
            const std::array<const double*, 3> src{lf->disp.c[0].data(), lf->disp.c[1].data(), lf->disp.c[2].data()};
            parallel_for(grid.size(), [&](std::size_t begin, std::size_t end) {
                double d[3];
                for (std::size_t q = begin; q < end; ++q) {
                    interp.evaluate(src, feet[q], d);
                    const Vec3 x = grid.centered_point(q);
                    next.c[0][q] = feet[q][0] - x[0] + d[0];
                    next.c[1][q] = feet[q][1] - x[1] + d[1];
                    next.c[2][q] = feet[q][2] - x[2] + sg * (tb - ta) + d[2];
                }
            });
            lf->disp = std::move(next);
            lf->t = tb;
        }
        chart.t = tb;
        visit(s + 1, chart);
    }
}

std::vector<CharacteristicChart> chart_series(const Trajectory& traj, const TraceOptions& options) {
    std::vector<CharacteristicChart> out;
    chart_series(traj, [&](std::size_t, const CharacteristicChart& c) { out.push_back(c); }, options);
    return out;
}

JacobianReport jacobian_report(const FlowMap& map) {
    JacobianReport r;
    r.min_det = r.max_det = 1.0;
    const Grid3& g = map.grid;
    std::array<std::array<ScalarField, 3>, 3> dev;
    for (auto& row : dev)
        for (auto& f : row) f = ScalarField(g);
    for (std::size_t q = 0; q < g.size(); ++q) {
        const auto& J = map.jacobian[q];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const double d = J[i][j] - (i == j ? 1.0 : 0.0);
                dev[i][j][q] = d;
                r.max_deviation = std::max(r.max_deviation, std::abs(d));
            }
        const double det = det3(J);
        r.min_det = std::min(r.min_det, det);
        r.max_det = std::max(r.max_det, det);
    }
    for (auto& row : dev)
        for (auto& f : row) r.max_gradient = std::max(r.max_gradient, max_norm(gradient(f)));
    return r;
}

JacobianReport jacobian_report(const LabelField& labels) {
    JacobianReport r;
    const Grid3& g = labels.disp.grid;
    const auto grads = component_gradients(labels.disp);  // grads[i].c[j] = d_j disp_i
    std::vector<double> det(g.size());
    for (std::size_t q = 0; q < g.size(); ++q) {
        Mat3 M = identity3();
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                M[i][j] += grads[i].c[j][q];
                r.max_deviation = std::max(r.max_deviation, std::abs(grads[i].c[j][q]));
            }
        det[q] = det3(M);
    }
    r.min_det = *std::min_element(det.begin(), det.end());
    r.max_det = *std::max_element(det.begin(), det.end());
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            ScalarField f(g);
            f.data = grads[i].c[j];
            r.max_gradient = std::max(r.max_gradient, max_norm(gradient(f)));
        }
    return r;
}

VectorField pressure_gradient(const Trajectory& traj, std::size_t snapshot) {
    return gradient(traj.pressures.at(snapshot));
}

LineSample sample_line(const Trajectory& traj, Family carried, const Vec3& label, const TraceOptions& options) {
    const Grid3& grid = traj.grid();
    for (int a = 0; a < 3; ++a) {
        if (!(label[a] >= -grid.L[a] / 2.0 && label[a] <= grid.L[a] / 2.0)) {
            throw Error("label outside the initial grid hull");
        }
    }
    const Family g = opposite(carried);
    const double sg = sign_of(g);
    const PeriodicInterpolator interp(grid, options.interp_points);
    LineSample out;
    out.carried = carried;
    out.label = label;
    std::vector<Vec3> pts{label};
    auto record = [&](std::size_t s) {
        const auto& st = traj.states[s];
        const auto gp = pressure_gradient(traj, s);
        const std::array<const double*, 9> f{st.z_plus.c[0].data(),  st.z_plus.c[1].data(),  st.z_plus.c[2].data(),
                                             st.z_minus.c[0].data(), st.z_minus.c[1].data(), st.z_minus.c[2].data(),
                                             gp.c[0].data(),         gp.c[1].data(),         gp.c[2].data()};
        double v[9];
        interp.evaluate(f, pts[0], v);
        out.t.push_back(st.t);
        out.x.push_back(pts[0]);
        out.z_plus.push_back({v[0], v[1], v[2]});
        out.z_minus.push_back({v[3], v[4], v[5]});
        out.grad_p.push_back({v[6], v[7], v[8]});
        const Vec3 Z = g == Family::plus ? Vec3{v[0], v[1], v[2] + sg} : Vec3{v[3], v[4], v[5] + sg};
        out.measure.push_back(std::sqrt(1.0 + Z[0] * Z[0] + Z[1] * Z[1] + Z[2] * Z[2]));
    };
    trace_points(traj, g, traj.t_begin(), traj.t_end(), pts, nullptr, options, record);
    return out;
}

void write_line_csv(const std::filesystem::path& path, const LineSample& line) {
    CsvWriter w(path, {"t", "x1", "x2", "x3", "zp1", "zp2", "zp3", "zm1", "zm2", "zm3", "gp1", "gp2", "gp3", "measure"});
    for (std::size_t i = 0; i < line.t.size(); ++i) {
        w.row({line.t[i], line.x[i][0], line.x[i][1], line.x[i][2], line.z_plus[i][0], line.z_plus[i][1],
               line.z_plus[i][2], line.z_minus[i][0], line.z_minus[i][1], line.z_minus[i][2], line.grad_p[i][0],
               line.grad_p[i][1], line.grad_p[i][2], line.measure[i]});
    }
}

void write_chart(const std::filesystem::path& path, const CharacteristicChart& chart, const WeightParams& w) {
    auto arrays = to_arrays("disp_plus", chart.plus.disp);
    auto more = to_arrays("disp_minus", chart.minus.disp);
    arrays.insert(arrays.end(), more.begin(), more.end());
    SnapshotMeta meta;
    meta.grid = chart.plus.disp.grid;
    meta.t = chart.t;
    meta.weight = w;
    meta.extra["kind"] = "chart";
    write_container(path, arrays, meta);
}

}  // namespace alfven
