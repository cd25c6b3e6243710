#include "alfven/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "alfven/csv.hpp"
#include "alfven/diagnostics.hpp"
#include "alfven/initial_data.hpp"
#include "alfven/interpolation.hpp"
#include "alfven/parallel.hpp"
#include "alfven/snapshot_io.hpp"
#include "alfven/spectral.hpp"

namespace alfven {

Infinity infinity_of(Family carried, double direction) {
    if (direction > 0.0) return carried == Family::plus ? Infinity::F_plus : Infinity::F_minus;
    return carried == Family::plus ? Infinity::P_plus : Infinity::P_minus;
}

Family carried_family(Infinity kind) {
    return kind == Infinity::F_plus || kind == Infinity::P_plus ? Family::plus : Family::minus;
}

double direction_of(Infinity kind) { return kind == Infinity::F_plus || kind == Infinity::F_minus ? 1.0 : -1.0; }

std::string to_string(Infinity kind) {
    switch (kind) {
        case Infinity::F_plus: return "F_plus";
        case Infinity::F_minus: return "F_minus";
        case Infinity::P_plus: return "P_plus";
        case Infinity::P_minus: return "P_minus";
    }
    return "?";
}

ScalarField InfinityManifold::weight_field() const {
    ScalarField out(grid);
    for (std::size_t q = 0; q < grid.size(); ++q)
        out[q] = std::pow(weight_of(grid.centered_point(q)[2], weight), 2.0 * weight.omega());
    return out;
}

ScatterCase scatter_case_from(const std::string& name) {
    if (name == "a") return ScatterCase::a;
    if (name == "b") return ScatterCase::b;
    if (name == "c") return ScatterCase::c;
    if (name == "d") return ScatterCase::d;
    throw Error("unknown scattering case '" + name + "'");
}

std::string to_string(ScatterCase c) {
    switch (c) {
        case ScatterCase::a: return "a";
        case ScatterCase::b: return "b";
        case ScatterCase::c: return "c";
        case ScatterCase::d: return "d";
    }
    return "?";
}

double case_direction(ScatterCase c, Family f) {
    switch (c) {
        case ScatterCase::a: return 1.0;
        case ScatterCase::b: return f == Family::plus ? -1.0 : 1.0;
        case ScatterCase::c: return -1.0;
        case ScatterCase::d: return f == Family::plus ? 1.0 : -1.0;
    }
    return 1.0;
}

double tail_bound(double envelope, double T, const WeightParams& w) {
    const double om = w.omega();
    return envelope * std::pow(w.R + std::abs(T), 1.0 - om) / (om - 1.0);
}

namespace {

void require_window(const Trajectory& traj) {
    const Grid3& g = traj.grid();
    if (std::abs(traj.t_begin()) > 1e-12 || std::abs(traj.t_end()) > g.L[2] / 4.0 * (1.0 + 1e-12)) {
        throw Error("horizon exceeds validity window");
    }
}

std::vector<Vec3> label_points(const Grid3& g) {
    std::vector<Vec3> p(g.size());
    for (std::size_t q = 0; q < g.size(); ++q) p[q] = g.centered_point(q);
    return p;
}

/// Line integrals of grad p along psi_g from the initial grid, both with and
/// without the line-measure factor, accumulated by the trapezoid rule.
struct LineIntegrals {
    VectorField measured;
    VectorField plain;
    double envelope = 0.0;
    std::vector<Vec3> endpoints;
};

LineIntegrals integrate_lines(const Trajectory& traj, Family carried, double t_end, const TraceOptions& options) {
    const Grid3& grid = traj.grid();
    const Family g = opposite(carried);
    const double sg = sign_of(g);
    const WeightParams& w = traj.config.weight;
    const PeriodicInterpolator interp(grid, options.interp_points);
    LineIntegrals out;
    out.measured = VectorField(grid);
    out.plain = VectorField(grid);
    auto points = label_points(grid);
    const std::size_t n = points.size();
    std::vector<std::array<double, 6>> previous(n);
    double t_prev = 0.0;
    bool first = true;
    std::vector<double> env(n, 0.0);

    auto visit = [&](std::size_t s) {
        const double t = traj.states[s].t;
        const auto gp = gradient(traj.pressures[s]);
        const auto& z = traj.states[s].field(g);
        const std::array<const double*, 6> fields{gp.c[0].data(), gp.c[1].data(), gp.c[2].data(),
                                                  z.c[0].data(),  z.c[1].data(),  z.c[2].data()};
        const double decay = std::pow(w.R + std::abs(t), w.omega());
        const double dt = t - t_prev;
        parallel_for(n, [&](std::size_t begin, std::size_t end) {
            double v[6];
            for (std::size_t q = begin; q < end; ++q) {
                interp.evaluate(fields, points[q], v);
                const double Z3 = v[5] + sg;
                const double factor = std::sqrt(1.0 + v[3] * v[3] + v[4] * v[4] + Z3 * Z3);
                std::array<double, 6> cur{v[0] * factor, v[1] * factor, v[2] * factor, v[0], v[1], v[2]};
                env[q] = std::max(env[q], decay * factor * std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
                if (!first) {
                    for (int c = 0; c < 3; ++c) {
                        out.measured.c[c][q] += 0.5 * dt * (previous[q][c] + cur[c]);
                        out.plain.c[c][q] += 0.5 * dt * (previous[q][3 + c] + cur[3 + c]);
                    }
                }
                previous[q] = cur;
            }
        });
        first = false;
        t_prev = t;
    };
    trace_points(traj, g, traj.t_begin(), t_end, points, nullptr, options, visit);
    for (double e : env) out.envelope = std::max(out.envelope, e);
    out.endpoints = std::move(points);
    return out;
}

std::size_t snapshot_index(const Trajectory& traj, double t) {
    for (std::size_t s = 0; s < traj.size(); ++s)
        if (std::abs(traj.states[s].t - t) <= 1e-12 * std::max(1.0, std::abs(t))) return s;
    throw Error("transport check time must be a snapshot time");
}

}  // namespace

ScatteringField scattering_field(const Trajectory& traj, Family carried, const TraceOptions& options) {
    require_window(traj);
    const auto lines = integrate_lines(traj, carried, traj.t_end(), options);
    ScatteringField f;
    f.manifold.kind = infinity_of(carried, traj.t_end() >= 0.0 ? 1.0 : -1.0);
    f.manifold.grid = traj.grid();
    f.manifold.weight = traj.config.weight;
    f.truncation_T = traj.t_end();
    f.values = traj.states.front().field(carried) - lines.measured;
    f.factor_free = traj.states.front().field(carried) - lines.plain;
    f.envelope = lines.envelope;
    f.tail_bound = tail_bound(lines.envelope, f.truncation_T, f.manifold.weight);
    return f;
}

TransportCheck transport_identity_check(const Trajectory& traj, Family carried, double t, const TraceOptions& options) {
    const auto& zt = traj.states[snapshot_index(traj, t)].field(carried);
    const auto lines = integrate_lines(traj, carried, t, options);
    const Grid3& grid = traj.grid();
    const auto& z0 = traj.states.front().field(carried);
    const PeriodicInterpolator interp(grid, options.interp_points);
    const std::array<const double*, 3> fields{zt.c[0].data(), zt.c[1].data(), zt.c[2].data()};
    TransportCheck out;
    for (std::size_t q = 0; q < grid.size(); ++q) {
        double v[3];
        interp.evaluate(fields, lines.endpoints[q], v);
        double d2 = 0.0, f2 = 0.0;
        for (int c = 0; c < 3; ++c) {
            const double predicted = z0.c[c][q] - lines.plain.c[c][q];
            d2 += (v[c] - predicted) * (v[c] - predicted);
            f2 += z0.c[c][q] * z0.c[c][q];
        }
        out.max_discrepancy = std::max(out.max_discrepancy, std::sqrt(d2));
        out.max_field = std::max(out.max_field, std::sqrt(f2));
    }
    return out;
}

Trajectory thinned(const Trajectory& traj, int k) {
    if (k < 1) throw Error("thinning factor must be >= 1");
    Trajectory out;
    out.config = traj.config;
    out.config.output_stride *= k;
    out.log = traj.log;
    for (std::size_t s = 0; s < traj.size(); s += k) {
        out.states.push_back(traj.states[s]);
        out.pressures.push_back(traj.pressures[s]);
    }
    if ((traj.size() - 1) % k != 0) {
        out.states.push_back(traj.states.back());
        out.pressures.push_back(traj.pressures.back());
    }
    return out;
}

double infinity_sobolev_norm(const VectorField& f, const InfinityManifold& manifold, int order, int max_order) {
    if (order < 0 || order > max_order) throw Error("Sobolev order exceeds the configured maximum");
    require_same_grid(f.grid, manifold.grid);
    const auto lambda = manifold.weight_field();
    double total = 0.0;
    for (int k = 0; k <= order; ++k) {
        const auto dens = derivative_density(f, k);
        double acc = 0.0;
        for (std::size_t q = 0; q < dens.size(); ++q) acc += lambda[q] * dens[q];
        total += acc;
    }
    return total * f.grid.cell_volume();
}

double infinity_sobolev_norm(const ScatteringField& field, int order, int max_order) {
    return infinity_sobolev_norm(field.values, field.manifold, order, max_order);
}

double deviation_norm(const ScatteringField& field, const VectorField& initial, int order) {
    require_same_grid(field.values.grid, initial.grid);
    return std::sqrt(infinity_sobolev_norm(field.values - initial, field.manifold, order));
}

double pair_deviation(const ScatterPair& pair, const ElsasserState& initial, int order) {
    const double a = deviation_norm(pair.plus, initial.z_plus, order);
    const double b = deviation_norm(pair.minus, initial.z_minus, order);
    return std::sqrt(a * a + b * b);
}

double state_norm(const ElsasserState& s, const WeightParams& w, int order) {
    InfinityManifold m;
    m.grid = s.grid();
    m.weight = w;
    return std::sqrt(infinity_sobolev_norm(s.z_plus, m, order) + infinity_sobolev_norm(s.z_minus, m, order));
}

ScatterPair ScatterSet::pair(ScatterCase c) const {
    ScatterPair p;
    p.scatter_case = c;
    p.plus = case_direction(c, Family::plus) > 0.0 ? plus_future : plus_past;
    p.minus = case_direction(c, Family::minus) > 0.0 ? minus_future : minus_past;
    return p;
}

namespace {

Trajectory run_horizon(const ElsasserState& initial, const SimConfig& config, double direction) {
    if (std::abs(initial.t) > 1e-12) throw Error("initial data must sit at t = 0");
    SimConfig c = config;
    c.T = direction * std::abs(config.T);
    return run(c, initial);
}

}  // namespace

ScatterSet scatter_all(const ElsasserState& initial, const SimConfig& config, const TraceOptions& options) {
    ScatterSet set;
    {
        const auto fwd = run_horizon(initial, config, 1.0);
        set.plus_future = scattering_field(fwd, Family::plus, options);
        set.minus_future = scattering_field(fwd, Family::minus, options);
    }
    const auto bwd = run_horizon(initial, config, -1.0);
    set.plus_past = scattering_field(bwd, Family::plus, options);
    set.minus_past = scattering_field(bwd, Family::minus, options);
    return set;
}

ScatterPair forward_map(ScatterCase c, const ElsasserState& initial, const SimConfig& config,
                        const TraceOptions& options) {
    ScatterPair p;
    p.scatter_case = c;
    const double dp = case_direction(c, Family::plus);
    const double dm = case_direction(c, Family::minus);
    if (dp == dm) {
        const auto traj = run_horizon(initial, config, dp);
        p.plus = scattering_field(traj, Family::plus, options);
        p.minus = scattering_field(traj, Family::minus, options);
    } else {
        p.plus = scattering_field(run_horizon(initial, config, dp), Family::plus, options);
        p.minus = scattering_field(run_horizon(initial, config, dm), Family::minus, options);
    }
    return p;
}

namespace {

ElsasserState scaled_state(const ElsasserState& s, double c) {
    ElsasserState out = s;
    out.z_plus = c * s.z_plus;
    out.z_minus = c * s.z_minus;
    return out;
}

void require_sweep(const std::vector<double>& eps) {
    if (eps.size() < 3) throw Error("linearization needs at least three amplitudes spanning a factor of 4");
    double lo = eps.front(), hi = eps.front();
    for (double e : eps) {
        if (!(e > 0.0)) throw Error("amplitudes must be positive");
        lo = std::min(lo, e);
        hi = std::max(hi, e);
    }
    if (hi < 4.0 * lo * (1.0 - 1e-12)) throw Error("linearization needs at least three amplitudes spanning a factor of 4");
}

}  // namespace

LinearizationResult linearization_from(const ElsasserState& direction, const std::vector<double>& eps_list,
                                       const std::vector<ScatterPair>& pairs, const WeightParams& w, int order) {
    require_sweep(eps_list);
    if (pairs.size() != eps_list.size()) throw Error("one scattering pair per amplitude is required");
    LinearizationResult r;
    r.eps = eps_list;
    const double unit = state_norm(direction, w, order);
    bool all_zero = true;
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        const double e = eps_list[i];
        const double dev = pair_deviation(pairs[i], scaled_state(direction, e), order);
        r.deviation.push_back(dev);
        const double rel = unit > 0.0 ? dev / (e * unit) : 0.0;
        r.relative.push_back(rel);
        r.c_fit.push_back(rel / e);
        if (dev > 1e-14 * e * unit) all_zero = false;
    }
    if (all_zero) {
        r.exact_linear = true;
        r.slope = std::numeric_limits<double>::infinity();
        return r;
    }
    std::vector<std::size_t> order_idx(eps_list.size());
    for (std::size_t i = 0; i < order_idx.size(); ++i) order_idx[i] = i;
    std::sort(order_idx.begin(), order_idx.end(), [&](auto a, auto b) { return eps_list[a] < eps_list[b]; });
    for (std::size_t i = 0; i + 1 < order_idx.size(); ++i) {
        if (!(r.deviation[order_idx[i + 1]] > r.deviation[order_idx[i]])) {
            std::ostringstream msg;
            msg << "unresolved regime: deviations";
            for (std::size_t j : order_idx) msg << ' ' << eps_list[j] << ':' << r.deviation[j];
            msg << " do not grow with eps";
            throw Error(msg.str());
        }
    }
    r.slope = loglog_slope(eps_list, r.deviation);
    return r;
}

LinearizationResult linearization_slope(const ElsasserState& direction, ScatterCase c, const std::vector<double>& eps_list,
                                        const SimConfig& config, const TraceOptions& options) {
    require_sweep(eps_list);
    const double norm = initial_norm(direction, config.weight, config.norm_order);
    if (std::abs(norm - 1.0) > 1e-6) throw Error("direction must have unit norm");
    std::vector<ScatterPair> pairs;
    for (double e : eps_list) pairs.push_back(forward_map(c, scaled_state(direction, e), config, options));
    return linearization_from(direction, eps_list, pairs, config.weight, kDefaultSobolevOrder);
}

namespace {

ElsasserState projected(const VectorField& plus, const VectorField& minus) {
    ElsasserState s = zero_state(plus.grid);
    s.z_plus = leray_project(plus);
    s.z_minus = leray_project(minus);
    return s;
}

}  // namespace

Reconstruction reconstruct(const ScatterPair& target, const SimConfig& config, const ReconstructOptions& options) {
    if (options.max_iterations < 1) throw Error("reconstruction needs at least one iteration");
    const WeightParams& w = config.weight;
    Reconstruction out;
    out.state = projected(target.plus.values, target.minus.values);
    double last_update = std::numeric_limits<double>::infinity();
    int increases = 0;
    for (int k = 1; k <= options.max_iterations; ++k) {
        const auto image = forward_map(target.scatter_case, out.state, config, options.trace);
        const VectorField rp = image.plus.values - target.plus.values;
        const VectorField rm = image.minus.values - target.minus.values;
        ReconstructionRow row;
        row.iteration = k;
        row.residual_norm = std::sqrt(infinity_sobolev_norm(rp, target.plus.manifold, options.order) +
                                      infinity_sobolev_norm(rm, target.minus.manifold, options.order));
        ElsasserState next = projected(out.state.z_plus - rp, out.state.z_minus - rm);
        ElsasserState delta = zero_state(next.grid());
        delta.z_plus = next.z_plus - out.state.z_plus;
        delta.z_minus = next.z_minus - out.state.z_minus;
        row.update_norm = state_norm(delta, w, options.order);
        out.state = std::move(next);
        out.log.push_back(row);
        if (options.observer) options.observer(row, out.state);
        if (row.update_norm <= options.tolerance * state_norm(out.state, w, options.order)) {
            out.converged = true;
            break;
        }
        if (row.update_norm > last_update && ++increases >= 2) throw Error("outside local-diffeomorphism basin");
        last_update = row.update_norm;
    }
    return out;
}

void write_reconstruction_csv(const std::filesystem::path& path, const std::vector<ReconstructionRow>& log) {
    CsvWriter w(path, {"iteration", "update_norm", "residual_norm"});
    for (const auto& r : log) w.row({static_cast<double>(r.iteration), r.update_norm, r.residual_norm});
}

void write_scattering_field(const std::filesystem::path& path, const ScatteringField& field,
                            const std::map<std::string, std::string>& extra) {
    auto arrays = to_arrays("values", field.values);
    auto more = to_arrays("factor_free", field.factor_free);
    arrays.insert(arrays.end(), more.begin(), more.end());
    SnapshotMeta meta;
    meta.extra = extra;
    meta.grid = field.values.grid;
    meta.t = field.truncation_T;
    meta.weight = field.manifold.weight;
    meta.extra["kind"] = "scattering";
    meta.extra["infinity"] = to_string(field.manifold.kind);
    meta.extra["tail_bound"] = format_number(field.tail_bound);
    meta.extra["envelope"] = format_number(field.envelope);
    write_container(path, arrays, meta);
}

void write_scattering_slice_csv(const std::filesystem::path& path, const ScatteringField& field) {
    const Grid3& g = field.values.grid;
    CsvWriter w(path, {"u", "v1", "v2", "v3", "w1", "w2", "w3"});
    const int n3 = g.n[2];
    for (int k = 0; k < n3; ++k) {
        const int i3 = (k + n3 / 2) % n3;
        const std::size_t q = g.index(0, 0, i3);
        w.row({g.centered(2, i3), field.values.c[0][q], field.values.c[1][q], field.values.c[2][q],
               field.factor_free.c[0][q], field.factor_free.c[1][q], field.factor_free.c[2][q]});
    }
}

}  // namespace alfven
