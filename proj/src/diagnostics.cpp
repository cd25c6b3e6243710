#include "alfven/diagnostics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>

#include "alfven/csv.hpp"
#include "alfven/parallel.hpp"
#include "alfven/spectral.hpp"

namespace alfven {

namespace {

ScalarField component(const VectorField& v, int c) {
    ScalarField f(v.grid);
    f.data = v.c[c];
    return f;
}

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

/// Adds sum over |alpha| == order of coef(alpha) (d^alpha f)^2 into acc.
void accumulate_derivatives(const Grid3& grid, std::span<const double> f, int order, bool multinomial,
                            std::vector<double>& acc) {
    const auto sp = Spectral::get(grid);
    SpectralArray s;
    sp->forward(f, s);
    SpectralArray d(s.size());
    std::vector<double> out(grid.size());
    for (const auto& alpha : multi_indices(order)) {
        sp->for_each_mode([&](std::size_t m, int i1, int i2, int i3) {
            d[m] = s[m] * sp->derivative_factor(alpha, i1, i2, i3);
        });
        sp->inverse(d, out);
        const double coef =
            multinomial ? factorial(order) / (factorial(alpha[0]) * factorial(alpha[1]) * factorial(alpha[2])) : 1.0;
        for (std::size_t q = 0; q < out.size(); ++q) acc[q] += coef * out[q] * out[q];
    }
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& y, std::size_t upto) {
    double s = 0.0;
    for (std::size_t i = 0; i < upto && i + 1 < t.size(); ++i) s += 0.5 * std::abs(t[i + 1] - t[i]) * (y[i] + y[i + 1]);
    return s;
}

void require_matching(const Trajectory& traj, const std::vector<CharacteristicChart>& charts) {
    if (charts.size() != traj.size()) throw Error("one chart per snapshot is required");
}

void require_chart_time(const ElsasserState& s, const CharacteristicChart& chart) {
    if (std::abs(s.t - chart.t) > 1e-9 * std::max(1.0, std::abs(s.t))) {
        throw Error("chart time does not match the state");
    }
}

ScalarField weight_power(const LabelField& labels, const WeightParams& w, double power) {
    ScalarField out(labels.disp.grid);
    for (std::size_t q = 0; q < out.size(); ++q) out[q] = std::pow(weight_of(labels.u(q), w), power);
    return out;
}

}  // namespace

ScalarField derivative_density(const VectorField& z, int order) {
    if (order < 0) throw Error("derivative order must be non-negative");
    ScalarField out(z.grid);
    for (int c = 0; c < 3; ++c) accumulate_derivatives(z.grid, z.c[c], order, false, out.data);
    return out;
}

ScalarField flux_density(const VectorField& z, int order) {
    if (order < 0) throw Error("derivative order must be non-negative");
    if (order == 0) return derivative_density(z, 0);
    return derivative_density(curl(z), order - 1);
}

ScalarField energy_weight(const LabelField& labels, const WeightParams& w) {
    return weight_power(labels, w, 2.0 * w.omega());
}

FamilyPair weighted_energy(const ElsasserState& s, const CharacteristicChart& chart, const WeightParams& w, int order,
                           int max_order) {
    if (order < 0 || order > max_order) throw Error("energy order exceeds the configured maximum");
    require_chart_time(s, chart);
    FamilyPair e;
    for (Family f : {Family::plus, Family::minus}) {
        const auto lam = energy_weight(chart.of(opposite(f)), w);
        const auto dens = derivative_density(s.field(f), order);
        double acc = 0.0;
        for (std::size_t q = 0; q < dens.size(); ++q) acc += lam[q] * dens[q];
        (f == Family::plus ? e.plus : e.minus) = acc * s.grid().cell_volume();
    }
    return e;
}

ScalarField surface_measure(const ElsasserState& s, const LabelField& labels) {
    const Grid3& g = s.grid();
    require_same_grid(g, labels.disp.grid);
    const auto grad = gradient(component(labels.disp, 2));
    const auto& z = s.field(labels.family);
    const double sg = sign_of(labels.family);
    ScalarField out(g);
    for (std::size_t q = 0; q < g.size(); ++q) {
        const double u1 = grad.c[0][q];
        const double u2 = grad.c[1][q];
        const double u3 = 1.0 + grad.c[2][q];
        const double ut = -(z.c[0][q] * u1 + z.c[1][q] * u2 + (z.c[2][q] + sg) * u3);
        out[q] = std::sqrt(1.0 + ut * ut + u1 * u1 + u2 * u2);
    }
    return out;
}

double level_slice_integral(const ScalarField& density, const LabelField& labels, double value) {
    const Grid3& g = labels.disp.grid;
    require_same_grid(g, density.grid);
    const int n3 = g.n[2];
    const double h3 = g.spacing(2);
    const double shift = sign_of(labels.family) * labels.t;
    std::vector<double> column_sum(static_cast<std::size_t>(g.n[0]) * g.n[1]);
    std::atomic<bool> escaped{false};
    parallel_for(column_sum.size(), [&](std::size_t begin, std::size_t end) {
        std::vector<double> u(n3), d(n3);
        for (std::size_t col = begin; col < end; ++col) {
            const int i1 = static_cast<int>(col / g.n[1]);
            const int i2 = static_cast<int>(col % g.n[1]);
            // Column in increasing unwrapped x3, starting at -L3/2.
            for (int k = 0; k < n3; ++k) {
                const int i3 = (k + n3 / 2) % n3;
                const std::size_t q = g.index(i1, i2, i3);
                u[k] = -g.L[2] / 2.0 + k * h3 - shift + labels.disp.c[2][q];
                d[k] = density[q];
            }
            int k0 = -1;
            for (int k = 0; k + 1 < n3; ++k) {
                if ((u[k] - value) * (u[k + 1] - value) <= 0.0 && u[k] != u[k + 1]) {
                    k0 = k;
                    break;
                }
            }
            if (k0 < 2 || k0 + 1 > n3 - 3) {
                escaped = true;
                continue;
            }
            // Cubic Lagrange through k0-1..k0+2 in the local coordinate s = k - k0.
            auto weights = [](double s, double* w) {
                w[0] = -s * (s - 1.0) * (s - 2.0) / 6.0;
                w[1] = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
                w[2] = -(s + 1.0) * s * (s - 2.0) / 2.0;
                w[3] = (s + 1.0) * s * (s - 1.0) / 6.0;
            };
            double s = (value - u[k0]) / (u[k0 + 1] - u[k0]);
            double w[4];
            for (int it = 0; it < 4; ++it) {
                weights(s, w);
                double f = -value;
                for (int j = 0; j < 4; ++j) f += w[j] * u[k0 - 1 + j];
                const double e = 1e-6;
                double wp[4];
                weights(s + e, wp);
                double fp = -value;
                for (int j = 0; j < 4; ++j) fp += wp[j] * u[k0 - 1 + j];
                const double slope = (fp - f) / e;
                if (slope <= 0.0) break;
                s -= f / slope;
                s = std::clamp(s, 0.0, 1.0);
            }
            weights(s, w);
            double v = 0.0;
            for (int j = 0; j < 4; ++j) v += w[j] * d[k0 - 1 + j];
            column_sum[col] = v;
        }
    });
    if (escaped) throw Error("level set exits the trusted window");
    double total = 0.0;
    for (double v : column_sum) total += v;
    return total * g.spacing(0) * g.spacing(1);
}

double FluxSlices::flux(std::size_t level, std::size_t upto) const {
    std::vector<double> y(values.size());
    for (std::size_t s = 0; s < values.size(); ++s) y[s] = values[s][level];
    return trapezoid(times, y, upto);
}

double FluxSlices::sup_flux(std::size_t upto) const {
    double m = 0.0;
    for (std::size_t i = 0; i < levels.size(); ++i) m = std::max(m, flux(i, upto));
    return m;
}

std::vector<double> flux_levels(const Grid3& grid, Family g, double t0, double t1, int count) {
    if (count < 1) throw Error("flux level count must be positive");
    const double margin = 4.0 * grid.spacing(2);
    const double sg = sign_of(g);
    const double lo_shift = std::min(sg * t0, sg * t1);
    const double hi_shift = std::max(sg * t0, sg * t1);
    const double lo = -grid.L[2] / 2.0 + margin - lo_shift;
    const double hi = grid.L[2] / 2.0 - margin - hi_shift;
    if (!(hi > lo)) throw Error("level set exits the trusted window");
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i) out[i] = count == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (count - 1);
    return out;
}

void append_flux_slice(FluxSlices& slices, const ElsasserState& s, const CharacteristicChart& chart,
                       const WeightParams& w) {
    require_chart_time(s, chart);
    const Family f = slices.family;
    const auto lam = energy_weight(chart.of(opposite(f)), w);
    const auto dens = flux_density(s.field(f), slices.order);
    const auto measure = surface_measure(s, chart.of(f));
    ScalarField g(s.grid());
    for (std::size_t q = 0; q < g.size(); ++q) g[q] = lam[q] * dens[q] * measure[q];
    std::vector<double> row(slices.levels.size());
    for (std::size_t i = 0; i < row.size(); ++i) row[i] = level_slice_integral(g, chart.of(f), slices.levels[i]);
    slices.times.push_back(s.t);
    slices.values.push_back(std::move(row));
}

double flux_surface_integral(const Trajectory& traj, const std::vector<CharacteristicChart>& charts, Family g,
                             double value, int order, const WeightParams& w) {
    require_matching(traj, charts);
    FluxSlices slices;
    slices.family = g;
    slices.order = order;
    slices.levels = {value};
    for (std::size_t s = 0; s < traj.size(); ++s) append_flux_slice(slices, traj.states[s], charts[s], w);
    return slices.flux(0, traj.size() - 1);
}

namespace {

double spacetime_integrand(const ElsasserState& s, const CharacteristicChart& chart, const WeightParams& w,
                           int order) {
    double total = 0.0;
    for (Family f : {Family::plus, Family::minus}) {
        const auto lam = energy_weight(chart.of(opposite(f)), w);
        const auto own = weight_power(chart.of(f), w, -w.omega());
        const auto dens = derivative_density(s.field(f), order);
        double acc = 0.0;
        for (std::size_t q = 0; q < dens.size(); ++q) acc += lam[q] * own[q] * dens[q];
        total += acc * s.grid().cell_volume();
    }
    return total;
}

double source_integrand(const ElsasserState& s, const ScalarField& p, const CharacteristicChart& chart,
                        const WeightParams& w) {
    const auto gp = gradient(p);
    double total = 0.0;
    for (Family f : {Family::plus, Family::minus}) {
        const auto lam = energy_weight(chart.of(opposite(f)), w);
        const auto& z = s.field(f);
        double acc = 0.0;
        for (std::size_t q = 0; q < lam.size(); ++q) {
            const double zn = std::sqrt(z.c[0][q] * z.c[0][q] + z.c[1][q] * z.c[1][q] + z.c[2][q] * z.c[2][q]);
            const double pn =
                std::sqrt(gp.c[0][q] * gp.c[0][q] + gp.c[1][q] * gp.c[1][q] + gp.c[2][q] * gp.c[2][q]);
            acc += lam[q] * zn * pn;
        }
        total += acc * s.grid().cell_volume();
    }
    return total;
}

}  // namespace

double spacetime_flux_check(const Trajectory& traj, const std::vector<CharacteristicChart>& charts,
                            const WeightParams& w, double epsilon, int order) {
    require_matching(traj, charts);
    if (!(epsilon > 0.0)) throw Error("epsilon must be positive");
    std::vector<double> t, y;
    for (std::size_t s = 0; s < traj.size(); ++s) {
        require_chart_time(traj.states[s], charts[s]);
        t.push_back(traj.states[s].t);
        y.push_back(spacetime_integrand(traj.states[s], charts[s], w, order));
    }
    return trapezoid(t, y, t.size()) / (epsilon * epsilon);
}

double SeparationReport::min_weight_ratio() const {
    return weight_ratio.empty() ? 0.0 : *std::min_element(weight_ratio.begin(), weight_ratio.end());
}

double SeparationReport::max_cross_ratio() const {
    return cross_ratio.empty() ? 0.0 : *std::max_element(cross_ratio.begin(), cross_ratio.end());
}

void append_separation(SeparationReport& report, const ElsasserState& s, const CharacteristicChart& chart,
                       const WeightParams& w, double epsilon) {
    require_chart_time(s, chart);
    const Grid3& g = s.grid();
    const double om = w.omega();
    std::vector<double> amp(g.size());
    double peak = 0.0;
    for (std::size_t q = 0; q < g.size(); ++q) {
        double a = 0.0;
        for (int c = 0; c < 3; ++c) a += s.z_plus.c[c][q] * s.z_plus.c[c][q] + s.z_minus.c[c][q] * s.z_minus.c[c][q];
        amp[q] = a;
        peak = std::max(peak, a);
    }
    const double cut = peak * kSupportThreshold * kSupportThreshold;
    // Pointwise max over |alpha| <= 1 of |d^alpha z|.
    auto envelope = [&](const VectorField& z) {
        std::vector<double> e(g.size());
        for (std::size_t q = 0; q < g.size(); ++q)
            e[q] = std::sqrt(z.c[0][q] * z.c[0][q] + z.c[1][q] * z.c[1][q] + z.c[2][q] * z.c[2][q]);
        const auto grads = component_gradients(z);
        for (int l = 0; l < 3; ++l)
            for (std::size_t q = 0; q < g.size(); ++q) {
                double n2 = 0.0;
                for (int a = 0; a < 3; ++a) n2 += grads[a].c[l][q] * grads[a].c[l][q];
                e[q] = std::max(e[q], std::sqrt(n2));
            }
        return e;
    };
    const auto ep = envelope(s.z_plus);
    const auto em = envelope(s.z_minus);
    double min_ratio = std::numeric_limits<double>::infinity();
    double cross = 0.0;
    double product = 0.0;
    for (std::size_t q = 0; q < g.size(); ++q) {
        const double wp = weight_of(chart.plus.u(q), w);
        const double wm = weight_of(chart.minus.u(q), w);
        if (peak == 0.0 || amp[q] >= cut) min_ratio = std::min(min_ratio, wp * wm / (w.R + std::abs(s.t)));
        cross = std::max(cross, ep[q] * em[q] * std::pow(wp * wm, om));
        double zp = 0.0, zm = 0.0;
        for (int c = 0; c < 3; ++c) {
            zp += s.z_plus.c[c][q] * s.z_plus.c[c][q];
            zm += s.z_minus.c[c][q] * s.z_minus.c[c][q];
        }
        product = std::max(product, std::sqrt(zp * zm));
    }
    report.times.push_back(s.t);
    report.weight_ratio.push_back(min_ratio);
    report.cross_ratio.push_back(cross / (epsilon * epsilon));
    report.cross_product.push_back(product);
}

SeparationReport separation_report(const Trajectory& traj, const std::vector<CharacteristicChart>& charts,
                                   const WeightParams& w, double epsilon) {
    require_matching(traj, charts);
    if (!(epsilon > 0.0)) throw Error("epsilon must be positive");
    SeparationReport r;
    for (std::size_t s = 0; s < traj.size(); ++s) append_separation(r, traj.states[s], charts[s], w, epsilon);
    return r;
}

double max_tensor_norm(const ScalarField& f, int order) {
    std::vector<double> acc(f.size());
    accumulate_derivatives(f.grid, f.data, order, true, acc);
    return std::sqrt(*std::max_element(acc.begin(), acc.end()));
}

double PressureDecayReport::supremum(int l) const {
    const auto& s = series.at(l - 1);
    return s.empty() ? 0.0 : *std::max_element(s.begin(), s.end());
}

double PressureDecayReport::end_ratio(int l) const {
    const auto& s = series.at(l - 1);
    if (s.empty() || s.front() == 0.0) return 0.0;
    return s.back() / s.front();
}

PressureDecayReport pressure_decay_report(const Trajectory& traj, const WeightParams& w, double epsilon) {
    if (!(epsilon > 0.0)) throw Error("epsilon must be positive");
    PressureDecayReport r;
    for (std::size_t s = 0; s < traj.size(); ++s) {
        const double t = traj.states[s].t;
        r.times.push_back(t);
        const double scale = std::pow(w.R + std::abs(t), w.omega()) / (epsilon * epsilon);
        for (int l = 1; l <= 3; ++l) r.series[l - 1].push_back(scale * max_tensor_norm(traj.pressures[s], l));
    }
    return r;
}

double divcurl_constant(const VectorField& v, const ScalarField& lambda) {
    require_finite(v);
    require_finite(lambda);
    require_same_grid(v.grid, lambda.grid);
    const Grid3& g = v.grid;
    for (int i1 = 0; i1 < g.n[0]; ++i1)
        for (int i2 = 0; i2 < g.n[1]; ++i2)
            for (int i3 = 0; i3 < g.n[2]; ++i3) {
                const std::size_t q = g.index(i1, i2, i3);
                const double lam = lambda[q];
                if (!(lam >= 1.0 - 1e-12)) throw Error("weight admissibility violated");
                const std::array<std::size_t, 3> up{g.index((i1 + 1) % g.n[0], i2, i3),
                                                    g.index(i1, (i2 + 1) % g.n[1], i3),
                                                    g.index(i1, i2, (i3 + 1) % g.n[2])};
                const std::array<std::size_t, 3> dn{g.index((i1 + g.n[0] - 1) % g.n[0], i2, i3),
                                                    g.index(i1, (i2 + g.n[1] - 1) % g.n[1], i3),
                                                    g.index(i1, i2, (i3 + g.n[2] - 1) % g.n[2])};
                double n2 = 0.0;
                for (int a = 0; a < 3; ++a) {
                    const double d = (lambda[up[a]] - lambda[dn[a]]) / (2.0 * g.spacing(a));
                    n2 += d * d;
                }
                if (std::sqrt(n2) > kMaxWeightLogGradient * lam) throw Error("weight admissibility violated");
            }
    const auto grads = component_gradients(v);
    const auto div = divergence(v);
    const auto rot = curl(v);
    double num = 0.0, den = 0.0;
    for (std::size_t q = 0; q < g.size(); ++q) {
        double gn = 0.0;
        for (int a = 0; a < 3; ++a)
            for (int l = 0; l < 3; ++l) gn += grads[a].c[l][q] * grads[a].c[l][q];
        double cn = 0.0, vn = 0.0;
        for (int a = 0; a < 3; ++a) {
            cn += rot.c[a][q] * rot.c[a][q];
            vn += v.c[a][q] * v.c[a][q];
        }
        num += lambda[q] * gn;
        den += lambda[q] * (div[q] * div[q] + cn + vn);
    }
    if (den == 0.0) return 0.0;
    return num / den;
}

double DivCurlCorpus::max_ratio() const {
    return ratios.empty() ? 0.0 : *std::max_element(ratios.begin(), ratios.end());
}

DivCurlCorpus divcurl_corpus(const Grid3& grid, int count, std::uint64_t seed, const WeightParams& w, int band) {
    for (int a = 0; a < 3; ++a)
        if (3 * band >= grid.n[a]) throw Error("corpus band exceeds the dealiased range");
    const auto sp = Spectral::get(grid);
    ScalarField lambda(grid);
    for (std::size_t q = 0; q < grid.size(); ++q)
        lambda[q] = std::pow(weight_of(grid.centered_point(q)[2], w), 2.0 * w.omega());
    auto slot = [&](int m1, int m2, int m3) {
        const int i1 = (m1 + grid.n[0]) % grid.n[0];
        const int i2 = (m2 + grid.n[1]) % grid.n[1];
        return (static_cast<std::size_t>(i1) * grid.n[1] + i2) * sp->half_n3() + m3;
    };
    DivCurlCorpus out;
    const double n = static_cast<double>(grid.size());
    for (int i = 0; i < count; ++i) {
        std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(i));
        std::normal_distribution<double> nd;
        VectorField v(grid);
        for (int c = 0; c < 3; ++c) {
            SpectralArray s(sp->spectral_size(), Complex{0.0, 0.0});
            for (int m1 = -band; m1 <= band; ++m1)
                for (int m2 = -band; m2 <= band; ++m2)
                    for (int m3 = -band; m3 <= band; ++m3) {
                        const double amp = nd(rng) / (1.0 + m1 * m1 + m2 * m2 + m3 * m3);
                        const double phase = nd(rng);
                        const Complex half = 0.5 * amp * n * std::polar(1.0, phase);
                        if (m3 >= 0) s[slot(m1, m2, m3)] += half;
                        if (m3 <= 0) s[slot(-m1, -m2, -m3)] += std::conj(half);
                    }
            sp->inverse(s, v.c[c]);
        }
        out.ratios.push_back(divcurl_constant(v, lambda));
    }
    return out;
}

double LinearEnergyCheck::slack() const {
    double m = std::numeric_limits<double>::infinity();
    // The energy form is an identity at the initial time.
    for (std::size_t i = slack_energy.size() > 1 ? 1 : 0; i < slack_energy.size(); ++i) m = std::min(m, slack_energy[i]);
    for (double s : slack_flux) m = std::min(m, s);
    return std::isfinite(m) ? m : 0.0;
}

namespace {

/// Incremental builder shared by the standalone check and the streamed report.
struct LinearEnergyAccumulator {
    WeightParams w;
    FluxSlices plus, minus;
    std::vector<double> source;
    LinearEnergyCheck check;

    LinearEnergyAccumulator(const Grid3& grid, const WeightParams& weight, double t0, double t1) : w(weight) {
        plus.family = Family::plus;
        minus.family = Family::minus;
        plus.levels = flux_levels(grid, Family::plus, t0, t1);
        minus.levels = flux_levels(grid, Family::minus, t0, t1);
    }

    void add(const ElsasserState& s, const ScalarField& p, const CharacteristicChart& chart) {
        append_flux_slice(plus, s, chart, w);
        append_flux_slice(minus, s, chart, w);
        source.push_back(source_integrand(s, p, chart, w));
        const double energy = weighted_energy(s, chart, w, 0).total();
        check.times.push_back(s.t);
        if (check.times.size() == 1) check.initial_energy = energy;
        const std::size_t last = check.times.size() - 1;
        const double rhs = check.initial_energy + 2.0 * trapezoid(check.times, source, last);
        check.slack_energy.push_back(rhs - energy);
        check.slack_flux.push_back(rhs - plus.sup_flux(last) - minus.sup_flux(last));
    }
};

}  // namespace

LinearEnergyCheck linear_energy_identity_check(const Trajectory& traj, const std::vector<CharacteristicChart>& charts,
                                               const WeightParams& w) {
    require_matching(traj, charts);
    LinearEnergyAccumulator acc(traj.grid(), w, traj.t_begin(), traj.t_end());
    for (std::size_t s = 0; s < traj.size(); ++s) acc.add(traj.states[s], traj.pressures[s], charts[s]);
    return acc.check;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw Error("slope fit needs at least two matching points");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw Error("slope fit needs positive values");
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double den = n * sxx - sx * sx;
    if (den == 0.0) throw Error("slope fit needs distinct abscissae");
    return (n * sxy - sx * sy) / den;
}

EnergyReport energy_report(const Trajectory& traj, const EnergyOptions& options) {
    const WeightParams& w = traj.config.weight;
    /// A zero-amplitude run has zero numerators; normalizing by 1 reports zeros.
    const double eps = traj.config.epsilon > 0.0 ? traj.config.epsilon : 1.0;
    const Grid3& grid = traj.grid();
    EnergyReport r;
    r.E_k.resize(options.max_order + 1);
    FluxSlices flux_plus, flux_minus;
    flux_plus.family = Family::plus;
    flux_minus.family = Family::minus;
    flux_plus.order = flux_minus.order = options.flux_order;
    flux_plus.levels = flux_levels(grid, Family::plus, traj.t_begin(), traj.t_end());
    flux_minus.levels = flux_levels(grid, Family::minus, traj.t_begin(), traj.t_end());
    LinearEnergyAccumulator linear(grid, w, traj.t_begin(), traj.t_end());
    SeparationReport& sep = r.separation;
    std::vector<double> spacetime;
    double c0 = 0.0;

    chart_series(
        traj,
        [&](std::size_t s, const CharacteristicChart& chart) {
            const auto& st = traj.states[s];
            r.times.push_back(st.t);
            for (int k = 0; k <= options.max_order; ++k) {
                const auto e = weighted_energy(st, chart, w, k, options.max_order);
                if (k == 0) {
                    r.E_plus.push_back(e.plus);
                    r.E_minus.push_back(e.minus);
                }
                r.E_k[k].push_back(e.total());
            }
            append_flux_slice(flux_plus, st, chart, w);
            append_flux_slice(flux_minus, st, chart, w);
            r.F_plus.push_back(flux_plus.sup_flux(s));
            r.F_minus.push_back(flux_minus.sup_flux(s));
            linear.add(st, traj.pressures[s], chart);
            append_separation(sep, st, chart, w, eps);
            spacetime.push_back(spacetime_integrand(st, chart, w, options.flux_order));
            for (Family f : {Family::plus, Family::minus})
                c0 = std::max(c0, jacobian_report(chart.of(f)).max_deviation / eps);
        },
        options.trace);

    r.pressure_decay = pressure_decay_report(traj, w, eps);
    r.linear = linear.check;
    const auto& decay = r.pressure_decay;
    auto& fc = r.fitted_constants;
    const double e0 = r.E_k[0].front();
    double emax = 0.0;
    for (double e : r.E_k[0]) emax = std::max(emax, e);
    fc["energy_ratio"] = e0 > 0.0 ? emax / e0 : 0.0;
    fc["C0"] = c0;
    fc["C1"] = std::sqrt(std::max(r.F_plus.back(), r.F_minus.back())) / eps;
    fc["spacetime_flux_ratio"] = trapezoid(r.times, spacetime, r.times.size()) / (eps * eps);
    for (int l = 1; l <= 3; ++l) {
        fc["pressure_decay_sup_l" + std::to_string(l)] = decay.supremum(l);
        fc["pressure_decay_end_ratio_l" + std::to_string(l)] = decay.end_ratio(l);
    }
    fc["separation_min_weight_ratio"] = sep.min_weight_ratio();
    fc["separation_max_cross_ratio"] = sep.max_cross_ratio();
    fc["linear_energy_slack_relative"] = linear.check.initial_energy > 0.0
                                             ? linear.check.slack() / linear.check.initial_energy
                                             : linear.check.slack();
    return r;
}

void write_separation_csv(const std::filesystem::path& path, const SeparationReport& report) {
    CsvWriter w(path, {"t", "weight_ratio", "cross_ratio", "cross_product"});
    for (std::size_t s = 0; s < report.times.size(); ++s)
        w.row({report.times[s], report.weight_ratio[s], report.cross_ratio[s], report.cross_product[s]});
}

void write_pressure_decay_csv(const std::filesystem::path& path, const PressureDecayReport& report) {
    CsvWriter w(path, {"t", "l1", "l2", "l3"});
    for (std::size_t s = 0; s < report.times.size(); ++s)
        w.row({report.times[s], report.series[0][s], report.series[1][s], report.series[2][s]});
}

void write_linear_energy_csv(const std::filesystem::path& path, const LinearEnergyCheck& check) {
    CsvWriter w(path, {"t", "slack_energy", "slack_flux"});
    for (std::size_t s = 0; s < check.times.size(); ++s)
        w.row({check.times[s], check.slack_energy[s], check.slack_flux[s]});
}

void write_energy_csv(const std::filesystem::path& path, const EnergyReport& report) {
    std::vector<std::string> header{"t", "E_plus", "E_minus"};
    for (std::size_t k = 0; k < report.E_k.size(); ++k) header.push_back("E_" + std::to_string(k));
    header.push_back("F_plus");
    header.push_back("F_minus");
    CsvWriter w(path, header);
    for (std::size_t s = 0; s < report.times.size(); ++s) {
        std::vector<double> row{report.times[s], report.E_plus[s], report.E_minus[s]};
        for (const auto& ek : report.E_k) row.push_back(ek[s]);
        row.push_back(report.F_plus[s]);
        row.push_back(report.F_minus[s]);
        w.row(row);
    }
}

std::string fitted_constants_text(const EnergyReport& report) {
    std::string out;
    for (const auto& [name, value] : report.fitted_constants) out += name + " = " + format_number(value) + "\n";
    return out;
}

}  // namespace alfven
