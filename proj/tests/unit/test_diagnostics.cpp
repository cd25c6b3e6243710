#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <numbers>

#include "alfven/csv.hpp"
#include "alfven/diagnostics.hpp"
#include "alfven/initial_data.hpp"
#include "helpers.hpp"

using namespace alfven;

namespace {

SimConfig desk(int n, double T, double eps = 0.05, InitialRecipe::Kind kind = InitialRecipe::Kind::two_family) {
    SimConfig c;
    c.grid = Grid3(n, n, n, 20.0, 20.0, 20.0);
    c.T = T;
    c.epsilon = eps;
    c.output_stride = 2;
    c.recipe.kind = kind;
    return c;
}

struct RunWithCharts {
    Trajectory traj;
    std::vector<CharacteristicChart> charts;
};

const RunWithCharts& two_family_run() {
    static const RunWithCharts r = [] {
        RunWithCharts out;
        out.traj = run(desk(32, 2.0));
        out.charts = chart_series(out.traj);
        return out;
    }();
    return r;
}

const RunWithCharts& one_family_run() {
    static const RunWithCharts r = [] {
        RunWithCharts out;
        out.traj = run(desk(24, 1.0, 0.05, InitialRecipe::Kind::one_family));
        out.charts = chart_series(out.traj);
        return out;
    }();
    return r;
}

RunWithCharts zero_run() {
    RunWithCharts out;
    out.traj = run(desk(16, 1.0, 0.05, InitialRecipe::Kind::zero));
    out.charts = chart_series(out.traj);
    return out;
}

ElsasserState scaled(const ElsasserState& s, double c) {
    ElsasserState out = s;
    out.z_plus = c * s.z_plus;
    out.z_minus = c * s.z_minus;
    return out;
}

}  // namespace

TEST_CASE("zero fluctuation: energies, fluxes and measures are trivial") {
    const auto r = zero_run();
    const WeightParams w;
    const auto& last = r.traj.states.back();
    const auto e = weighted_energy(last, r.charts.back(), w, 2);
    CHECK(e.plus == 0.0);
    CHECK(e.minus == 0.0);
    CHECK(flux_surface_integral(r.traj, r.charts, Family::plus, 0.0, 0, w) == 0.0);
    CHECK(spacetime_flux_check(r.traj, r.charts, w, 0.05) == 0.0);
    const auto measure = surface_measure(last, r.charts.back().minus);
    for (double m : measure.data) CHECK(m == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    const ScalarField ones(r.traj.grid(), 1.0);
    CHECK(level_slice_integral(ones, r.charts.back().plus, 1.0) == doctest::Approx(400.0).epsilon(1e-12));
    const auto lin = linear_energy_identity_check(r.traj, r.charts, w);
    CHECK(lin.slack() == 0.0);
}

TEST_CASE("zero run weight separation matches the straight-line product") {
    const auto r = zero_run();
    const WeightParams w;
    const auto sep = separation_report(r.traj, r.charts, w, 0.05);
    const Grid3& g = r.traj.grid();
    for (std::size_t s = 0; s < sep.times.size(); ++s) {
        const double t = sep.times[s];
        double expect = 1e300;
        for (int k = 0; k < g.n[2]; ++k) {
            const double x3 = g.centered(2, k);
            expect = std::min(expect, weight_of(x3 - t, w) * weight_of(x3 + t, w) / (w.R + t));
        }
        CHECK(sep.weight_ratio[s] == doctest::Approx(expect).epsilon(1e-12));
        CHECK(sep.weight_ratio[s] >= w.R / 2.0);
    }
    CHECK(sep.max_cross_ratio() == 0.0);
}

TEST_CASE("energy order is bounded by the configured maximum") {
    const auto r = zero_run();
    CHECK_THROWS_WITH_AS((void)weighted_energy(r.traj.states[0], r.charts[0], WeightParams{}, 4),
                         "energy order exceeds the configured maximum", Error);
    CHECK_THROWS_AS((void)weighted_energy(r.traj.states[1], r.charts[0], WeightParams{}, 0), Error);
}

TEST_CASE("flat-weight energy reduces to the plain L2 norm and is quadratic") {
    const Grid3 g(24, 24, 24, 20.0, 20.0, 20.0);
    ElsasserState s = zero_state(g);
    s.z_plus = localized_blob(g, 3, 1.5, 0.01);
    const auto chart = CharacteristicChart{0.0, straight_labels(g, Family::plus, 0.0),
                                           straight_labels(g, Family::minus, 0.0)};
    WeightParams flat;
    flat.R = 1e6;
    const double norm = std::pow(flat.R, 2.0 * flat.omega());
    const double e1 = weighted_energy(s, chart, flat).plus / norm;
    CHECK(e1 == doctest::Approx(l2_squared(s.z_plus)).epsilon(1e-6));
    const double e3 = weighted_energy(scaled(s, 3.0), chart, flat).plus / norm;
    CHECK(e3 == doctest::Approx(9.0 * e1).epsilon(1e-12));
}

TEST_CASE("weighted functionals are quadratically homogeneous") {
    const auto& r = two_family_run();
    const WeightParams w;
    const auto& st = r.traj.states.back();
    const auto& chart = r.charts.back();
    for (int k = 0; k <= 3; ++k) {
        const auto a = weighted_energy(st, chart, w, k);
        const auto b = weighted_energy(scaled(st, 2.0), chart, w, k);
        CHECK(b.plus == doctest::Approx(4.0 * a.plus).epsilon(1e-12));
        CHECK(b.minus == doctest::Approx(4.0 * a.minus).epsilon(1e-12));
    }
    const auto dens = flux_density(st.z_plus, 1);
    const auto dens2 = flux_density(2.0 * st.z_plus, 1);
    CHECK(level_slice_integral(dens2, chart.plus, -1.0) ==
          doctest::Approx(4.0 * level_slice_integral(dens, chart.plus, -1.0)).epsilon(1e-12));
}

TEST_CASE("level sets outside the trusted window are rejected") {
    const auto& r = two_family_run();
    const ScalarField ones(r.traj.grid(), 1.0);
    CHECK_THROWS_WITH_AS((void)level_slice_integral(ones, r.charts.back().plus, 9.5),
                         "level set exits the trusted window", Error);
    CHECK_THROWS_AS((void)flux_levels(r.traj.grid(), Family::plus, 0.0, 19.0), Error);
    const auto levels = flux_levels(r.traj.grid(), Family::plus, 0.0, 2.0);
    CHECK(levels.size() == static_cast<std::size_t>(kFluxLevels));
    CHECK(levels.front() < levels.back());
}

TEST_CASE("two-family run: energy bounded and linear energy inequality holds") {
    const auto& r = two_family_run();
    const WeightParams w;
    const double e0 = weighted_energy(r.traj.states[0], r.charts[0], w).total();
    double emax = 0.0;
    for (std::size_t s = 0; s < r.traj.size(); ++s)
        emax = std::max(emax, weighted_energy(r.traj.states[s], r.charts[s], w).total());
    CHECK(emax <= 4.0 * e0);
    const auto lin = linear_energy_identity_check(r.traj, r.charts, w);
    CHECK(lin.slack() >= -1e-4 * lin.initial_energy);
    const double f = flux_surface_integral(r.traj, r.charts, Family::plus, -1.5, 0, w);
    CHECK(f > 0.0);
    CHECK(f < lin.initial_energy);
}

TEST_CASE("one-family run: energy equality and vanishing interactions") {
    const auto& r = one_family_run();
    const WeightParams w;
    const auto lin = linear_energy_identity_check(r.traj, r.charts, w);
    /// Exact in the continuum; the residue is the rectangle rule on a shifted
    /// product of weight and data.
    for (double s : lin.slack_energy) CHECK(std::abs(s) <= 1e-4 * lin.initial_energy);
    const auto sep = separation_report(r.traj, r.charts, w, 0.05);
    CHECK(sep.max_cross_ratio() == 0.0);
    const auto decay = pressure_decay_report(r.traj, w, 0.05);
    for (int l = 1; l <= 3; ++l) CHECK(decay.supremum(l) == 0.0);
}

TEST_CASE("energies are invariant under lattice shifts of the data") {
    const SimConfig cfg = desk(24, 1.0);
    const ElsasserState init = make_initial_state(cfg.grid, cfg.recipe, cfg.epsilon, cfg.weight, cfg.norm_order);
    const auto a = run(cfg, init);
    const auto b = run(cfg, shifted(init, 5, -3));
    const auto ca = label_chart(a, a.t_end());
    const auto cb = label_chart(b, b.t_end());
    const WeightParams w;
    for (int k = 0; k <= 1; ++k) {
        const auto ea = weighted_energy(a.states.back(), ca, w, k);
        const auto eb = weighted_energy(b.states.back(), cb, w, k);
        CHECK(eb.plus == doctest::Approx(ea.plus).epsilon(1e-8));
        CHECK(eb.minus == doctest::Approx(ea.minus).epsilon(1e-8));
    }
}

TEST_CASE("tensor norm counts ordered index tuples") {
    const Grid3 g = testing_support::cube(16);
    const auto f = testing_support::scalar(g, [](double x, double y, double) { return std::sin(x) + std::sin(y); });
    // grad^2 f = diag(-sin x, -sin y): norm sqrt(sin^2 x + sin^2 y), max sqrt 2.
    CHECK(max_tensor_norm(f, 2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
    const auto h = testing_support::scalar(g, [](double x, double y, double) { return std::sin(x + y); });
    // Every ordered pair contributes sin^2: 4 entries.
    CHECK(max_tensor_norm(h, 2) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("div-curl ratio: closed-form fields and admissibility") {
    const Grid3 g = testing_support::cube(16);
    const ScalarField one(g, 1.0);
    const auto v = testing_support::vector(
        g, [](double, double, double) { return 0.0; }, [](double, double, double) { return 0.0; },
        [](double x, double, double) { return std::sin(x); });
    CHECK(divcurl_constant(v, one) <= 1.0 + 1e-9);
    const auto phi = testing_support::random_band_limited(g, 7, 2);
    auto grad = gradient(phi);
    CHECK(divcurl_constant(grad, one) <= 1.0 + 1e-9);
    const ScalarField small(g, 0.5);
    CHECK_THROWS_WITH_AS((void)divcurl_constant(v, small), "weight admissibility violated", Error);
    const auto steep = testing_support::scalar(g, [](double x, double, double) { return std::exp(20.0 * std::sin(x)) + 1.0; });
    CHECK_THROWS_AS((void)divcurl_constant(v, steep), Error);
}

TEST_CASE("div-curl corpus constant is stable under refinement") {
    const WeightParams w;
    const auto coarse = divcurl_corpus(Grid3(24, 24, 24, 20.0, 20.0, 20.0), 20, 11, w);
    const auto fine = divcurl_corpus(Grid3(32, 32, 32, 20.0, 20.0, 20.0), 20, 11, w);
    REQUIRE(coarse.ratios.size() == 20);
    CHECK(coarse.max_ratio() > 0.0);
    CHECK(fine.max_ratio() == doctest::Approx(coarse.max_ratio()).epsilon(0.05));
}

TEST_CASE("log-log slope") {
    CHECK(loglog_slope({1.0, 2.0, 4.0}, {3.0, 12.0, 48.0}) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_THROWS_AS((void)loglog_slope({1.0}, {1.0}), Error);
    CHECK_THROWS_AS((void)loglog_slope({1.0, 2.0}, {1.0, -1.0}), Error);
}

TEST_CASE("energy report streams the chart series and exports CSV") {
    const auto& r = two_family_run();
    EnergyOptions opts;
    opts.max_order = 2;
    const auto rep = energy_report(r.traj, opts);
    REQUIRE(rep.times.size() == r.traj.size());
    CHECK(rep.E_k.size() == 3);
    const auto direct = weighted_energy(r.traj.states.back(), r.charts.back(), r.traj.config.weight);
    CHECK(rep.E_plus.back() == doctest::Approx(direct.plus).epsilon(1e-12));
    CHECK(rep.fitted_constants.at("energy_ratio") <= 4.0);
    CHECK(rep.fitted_constants.at("C0") > 0.0);
    for (const auto& [name, value] : rep.fitted_constants) {
        INFO(name);
        CHECK(std::isfinite(value));
        if (name != "linear_energy_slack_relative") CHECK(value >= 0.0);
    }
    const auto path = std::filesystem::temp_directory_path() / "alfven_energy_test.csv";
    write_energy_csv(path, rep);
    const auto table = read_csv(path);
    CHECK(table.header == std::vector<std::string>{"t", "E_plus", "E_minus", "E_0", "E_1", "E_2", "F_plus", "F_minus"});
    CHECK(table.cells.size() == rep.times.size());
    std::filesystem::remove(path);
    CHECK(fitted_constants_text(rep).find("C1 = ") != std::string::npos);
}
