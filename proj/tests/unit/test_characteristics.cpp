#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "alfven/characteristics.hpp"
#include "alfven/csv.hpp"
#include "alfven/interpolation.hpp"
#include "alfven/solver.hpp"
#include "helpers.hpp"

using namespace alfven;

namespace {

SimConfig small_config(int n, double T, double eps = 0.05) {
    SimConfig c;
    c.grid = Grid3(n, n, n, 20.0, 20.0, 20.0);
    c.T = T;
    c.epsilon = eps;
    c.dt = 0.05;
    c.output_stride = 2;
    return c;
}

const Trajectory& shared_run() {
    static const Trajectory traj = run(small_config(32, 2.0));
    return traj;
}

Trajectory zero_run(double T) {
    SimConfig c = small_config(16, T);
    c.recipe.kind = InitialRecipe::Kind::zero;
    return run(c);
}

}  // namespace

TEST_CASE("interpolation reproduces low-degree trigonometric data") {
    const Grid3 g = testing_support::cube(16);
    const auto f = testing_support::scalar(g, [](double x, double y, double z) { return std::sin(x) * std::cos(y) + std::sin(z); });
    for (int np : {4, 6}) {
        PeriodicInterpolator ip(g, np);
        double worst = 0.0;
        for (Vec3 x : {Vec3{0.3, 1.7, 2.9}, Vec3{-4.0, 9.1, 0.01}, Vec3{6.2, 6.2, -6.2}}) {
            const double exact = std::sin(x[0]) * std::cos(x[1]) + std::sin(x[2]);
            worst = std::max(worst, std::abs(ip.evaluate(f.data, x) - exact));
        }
        CHECK(worst < (np == 4 ? 2e-3 : 5e-5));
    }
    PeriodicInterpolator ip(g, 4);
    CHECK(ip.evaluate(f.data, g.centered_point(g.index(3, 5, 7))) == doctest::Approx(f[g.index(3, 5, 7)]).epsilon(1e-14));
    CHECK_THROWS_AS(PeriodicInterpolator(g, 5), Error);
}

TEST_CASE("zero fluctuation gives straight flows and labels") {
    const auto traj = zero_run(1.0);
    FlowMap m = identity_flow(traj.grid(), Family::plus);
    m = advance_flow(m, traj, 1.0);
    FlowMap mm = advance_flow(identity_flow(traj.grid(), Family::minus), traj, 1.0);
    for (std::size_t q = 0; q < m.positions.size(); q += 37) {
        const Vec3 y = traj.grid().centered_point(q);
        CHECK(m.positions[q][2] == doctest::Approx(y[2] + 1.0).epsilon(1e-14));
        CHECK(mm.positions[q][2] == doctest::Approx(y[2] - 1.0).epsilon(1e-14));
        CHECK(m.positions[q][0] == y[0]);
        CHECK(m.jacobian[q] == identity3());
    }
    const auto chart = label_chart(traj, 1.0);
    for (std::size_t q = 0; q < traj.grid().size(); q += 41) {
        const Vec3 x = traj.grid().centered_point(q);
        CHECK(chart.plus.u(q) == doctest::Approx(x[2] - 1.0).epsilon(1e-13));
        CHECK(chart.minus.u(q) == doctest::Approx(x[2] + 1.0).epsilon(1e-13));
    }
    const auto rep = jacobian_report(chart.plus);
    CHECK(rep.max_deviation < 1e-13);
    CHECK(rep.max_gradient < 1e-13);
    const auto frep = jacobian_report(m);
    CHECK(frep.max_deviation == 0.0);
    CHECK(frep.min_det == 1.0);
}

TEST_CASE("advance_flow rejects times outside the trajectory") {
    const auto traj = zero_run(0.5);
    CHECK_THROWS_WITH_AS((void)advance_flow(identity_flow(traj.grid(), Family::plus), traj, 1.0),
                         "time outside trajectory", Error);
}

TEST_CASE("labels at the initial time equal coordinates") {
    const auto& traj = shared_run();
    const auto chart = label_chart(traj, 0.0);
    CHECK(max_norm(chart.plus.disp) == 0.0);
    CHECK(max_norm(chart.minus.disp) == 0.0);
}

TEST_CASE("zero fluctuation line is straight with measure sqrt 2") {
    const auto traj = zero_run(1.0);
    const auto line = sample_line(traj, Family::plus, {0.5, -1.0, 2.0});
    REQUIRE(line.t.size() == traj.size());
    for (std::size_t i = 0; i < line.t.size(); ++i) {
        CHECK(line.x[i][2] == doctest::Approx(2.0 - line.t[i]).epsilon(1e-14));
        CHECK(line.measure[i] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    }
    CHECK_THROWS_AS((void)sample_line(traj, Family::plus, {0.0, 0.0, 50.0}), Error);
}

TEST_CASE("backtrace and forward trace are consistent") {
    const auto& traj = shared_run();
    const double t = traj.t_end();
    for (Family g : {Family::plus, Family::minus}) {
        const auto labels = backtrace_labels(traj, g, t);
        std::vector<Vec3> pts;
        for (std::size_t q = 0; q < traj.grid().size(); q += 97) pts.push_back(traj.grid().centered_point(q));
        const auto y = pts;
        trace_points(traj, g, 0.0, t, pts);
        PeriodicInterpolator ip(traj.grid(), 4);
        double worst = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double u = pts[i][2] - sign_of(g) * t + ip.evaluate(labels.disp.c[2], pts[i]);
            worst = std::max(worst, std::abs(u - y[i][2]));
        }
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("semi-Lagrangian chart series agrees with direct backtracing") {
    const auto& traj = shared_run();
    TraceOptions quintic;
    quintic.interp_points = 6;
    const auto series = chart_series(traj, quintic);
    REQUIRE(series.size() == traj.size());
    const auto direct = label_chart(traj, traj.t_end(), quintic);
    const auto diff = series.back().minus.disp - direct.minus.disp;
    /// Repeated re-interpolation of the displacement costs about 1% at this
    /// resolution; it shrinks with refinement.
    CHECK(max_norm(diff) < 2e-2 * max_norm(direct.minus.disp));
    CHECK(max_norm(direct.minus.disp) > 0.0);
}

TEST_CASE("flow Jacobian stays volume preserving and deviations scale with epsilon") {
    double dev[2];
    int i = 0;
    for (double eps : {0.02, 0.04}) {
        const auto traj = run(small_config(24, 1.0, eps));
        const auto m = advance_flow(identity_flow(traj.grid(), Family::plus), traj, 1.0);
        const auto rep = jacobian_report(m);
        CHECK(std::abs(rep.min_det - 1.0) < 1e-4);
        CHECK(std::abs(rep.max_det - 1.0) < 1e-4);
        dev[i++] = rep.max_deviation;
    }
    const double slope = std::log(dev[1] / dev[0]) / std::log(2.0);
    CHECK(slope == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("line CSV has the documented columns") {
    const auto traj = zero_run(0.5);
    const auto line = sample_line(traj, Family::minus, {0.0, 0.0, 0.0});
    const auto path = std::filesystem::temp_directory_path() / "alfven_line_test.csv";
    write_line_csv(path, line);
    const auto table = read_csv(path);
    CHECK(table.header.front() == "t");
    CHECK(table.header.back() == "measure");
    CHECK(table.values("x3").back() == doctest::Approx(0.5));
    std::filesystem::remove(path);
}
