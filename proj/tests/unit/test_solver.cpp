#include <doctest.h>

#include <cmath>

#include "alfven/initial_data.hpp"
#include "alfven/solver.hpp"
#include "alfven/spectral.hpp"
#include "helpers.hpp"

using namespace alfven;
using namespace testing_support;

namespace {

const auto zero_fn = [](double, double, double) { return 0.0; };

SimConfig desk(int n, double T, double dt) {
    SimConfig c;
    c.grid = Grid3(n, n, n, 20.0, 20.0, 20.0);
    c.T = T;
    c.dt = dt;
    c.epsilon = 0.05;
    c.norm_order = 2;
    return c;
}

}  // namespace

TEST_CASE("pressure of one-family data vanishes") {
    const auto g = cube(16);
    const auto zp = curl(random_vector(g, 1, 2));
    CHECK(alfven::max_abs(pressure_poisson(zp, VectorField(g))) == 0.0);
}

TEST_CASE("pressure of two crossed shear modes") {
    const auto g = cube(16);
    const auto zp = vector(g, [](double, double y, double) { return std::sin(y); }, zero_fn, zero_fn);
    const auto zm = vector(g, zero_fn, [](double x, double, double) { return std::sin(x); }, zero_fn);
    const auto expect = scalar(g, [](double x, double y, double) { return 0.5 * std::cos(x) * std::cos(y); });
    CHECK(max_diff(pressure_poisson(zp, zm), expect) <= 1e-13);
}

TEST_CASE("pressure is symmetric in its arguments") {
    const auto g = cube(16);
    const auto a = curl(random_vector(g, 2, 2));
    const auto b = curl(random_vector(g, 3, 2));
    const auto p1 = pressure_poisson(a, b);
    const auto p2 = pressure_poisson(b, a);
    CHECK(max_diff(p1, p2) <= 1e-12 * alfven::max_abs(p1));
}

TEST_CASE("pressure rejects compressible input") {
    const auto g = cube(16);
    const auto v = vector(g, [](double x, double, double) { return std::sin(x); }, zero_fn, zero_fn);
    CHECK_THROWS_AS(pressure_poisson(v, v), Error);
}

TEST_CASE("rhs of one-family data is pure transport") {
    const Grid3 g(16, 16, 16, 20.0, 20.0, 20.0);
    InitialRecipe r;
    r.kind = InitialRecipe::Kind::one_family;
    const auto s = make_initial_state(g, r, 0.05, WeightParams{}, 1);
    const auto t = elsasser_rhs(s);
    ScalarField comp(g);
    double m = 0.0;
    for (int a = 0; a < 3; ++a) {
        comp.data = s.z_plus.c[a];
        const auto d3 = derivative(comp, 2);
        for (std::size_t q = 0; q < g.size(); ++q) m = std::max(m, std::abs(t.dz_plus.c[a][q] - d3[q]));
    }
    CHECK(m <= 1e-15);
    CHECK(max_abs(t.dz_minus) == 0.0);
    CHECK(alfven::max_abs(t.p) == 0.0);

    const auto zt = elsasser_rhs(zero_state(g));
    CHECK(max_abs(zt.dz_plus) == 0.0);
    CHECK(max_abs(zt.dz_minus) == 0.0);
}

TEST_CASE("rhs tendencies are divergence-free") {
    const Grid3 g(16, 16, 16, 20.0, 20.0, 20.0);
    const auto s = make_initial_state(g, InitialRecipe{}, 0.2, WeightParams{}, 1);
    const auto t = elsasser_rhs(s);
    for (const auto* d : {&t.dz_plus, &t.dz_minus}) {
        double grad = 0.0;
        for (int a = 0; a < 3; ++a) {
            ScalarField comp(g);
            comp.data = d->c[a];
            grad = std::max(grad, max_norm(gradient(comp)));
        }
        CHECK(alfven::max_abs(divergence(*d)) <= 1e-9 * grad);
    }
}

TEST_CASE("amplitude bound is enforced") {
    const Grid3 g(16, 16, 16, 20.0, 20.0, 20.0);
    auto s = zero_state(g);
    s.z_minus.c[0][5] = 0.6;
    CHECK_THROWS_WITH_AS(elsasser_rhs(s), "bootstrap amplitude exceeded", Error);
}

TEST_CASE("rk4 step") {
    const Grid3 g(32, 32, 32, 20.0, 20.0, 20.0);
    const auto z = step_rk4(zero_state(g), 0.05);
    CHECK(max_abs(z.z_plus) == 0.0);
    CHECK(z.t == doctest::Approx(0.05));

    InitialRecipe r;
    r.kind = InitialRecipe::Kind::one_family;
    const auto s = make_initial_state(g, r, 0.05, WeightParams{}, 2);
    const auto s1 = step_rk4(s, 0.05);
    CHECK(max_diff(s1.z_plus, translate_x3(s.z_plus, 0.05)) <= 1e-8);

    CHECK_THROWS_AS(step_rk4(s, 0.5), Error);
}

TEST_CASE("rk4 is fourth order") {
    const Grid3 g(16, 16, 16, 20.0, 20.0, 20.0);
    const auto s = make_initial_state(g, InitialRecipe{}, 0.2, WeightParams{}, 0);
    auto advance = [&](double dt, int n) {
        auto x = s;
        for (int i = 0; i < n; ++i) x = step_rk4(x, dt);
        return x;
    };
    const double T = 0.8;
    const auto ref = advance(T / 64, 64);
    const auto e1 = max_diff(advance(T / 4, 4).z_plus, ref.z_plus);
    const auto e2 = max_diff(advance(T / 8, 8).z_plus, ref.z_plus);
    const double ratio = e1 / e2;
    CHECK(ratio > 12.0);
    CHECK(ratio < 20.0);
}

TEST_CASE("zero amplitude run is identically zero") {
    auto c = desk(16, 2.0, 0.1);
    c.epsilon = 0.0;
    const auto traj = run(c);
    CHECK(traj.size() == 21);
    for (const auto& st : traj.states) {
        CHECK(max_abs(st.z_plus) == 0.0);
        CHECK(max_abs(st.z_minus) == 0.0);
    }
    CHECK(traj.log.back().t == doctest::Approx(2.0));
}

TEST_CASE("config validation") {
    auto c = desk(16, 6.0, 0.1);
    CHECK_THROWS_AS(c.validate(), Error);
    c.T = -5.0;
    CHECK_NOTHROW(c.validate());
    CHECK(c.signed_dt() == doctest::Approx(-0.1));
    c.dt = 0.3;
    CHECK(c.step_count() == 17);
    CHECK(c.signed_dt() * c.step_count() == doctest::Approx(-5.0));
    c.output_stride = 0;
    CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("one-family run is an exact travelling wave") {
    auto c = desk(32, 5.0, 0.05);
    c.recipe.kind = InitialRecipe::Kind::one_family;
    c.output_stride = 20;
    const auto traj = run(c);
    const auto& first = traj.states.front();
    const auto& last = traj.states.back();
    CHECK(last.t == doctest::Approx(5.0));
    CHECK(max_diff(last.z_plus, translate_x3(first.z_plus, 5.0)) <= 1e-8);
    for (const auto& p : traj.pressures) CHECK(alfven::max_abs(p) == 0.0);
}

TEST_CASE("forward then backward returns to the initial state") {
    auto c = desk(32, 2.0, 0.05);
    c.output_stride = 100;
    const auto fwd = run(c);
    auto b = c;
    b.T = -2.0;
    auto start = fwd.states.back();
    start.t = 0.0;
    const auto bwd = run(b, start);
    const auto& x0 = fwd.states.front();
    const auto& x1 = bwd.states.back();
    const double err = l2_squared(x1.z_plus - x0.z_plus) + l2_squared(x1.z_minus - x0.z_minus);
    const double ref = l2_squared(x0.z_plus) + l2_squared(x0.z_minus);
    CHECK(std::sqrt(err / ref) <= 1e-6);
}

TEST_CASE("two-family run conserves each family's energy") {
    auto c = desk(32, 2.0, 0.05);
    const auto traj = run(c);
    const auto& log = traj.log;
    for (const auto& row : log) {
        CHECK(std::abs(row.l2_zplus - log.front().l2_zplus) <= 1e-6 * log.front().l2_zplus);
        CHECK(std::abs(row.l2_zminus - log.front().l2_zminus) <= 1e-6 * log.front().l2_zminus);
        CHECK(row.cfl <= kMaxCfl);
    }
    CHECK(log.front().max_gradp > 0.0);
}

TEST_CASE("vorticity residual") {
    auto c = desk(16, 1.0, 0.1);
    c.epsilon = 0.0;
    const auto z = vorticity_residual(run(c));
    for (double r : z.plus) CHECK(r == 0.0);

    auto one = desk(32, 2.0, 0.05);
    one.recipe.kind = InitialRecipe::Kind::one_family;
    one.output_stride = 4;
    const auto coarse = vorticity_residual(run(one));
    one.output_stride = 2;
    const auto fine = vorticity_residual(run(one));
    // Compare at the shared time t = 1.
    const auto at = [](const VorticityResidual& r, double t) {
        for (std::size_t i = 0; i < r.times.size(); ++i)
            if (std::abs(r.times[i] - t) < 1e-9) return r.plus[i];
        return -1.0;
    };
    const double ratio = at(coarse, 1.0) / at(fine, 1.0);
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
    for (double r : fine.minus) CHECK(r == 0.0);

    CHECK_THROWS_AS(vorticity_residual(Trajectory{}), Error);
}

TEST_CASE("trajectory bracket") {
    auto c = desk(16, -1.0, 0.25);
    c.epsilon = 0.0;
    const auto traj = run(c);
    CHECK(traj.bracket(0.0) == 0);
    CHECK(traj.bracket(-0.3) == 1);
    CHECK(traj.bracket(-1.0) == 3);
    CHECK_THROWS_AS((void)traj.bracket(0.5), Error);
}
