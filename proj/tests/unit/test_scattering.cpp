#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "alfven/csv.hpp"
#include "alfven/initial_data.hpp"
#include "alfven/scattering.hpp"
#include "alfven/snapshot_io.hpp"
#include "helpers.hpp"

using namespace alfven;

namespace {

SimConfig desk(int n, double T, double eps = 0.05, InitialRecipe::Kind kind = InitialRecipe::Kind::two_family) {
    SimConfig c;
    c.grid = Grid3(n, n, n, 20.0, 20.0, 20.0);
    c.T = T;
    c.epsilon = eps;
    c.recipe.kind = kind;
    c.output_stride = 2;
    return c;
}

ElsasserState initial_of(const SimConfig& c) {
    return make_initial_state(c.grid, c.recipe, c.epsilon, c.weight, c.norm_order);
}

const Trajectory& fine_run() {
    static const Trajectory traj = [] {
        SimConfig c = desk(32, 2.0);
        c.output_stride = 1;
        return run(c);
    }();
    return traj;
}

double max_diff(const VectorField& a, const VectorField& b) { return max_norm(a - b); }

}  // namespace

TEST_CASE("case table and infinity names") {
    CHECK(case_direction(ScatterCase::a, Family::plus) == 1.0);
    CHECK(case_direction(ScatterCase::a, Family::minus) == 1.0);
    CHECK(case_direction(ScatterCase::b, Family::plus) == -1.0);
    CHECK(case_direction(ScatterCase::b, Family::minus) == 1.0);
    CHECK(case_direction(ScatterCase::c, Family::plus) == -1.0);
    CHECK(case_direction(ScatterCase::c, Family::minus) == -1.0);
    CHECK(case_direction(ScatterCase::d, Family::plus) == 1.0);
    CHECK(case_direction(ScatterCase::d, Family::minus) == -1.0);
    CHECK(scatter_case_from("c") == ScatterCase::c);
    CHECK_THROWS_AS((void)scatter_case_from("e"), Error);
    CHECK(infinity_of(Family::plus, -1.0) == Infinity::P_plus);
    CHECK(to_string(Infinity::F_minus) == "F_minus");
    CHECK(carried_family(Infinity::P_minus) == Family::minus);
    CHECK(direction_of(Infinity::P_minus) == -1.0);
}

TEST_CASE("tail bound closed form") {
    WeightParams w;
    w.R = 1.0;
    w.delta = 0.1;
    CHECK(tail_bound(2.0, 4.0, w) == doctest::Approx(2.0 * std::pow(5.0, -0.1) / 0.1).epsilon(1e-14));
    CHECK(tail_bound(2.0, -4.0, w) == tail_bound(2.0, 4.0, w));
    CHECK(tail_bound(1.0, 8.0, w) / tail_bound(1.0, 3.0, w) == doctest::Approx(std::pow(9.0 / 4.0, -0.1)));
    CHECK(tail_bound(0.0, 4.0, w) == 0.0);
}

TEST_CASE("zero data scatter to zero") {
    const SimConfig c = desk(16, 1.0, 0.05, InitialRecipe::Kind::zero);
    const auto set = scatter_all(initial_of(c), c);
    for (const auto* f : {&set.plus_future, &set.minus_future, &set.plus_past, &set.minus_past}) {
        CHECK(max_norm(f->values) == 0.0);
        CHECK(f->tail_bound == 0.0);
        CHECK(infinity_sobolev_norm(*f) == 0.0);
    }
    CHECK(set.plus_past.truncation_T == doctest::Approx(-1.0));
    CHECK(set.plus_past.manifold.kind == Infinity::P_plus);
}

TEST_CASE("one-family data are fixed points of every case") {
    const SimConfig c = desk(24, 1.0, 0.05, InitialRecipe::Kind::one_family);
    const auto x = initial_of(c);
    const auto set = scatter_all(x, c);
    const double scale = max_norm(x.z_plus);
    for (ScatterCase k : {ScatterCase::a, ScatterCase::b, ScatterCase::c, ScatterCase::d}) {
        const auto p = set.pair(k);
        CHECK(max_diff(p.plus.values, x.z_plus) <= 1e-14 * scale);
        CHECK(max_norm(p.minus.values) == 0.0);
        CHECK(pair_deviation(p, x) <= 1e-14 * state_norm(x, c.weight));
    }
    CHECK(set.plus_future.tail_bound == 0.0);

    const auto rec = reconstruct(forward_map(ScatterCase::b, x, c), c);
    CHECK(rec.converged);
    CHECK(rec.log.size() == 1);
    CHECK(max_diff(rec.state.z_plus, leray_project(x.z_plus)) < 1e-15);
}

TEST_CASE("one-family direction is reported as exactly linear") {
    SimConfig c = desk(16, 0.5, 1.0, InitialRecipe::Kind::one_family);
    const auto unit = initial_of(c);
    const auto lin = linearization_slope(unit, ScatterCase::d, {0.01, 0.02, 0.04}, c);
    CHECK(lin.exact_linear);
    CHECK(std::isinf(lin.slope));
    for (std::size_t i = 0; i < lin.eps.size(); ++i)
        CHECK(lin.deviation[i] <= 1e-14 * lin.eps[i] * state_norm(unit, c.weight));
}

TEST_CASE("linearization regression from synthetic pairs") {
    const SimConfig c = desk(16, 0.5, 1.0);
    const auto unit = initial_of(c);
    const std::vector<double> eps{0.02, 0.04, 0.08};
    std::vector<ScatterPair> pairs;
    const VectorField bump = localized_blob(c.grid, 5, 1.5, 1.0);
    for (double e : eps) {
        ScatterPair p;
        p.plus.manifold.grid = p.minus.manifold.grid = c.grid;
        p.plus.values = e * unit.z_plus + (3.0 * e * e) * bump;
        p.minus.values = e * unit.z_minus;
        pairs.push_back(p);
    }
    const auto lin = linearization_from(unit, eps, pairs, c.weight);
    CHECK(lin.slope == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(lin.c_fit[0] == doctest::Approx(lin.c_fit[2]).epsilon(1e-9));
    std::swap(pairs[0], pairs[2]);
    CHECK_THROWS_WITH_AS((void)linearization_from(unit, eps, pairs, c.weight),
                         doctest::Contains("unresolved regime"), Error);
    CHECK_THROWS_AS((void)linearization_from(unit, {0.02, 0.03, 0.04}, pairs, c.weight), Error);
    ElsasserState half = unit;
    half.z_plus = 0.5 * half.z_plus;
    half.z_minus = 0.5 * half.z_minus;
    CHECK_THROWS_AS((void)linearization_slope(half, ScatterCase::a, {0.02, 0.04, 0.08}, c), Error);
}

TEST_CASE("Sobolev norm on the infinity: homogeneity and order limit") {
    const Grid3 g(16, 16, 16, 20.0, 20.0, 20.0);
    ScatteringField f;
    f.manifold.grid = g;
    f.values = localized_blob(g, 2, 1.5, 1.0);
    const double n1 = infinity_sobolev_norm(f, 2);
    f.values = 3.0 * f.values;
    CHECK(infinity_sobolev_norm(f, 2) == doctest::Approx(9.0 * n1).epsilon(1e-12));
    CHECK(infinity_sobolev_norm(f, 0) < infinity_sobolev_norm(f, 1));
    CHECK_THROWS_AS((void)infinity_sobolev_norm(f, 4), Error);
    CHECK(deviation_norm(f, f.values) == 0.0);
    CHECK_THROWS_AS((void)deviation_norm(f, VectorField(Grid3(8, 8, 8, 20.0, 20.0, 20.0))), Error);
}

TEST_CASE("horizon beyond the validity window is rejected") {
    const Grid3 g(16, 16, 16, 20.0, 20.0, 20.0);
    Trajectory traj;
    traj.states = {zero_state(g, 0.0), zero_state(g, 6.0)};
    traj.pressures = {ScalarField(g), ScalarField(g)};
    CHECK_THROWS_WITH_AS((void)scattering_field(traj, Family::plus), "horizon exceeds validity window", Error);
}

TEST_CASE("transport identity holds along the opposite family's lines") {
    const auto& traj = fine_run();
    const double eps = traj.config.epsilon;
    for (Family f : {Family::plus, Family::minus}) {
        const auto chk = transport_identity_check(traj, f, traj.t_end());
        CHECK(chk.max_discrepancy <= 1e-4 * eps);
        CHECK(chk.max_field > 0.0);
    }
    CHECK_THROWS_AS((void)transport_identity_check(traj, Family::plus, 0.01), Error);
}

TEST_CASE("scattering integral converges at second order in the snapshot spacing") {
    const auto& traj = fine_run();
    const auto f1 = scattering_field(traj, Family::plus);
    const auto f2 = scattering_field(thinned(traj, 2), Family::plus);
    const auto f4 = scattering_field(thinned(traj, 4), Family::plus);
    const double d42 = max_diff(f4.values, f2.values);
    const double d21 = max_diff(f2.values, f1.values);
    CHECK(d42 / d21 == doctest::Approx(4.0).epsilon(0.25));
    CHECK(max_diff(f1.values, f1.factor_free) > 0.0);
    CHECK(f1.tail_bound > 0.0);
}

TEST_CASE("thinning keeps the endpoints") {
    const auto& traj = fine_run();
    const auto t3 = thinned(traj, 3);
    CHECK(t3.t_begin() == traj.t_begin());
    CHECK(t3.t_end() == traj.t_end());
    CHECK(t3.states.size() == t3.pressures.size());
}

TEST_CASE("time reflection maps future scattering to past scattering") {
    const SimConfig c = desk(24, 1.5);
    const auto x = initial_of(c);
    const auto a = forward_map(ScatterCase::a, x, c);
    const auto cc = forward_map(ScatterCase::c, time_reflected(x), c);
    const double scale = max_norm(a.plus.values);
    CHECK(max_diff(cc.plus.values, time_reflected(a.plus.values)) < 1e-6 * scale);
    CHECK(max_diff(cc.minus.values, time_reflected(a.minus.values)) < 1e-6 * scale);
}

TEST_CASE("lattice shifts of the data shift the scattering fields") {
    const SimConfig c = desk(24, 1.0);
    const auto x = initial_of(c);
    const auto p = forward_map(ScatterCase::d, x, c);
    const auto q = forward_map(ScatterCase::d, shifted(x, 4, -7), c);
    const double scale = max_norm(p.plus.values);
    CHECK(max_diff(q.plus.values, shifted(p.plus.values, 4, -7)) < 1e-10 * scale);
    CHECK(max_diff(q.minus.values, shifted(p.minus.values, 4, -7)) < 1e-10 * scale);
}

TEST_CASE("scattering outputs: container and CSV slices") {
    const SimConfig c = desk(16, 0.5);
    const auto p = forward_map(ScatterCase::a, initial_of(c), c);
    const auto dir = std::filesystem::temp_directory_path() / "alfven_scatter_test";
    std::filesystem::create_directories(dir);
    write_scattering_field(dir / "plus.alfv", p.plus);
    const auto back = read_container(dir / "plus.alfv");
    CHECK(max_diff(vector_from(back, "values"), p.plus.values) == 0.0);
    CHECK(back.meta.extra.at("infinity") == "F_plus");
    write_scattering_slice_csv(dir / "plus.csv", p.plus);
    const auto table = read_csv(dir / "plus.csv");
    CHECK(table.cells.size() == 16);
    CHECK(table.values("u").front() == doctest::Approx(-10.0));
    write_reconstruction_csv(dir / "rec.csv", {{1, 0.5, 0.25}, {2, 0.01, 0.005}});
    CHECK(read_csv(dir / "rec.csv").header == std::vector<std::string>{"iteration", "update_norm", "residual_norm"});
    std::filesystem::remove_all(dir);
}

TEST_CASE("doubling the horizon moves the field by less than the tail bound") {
    SimConfig c = desk(24, 5.0);
    const auto full = run(c);
    Trajectory half = full;
    const std::size_t mid = (full.size() - 1) / 2;
    half.states.resize(mid + 1);
    half.pressures.resize(mid + 1);
    REQUIRE(half.t_end() == doctest::Approx(2.5));
    const auto f_half = scattering_field(half, Family::plus);
    const auto f_full = scattering_field(full, Family::plus);
    const double moved = max_diff(f_full.values, f_half.values);
    CHECK(moved > 0.0);
    CHECK(moved <= f_half.tail_bound);
    CHECK(f_full.tail_bound < f_half.tail_bound);
}
