#pragma once

#include <functional>
#include <vector>

#include "alfven/initial_data.hpp"
#include "alfven/state.hpp"
#include "alfven/weights.hpp"

namespace alfven {

/// Largest admissible Courant number |dt| (1 + max|Z+-|) / min spacing.
inline constexpr double kMaxCfl = 0.5;

struct SimConfig {
    Grid3 grid{64, 64, 64, 20.0, 20.0, 20.0};
    /// Step size magnitude; the sign follows T.
    double dt = 0.05;
    /// Truncation horizon; negative values integrate backward in time.
    double T = 5.0;
    double epsilon = 0.05;
    WeightParams weight{};
    InitialRecipe recipe{};
    /// Derivative order of the weighted norm the initial data are scaled by.
    int norm_order = 3;
    bool dealias = true;
    /// Steps between stored snapshots.
    int output_stride = 1;

    /// Throws Error naming the offending field.
    void validate() const;
    /// Number of steps and the signed step actually taken to land on T.
    [[nodiscard]] int step_count() const;
    [[nodiscard]] double signed_dt() const;
};

/// One row of the per-step scalar log.
struct StepRow {
    double t = 0.0;
    double l2_zplus = 0.0;
    double l2_zminus = 0.0;
    double max_gradp = 0.0;
    double cfl = 0.0;
};

struct Trajectory {
    SimConfig config;
    std::vector<ElsasserState> states;
    std::vector<ScalarField> pressures;
    std::vector<StepRow> log;

    [[nodiscard]] const Grid3& grid() const { return states.front().grid(); }
    [[nodiscard]] std::size_t size() const { return states.size(); }
    [[nodiscard]] double t_begin() const { return states.front().t; }
    [[nodiscard]] double t_end() const { return states.back().t; }
    /// Index s with time in [t_s, t_{s+1}] (either orientation); throws when t
    /// lies outside the stored span.
    [[nodiscard]] std::size_t bracket(double t) const;
};

/// Solves -Lap p = d_i z-^j d_j z+^i with zero mean. The product is formed in
/// conservative form d_i d_j (z-^j z+^i) and dealiased when requested.
ScalarField pressure_poisson(const VectorField& z_plus, const VectorField& z_minus,
                             bool dealias = true);

struct Tendency {
    VectorField dz_plus;
    VectorField dz_minus;
    ScalarField p;
};

/// (-Z-.grad z+ - grad p, -Z+.grad z- - grad p, p).
Tendency elsasser_rhs(const ElsasserState& s, bool dealias = true);

/// Classical RK4 step followed by a Leray projection. Throws on CFL violation.
ElsasserState step_rk4(const ElsasserState& s, double dt, bool dealias = true);

/// Courant number of a step of size dt from s.
double cfl_number(const ElsasserState& s, double dt);

using StepObserver = std::function<void(const StepRow&)>;

Trajectory run(const SimConfig& config);
Trajectory run(const SimConfig& config, const ElsasserState& initial,
               const StepObserver& observer = {});

/// Exact solution for one-family data: z+(t, x) = z+(0, x + t e3),
/// z-(t, x) = z-(0, x - t e3), applied as a spectral shift.
VectorField translate_x3(const VectorField& v, double shift);

struct VorticityResidual {
    std::vector<double> times;
    std::vector<double> plus;
    std::vector<double> minus;
};

/// L2 norms of dj/dt + Z-+ . grad j + grad z-+ ^ grad z+- at interior snapshots,
/// with a centered difference in time. The residual is filtered to the
/// dealiased band, where the discrete system is consistent.
VorticityResidual vorticity_residual(const Trajectory& traj);

}  // namespace alfven
