#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "alfven/characteristics.hpp"
#include "alfven/solver.hpp"

namespace alfven {

/// Truncated infinities. F is the future (+T), P the past (-T); the sign names
/// the fluctuation family whose limit lives there.
enum class Infinity { F_plus, F_minus, P_plus, P_minus };

Infinity infinity_of(Family carried, double direction);
Family carried_family(Infinity kind);
/// +1 for F, -1 for P.
double direction_of(Infinity kind);
std::string to_string(Infinity kind);

/// Label grid of one infinity: the simulation's initial grid read in the
/// coordinates (x1, x2, u) of the transporting family, with <u>.
struct InfinityManifold {
    Infinity kind = Infinity::F_plus;
    Grid3 grid;
    WeightParams weight;

    /// <u>^(2 omega) at every label, u the centered x3 label.
    [[nodiscard]] ScalarField weight_field() const;
};

struct ScatteringField {
    InfinityManifold manifold;
    /// z(0, label) - int_0^T grad p sqrt(1 + |Z|^2) along the line.
    VectorField values;
    /// z(0, label) - int_0^T grad p along the line (no line-measure factor).
    VectorField factor_free;
    double truncation_T = 0.0;
    double tail_bound = 0.0;
    /// max over labels and snapshots of |integrand| (R + |tau|)^omega.
    double envelope = 0.0;
};

/// Which horizon each family uses: a (+,+), b (-,+), c (-,-), d (+,-) for (z+, z-).
enum class ScatterCase { a, b, c, d };

ScatterCase scatter_case_from(const std::string& name);
std::string to_string(ScatterCase c);
/// Horizon direction (+1 or -1) of family f in case c.
double case_direction(ScatterCase c, Family f);

struct ScatterPair {
    ScatterCase scatter_case = ScatterCase::a;
    ScatteringField plus;
    ScatteringField minus;

    [[nodiscard]] const ScatteringField& of(Family f) const { return f == Family::plus ? plus : minus; }
};

/// Quadrature from the snapshots, tail bound from the fitted envelope.
/// Throws Error("horizon exceeds validity window") when |T| > L3/4 or the
/// trajectory does not start at 0.
ScatteringField scattering_field(const Trajectory& traj, Family carried, const TraceOptions& options = {});

/// envelope (R + |T|)^(1 - omega) / (omega - 1).
double tail_bound(double envelope, double T, const WeightParams& w);

struct TransportCheck {
    double max_discrepancy = 0.0;
    double max_field = 0.0;
};

/// Compares z(t, psi(t, y)) interpolated from the solver state with the
/// factor-free integral along the line, over every label y of the initial
/// grid. `t` must be a snapshot time.
TransportCheck transport_identity_check(const Trajectory& traj, Family carried, double t,
                                        const TraceOptions& options = {});

/// Every k-th snapshot (the last one is always kept).
Trajectory thinned(const Trajectory& traj, int k);

inline constexpr int kDefaultSobolevOrder = 2;
inline constexpr int kMaxSobolevOrder = 3;

/// sum_{|beta| <= N} int |d^beta f|^2 <u>^(2 omega) dmu with the flat label
/// measure: the squared norm.
double infinity_sobolev_norm(const ScatteringField& field, int order = kDefaultSobolevOrder,
                             int max_order = kMaxSobolevOrder);
double infinity_sobolev_norm(const VectorField& f, const InfinityManifold& manifold, int order,
                             int max_order = kMaxSobolevOrder);
/// Norm (not squared) of field - initial on the field's manifold.
double deviation_norm(const ScatteringField& field, const VectorField& initial, int order = kDefaultSobolevOrder);
/// Product norm of the pair minus the initial data, (|d+|^2 + |d-|^2)^(1/2).
double pair_deviation(const ScatterPair& pair, const ElsasserState& initial, int order = kDefaultSobolevOrder);

/// The four scattering fields of one initial state (one forward and one
/// backward run), from which every case is assembled.
struct ScatterSet {
    ScatteringField plus_future;
    ScatteringField minus_future;
    ScatteringField plus_past;
    ScatteringField minus_past;

    [[nodiscard]] ScatterPair pair(ScatterCase c) const;
};

/// config.T gives the horizon magnitude; its sign is ignored.
ScatterSet scatter_all(const ElsasserState& initial, const SimConfig& config, const TraceOptions& options = {});
/// Runs only the horizons the case needs.
ScatterPair forward_map(ScatterCase c, const ElsasserState& initial, const SimConfig& config,
                        const TraceOptions& options = {});

struct LinearizationResult {
    std::vector<double> eps;
    std::vector<double> deviation;
    /// deviation / |eps x|.
    std::vector<double> relative;
    /// relative / eps per amplitude.
    std::vector<double> c_fit;
    double slope = 0.0;
    /// Every deviation vanished: the operator is linear on this direction.
    bool exact_linear = false;
};

/// Deviation ||N(eps x) - eps x|| per amplitude and its log-log slope. The
/// direction must have unit weighted initial norm of config.norm_order.
/// Throws Error("unresolved regime: ...") when deviations do not grow with eps.
LinearizationResult linearization_slope(const ElsasserState& direction, ScatterCase c, const std::vector<double>& eps_list,
                                        const SimConfig& config, const TraceOptions& options = {});
/// Same regression from precomputed pairs; pairs[i] is the image of eps_list[i] * direction.
LinearizationResult linearization_from(const ElsasserState& direction, const std::vector<double>& eps_list,
                                       const std::vector<ScatterPair>& pairs, const WeightParams& w,
                                       int order = kDefaultSobolevOrder);

struct ReconstructionRow {
    int iteration = 0;
    double update_norm = 0.0;
    double residual_norm = 0.0;
};

struct ReconstructOptions {
    int max_iterations = 5;
    /// Stop when update norm <= tolerance * |x_k|.
    double tolerance = 1e-5;
    int order = kDefaultSobolevOrder;
    TraceOptions trace{};
    /// Called after each iteration with the new iterate.
    std::function<void(const ReconstructionRow&, const ElsasserState&)> observer;
};

struct Reconstruction {
    ElsasserState state;
    std::vector<ReconstructionRow> log;
    bool converged = false;
};

/// x_{k+1} = P(x_k - (N(x_k) - target)), x_0 = P(target), with P the Leray
/// projection. Throws Error("outside local-diffeomorphism basin") after the
/// update norm increased twice.
Reconstruction reconstruct(const ScatterPair& target, const SimConfig& config, const ReconstructOptions& options = {});

/// Product norm of a state read as label data: (|z+|^2 + |z-|^2)^(1/2) in the
/// infinity norm. This is also the norm of its linear image in every case.
double state_norm(const ElsasserState& s, const WeightParams& w, int order = kDefaultSobolevOrder);

void write_reconstruction_csv(const std::filesystem::path& path, const std::vector<ReconstructionRow>& log);
/// `extra` entries are added to the sidecar next to the scattering metadata.
void write_scattering_field(const std::filesystem::path& path, const ScatteringField& field,
                            const std::map<std::string, std::string>& extra = {});
/// Slice along u at the central (x1, x2) column: u, v1..v3, w1..w3 (w factor-free).
void write_scattering_slice_csv(const std::filesystem::path& path, const ScatteringField& field);

}  // namespace alfven
