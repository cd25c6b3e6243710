#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "alfven/characteristics.hpp"
#include "alfven/solver.hpp"

namespace alfven {

/// Highest derivative order of the weighted energies unless configured otherwise.
inline constexpr int kDefaultMaxOrder = 3;
/// Number of sampled level values used for the sup over u in the fluxes.
inline constexpr int kFluxLevels = 33;

struct FamilyPair {
    double plus = 0.0;
    double minus = 0.0;

    [[nodiscard]] double of(Family f) const { return f == Family::plus ? plus : minus; }
    [[nodiscard]] double total() const { return plus + minus; }
};

/// Sum over |alpha| == order of |d^alpha z|^2 at every grid point.
ScalarField derivative_density(const VectorField& z, int order);
/// Flux density of order k: |z|^2 for k = 0, sum over |alpha| == k - 1 of
/// |d^alpha curl z|^2 otherwise.
ScalarField flux_density(const VectorField& z, int order);

/// <u_g>^(2 omega) over the grid, from the chart's label field of family g.
ScalarField energy_weight(const LabelField& labels, const WeightParams& w);

/// E^k = sum_{|alpha| = k} int <u-+>^(2 omega) |d^alpha z+-|^2 (k = 0 is E+-).
/// Throws when order exceeds max_order or the chart time differs from the state's.
FamilyPair weighted_energy(const ElsasserState& s, const CharacteristicChart& chart, const WeightParams& w,
                           int order = 0, int max_order = kDefaultMaxOrder);

/// Surface element of the level sets of u_g in the (x_h, t) parameterization,
/// sqrt(1 + (d_t u)^2 + |grad_h u|^2) with d_t u = -Z_g . grad u.
ScalarField surface_measure(const ElsasserState& s, const LabelField& labels);

/// Integral over x_h of `density` restricted to the level set {u_g = value} on
/// one time slice, where u_g comes from `labels`. The crossing in each x3
/// column is located on the unwrapped u and the density interpolated there.
/// Throws Error("level set exits the trusted window") when the crossing is
/// missing or within two cells of the box edge.
double level_slice_integral(const ScalarField& density, const LabelField& labels, double value);

/// Per-snapshot slice integrals of <u-+>^(2 omega) |j^(k)|^2 dsigma over the
/// level sets of one family, for a set of level values.
struct FluxSlices {
    Family family = Family::plus;
    int order = 0;
    std::vector<double> levels;
    std::vector<double> times;
    /// values[s][i]: slice integral at snapshot s for levels[i].
    std::vector<std::vector<double>> values;

    /// Trapezoid in time of the slices up to snapshot `upto` (inclusive).
    [[nodiscard]] double flux(std::size_t level, std::size_t upto) const;
    /// max over levels of flux(level, upto).
    [[nodiscard]] double sup_flux(std::size_t upto) const;
};

/// Evenly spaced level values covering the window in which every level set
/// of u_g stays at least four cells inside the box for t in [t0, t1].
std::vector<double> flux_levels(const Grid3& grid, Family g, double t0, double t1, int count = kFluxLevels);

void append_flux_slice(FluxSlices& slices, const ElsasserState& s, const CharacteristicChart& chart,
                       const WeightParams& w);

/// F^k(value) through the level set of u_g up to the last chart's time.
double flux_surface_integral(const Trajectory& traj, const std::vector<CharacteristicChart>& charts, Family g,
                             double value, int order, const WeightParams& w);

/// int_0^T int <u-+>^(2 omega) <u+->^(-omega) |d^k z+-|^2 summed over families,
/// divided by epsilon^2.
double spacetime_flux_check(const Trajectory& traj, const std::vector<CharacteristicChart>& charts,
                            const WeightParams& w, double epsilon, int order = 0);

struct SeparationReport {
    std::vector<double> times;
    /// min over the support of <u+><u-> / (R + |t|), per snapshot.
    std::vector<double> weight_ratio;
    /// max over x of |d^a z+| |d^b z-| <u+>^omega <u->^omega / eps^2, |a|, |b| <= 1.
    std::vector<double> cross_ratio;
    /// max over x of |z+| |z-|, per snapshot.
    std::vector<double> cross_product;

    [[nodiscard]] double min_weight_ratio() const;
    [[nodiscard]] double max_cross_ratio() const;
};

/// Points where |z+|^2 + |z-|^2 exceeds this fraction (squared) of its maximum
/// count as the wave-packet support.
inline constexpr double kSupportThreshold = 1e-3;

void append_separation(SeparationReport& report, const ElsasserState& s, const CharacteristicChart& chart,
                       const WeightParams& w, double epsilon);
SeparationReport separation_report(const Trajectory& traj, const std::vector<CharacteristicChart>& charts,
                                   const WeightParams& w, double epsilon);

/// Tensor norm |grad^l f| = (sum over ordered index tuples of (d_i1..il f)^2)^(1/2), maximized over x.
double max_tensor_norm(const ScalarField& f, int order);

struct PressureDecayReport {
    std::vector<double> times;
    /// series[l - 1][s] = (R + |t_s|)^omega max_x |grad^l p| / eps^2.
    std::array<std::vector<double>, 3> series;

    [[nodiscard]] double supremum(int l) const;
    /// Value at the last snapshot over the value at the first.
    [[nodiscard]] double end_ratio(int l) const;
};

PressureDecayReport pressure_decay_report(const Trajectory& traj, const WeightParams& w, double epsilon);

/// Largest admissible max |grad lambda| / lambda for the div-curl weight.
inline constexpr double kMaxWeightLogGradient = 10.0;

/// ||sqrt(lambda) grad v||^2 / (||sqrt(lambda) div v||^2 + ||sqrt(lambda) curl v||^2 + ||sqrt(lambda) v||^2).
/// Throws Error("weight admissibility violated") unless lambda >= 1 and
/// |grad lambda| <= kMaxWeightLogGradient lambda (centered differences).
double divcurl_constant(const VectorField& v, const ScalarField& lambda);

struct DivCurlCorpus {
    std::vector<double> ratios;
    [[nodiscard]] double max_ratio() const;
};

/// Random band-limited vector fields (modes |m_i| <= band, seeded) against
/// lambda = <x3>^(2 omega). The same seed yields the same trigonometric
/// polynomials on every grid, so corpora on different grids are comparable.
DivCurlCorpus divcurl_corpus(const Grid3& grid, int count, std::uint64_t seed, const WeightParams& w, int band = 3);

struct LinearEnergyCheck {
    std::vector<double> times;
    /// RHS - sum of E+-(t).
    std::vector<double> slack_energy;
    /// RHS - sum of sup_u F+-(t).
    std::vector<double> slack_flux;
    double initial_energy = 0.0;

    /// Smallest slack over both forms and all times after the first.
    [[nodiscard]] double slack() const;
};

/// Both sides of the linear energy inequality with f = z, rho = -grad p and
/// lambda = <u-+>^(2 omega). Each left-hand term is compared with the
/// right-hand side separately.
LinearEnergyCheck linear_energy_identity_check(const Trajectory& traj, const std::vector<CharacteristicChart>& charts,
                                               const WeightParams& w);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct EnergyReport {
    std::vector<double> times;
    std::vector<double> E_plus;
    std::vector<double> E_minus;
    /// E_k[k][s]: both families summed, k = 0..max order.
    std::vector<std::vector<double>> E_k;
    std::vector<double> F_plus;
    std::vector<double> F_minus;
    std::map<std::string, double> fitted_constants;
    SeparationReport separation;
    PressureDecayReport pressure_decay;
    LinearEnergyCheck linear;
};

struct EnergyOptions {
    int max_order = kDefaultMaxOrder;
    int flux_order = 0;
    TraceOptions trace{};
};

/// Streams the chart series once and collects energies, fluxes, separation,
/// pressure decay, the space-time flux ratio and the linear energy slack.
/// An epsilon of 0 reports the normalized quantities unnormalized (all zero).
EnergyReport energy_report(const Trajectory& traj, const EnergyOptions& options = {});

/// One row per time: t, E_plus, E_minus, E_0..E_K, F_plus, F_minus.
void write_energy_csv(const std::filesystem::path& path, const EnergyReport& report);
/// t, weight_ratio, cross_ratio, cross_product.
void write_separation_csv(const std::filesystem::path& path, const SeparationReport& report);
/// t, l1, l2, l3.
void write_pressure_decay_csv(const std::filesystem::path& path, const PressureDecayReport& report);
/// t, slack_energy, slack_flux.
void write_linear_energy_csv(const std::filesystem::path& path, const LinearEnergyCheck& check);
/// "name = value" lines, sorted by name.
std::string fitted_constants_text(const EnergyReport& report);

}  // namespace alfven
