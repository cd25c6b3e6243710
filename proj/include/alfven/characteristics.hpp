#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include "alfven/solver.hpp"
#include "alfven/state.hpp"
#include "alfven/weights.hpp"

namespace alfven {

using Mat3 = std::array<std::array<double, 3>, 3>;

inline Mat3 identity3() { return {{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}}; }
double det3(const Mat3& m);

struct TraceOptions {
    /// Lagrange stencil per axis (4 = tricubic, 6 = quintic).
    int interp_points = 4;
    /// RK4 substeps per snapshot interval.
    int substeps = 1;
};

/// Called with a snapshot index whenever the march sits exactly on that
/// snapshot's time (including the start when it is one).
using SnapshotVisitor = std::function<void(std::size_t snapshot)>;

/// Moves points along dpsi/dt = Z_g(t, psi) from t_from to t_to with RK4,
/// Z_g = z_g + sign(g) e3 interpolated periodically in space and linearly in
/// time between snapshots. Positions stay on the universal cover. With
/// `jacobians` set, d(dpsi/dy)/dt = grad Z_g(psi) dpsi/dy is integrated too.
void trace_points(const Trajectory& traj, Family g, double t_from, double t_to, std::vector<Vec3>& points,
                  std::vector<Mat3>* jacobians = nullptr, const TraceOptions& options = {},
                  const SnapshotVisitor& visit = {});

/// psi_g(t, y) over the label grid y (centered coordinates of the initial grid).
struct FlowMap {
    double t = 0.0;
    Family family = Family::plus;
    Grid3 grid;
    std::vector<Vec3> positions;
    std::vector<Mat3> jacobian;

    [[nodiscard]] Vec3 label(std::size_t q) const { return grid.centered_point(q); }
};

FlowMap identity_flow(const Grid3& grid, Family g, double t = 0.0);
FlowMap advance_flow(const FlowMap& map, const Trajectory& traj, double dt, const TraceOptions& options = {});

/// Label functions of one family at time t, stored as the periodic displacement
/// disp = (x1^g, x2^g, u_g) - (x1, x2, x3 - sign(g) t) on the Eulerian grid
/// (centered coordinates), so that u_g is unwrapped.
struct LabelField {
    Family family = Family::plus;
    double t = 0.0;
    VectorField disp;

    [[nodiscard]] Vec3 label(std::size_t q) const;
    [[nodiscard]] double u(std::size_t q) const;
    /// Unwrapped label components as fields.
    [[nodiscard]] VectorField labels() const;
    /// <u_g> over the grid.
    [[nodiscard]] ScalarField weight(const WeightParams& w) const;
};

struct CharacteristicChart {
    double t = 0.0;
    LabelField plus;
    LabelField minus;

    [[nodiscard]] const LabelField& of(Family g) const { return g == Family::plus ? plus : minus; }
};

LabelField straight_labels(const Grid3& grid, Family g, double t);

/// Backtraces every grid point from t to 0 along Z_g. Throws
/// Error("insufficient snapshot density") when the estimated time-interpolation
/// error of the velocity exceeds 1% of a grid cell.
LabelField backtrace_labels(const Trajectory& traj, Family g, double t, const TraceOptions& options = {});
CharacteristicChart label_chart(const Trajectory& traj, double t, const TraceOptions& options = {});

/// Position error bound of linear-in-time velocity interpolation over the run.
double snapshot_density_error(const Trajectory& traj);

/// Labels at every snapshot by a semi-Lagrangian march: each step backtraces
/// the grid over one snapshot interval and interpolates the previous
/// displacement at the feet.
void chart_series(const Trajectory& traj, const std::function<void(std::size_t, const CharacteristicChart&)>& visit,
                  const TraceOptions& options = {});
std::vector<CharacteristicChart> chart_series(const Trajectory& traj, const TraceOptions& options = {});

struct JacobianReport {
    double max_deviation = 0.0;
    double max_gradient = 0.0;
    double min_det = 1.0;
    double max_det = 1.0;
};

JacobianReport jacobian_report(const FlowMap& map);
/// Deviation of dx^g/dx from I, from spectral derivatives of the displacement.
JacobianReport jacobian_report(const LabelField& labels);

struct LineSample {
    Family carried = Family::plus;
    Vec3 label{};
    std::vector<double> t;
    std::vector<Vec3> x;
    std::vector<Vec3> z_plus;
    std::vector<Vec3> z_minus;
    std::vector<Vec3> grad_p;
    /// |L_g| = sqrt(1 + |Z_g|^2) for the transporting family g.
    std::vector<double> measure;
};

/// The characteristic line of psi_g, g = opposite(carried), through `label`,
/// sampled at every snapshot.
LineSample sample_line(const Trajectory& traj, Family carried, const Vec3& label, const TraceOptions& options = {});

/// CSV with columns t,x1,x2,x3,zp1,zp2,zp3,zm1,zm2,zm3,gp1,gp2,gp3,measure.
void write_line_csv(const std::filesystem::path& path, const LineSample& line);
/// Container arrays disp_plus_*, disp_minus_* plus the chart time.
void write_chart(const std::filesystem::path& path, const CharacteristicChart& chart, const WeightParams& w);

/// Pressure gradient at every snapshot.
VectorField pressure_gradient(const Trajectory& traj, std::size_t snapshot);

}  // namespace alfven
