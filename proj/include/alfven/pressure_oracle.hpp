#pragma once

#include <vector>

#include "alfven/grid.hpp"

namespace alfven {

/// Admissible cutoff theta(r): 1 for r <= 1, 0 for r >= 2, monotone in between.
enum class Bridge {
    /// C-infinity bridge built from exp(-1/t).
    smooth,
    /// Quintic smoothstep (C^2), used to test cutoff independence.
    polynomial,
};

struct BridgeValue {
    double theta = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

BridgeValue bridge(Bridge kind, double r);
/// int_0^2 theta(r) r dr.
double bridge_moment(Bridge kind);

/// l-th derivative tensors of p at sample points, split into the near-field
/// part A_l and the far-field part B_l. Components are flattened with the
/// first derivative index slowest: (k), (k, a), (k, a, b).
struct PressureDerivatives {
    int order = 1;
    std::vector<Vec3> points;
    std::vector<std::vector<double>> A;
    std::vector<std::vector<double>> B;

    [[nodiscard]] std::vector<double> total(std::size_t i) const;
};

/// Largest grid accepted by the direct-summation oracle.
inline constexpr int kOracleMaxPoints = 32;

/// Throws Error("free-space assumption violated") unless |v| on the box faces
/// (the planes x_a = -L_a/2) is <= tol * max|v|.
void require_localized(const VectorField& v, double tol = 1e-6);

/// Direct quadrature of the Newtonian kernel split. Points are in the
/// centered coordinates of the grid; sources are spectrally refined by
/// `refine` before summation and the box is treated as free space.
PressureDerivatives pressure_newtonian_oracle(const VectorField& z_plus, const VectorField& z_minus,
                                              int l, const std::vector<Vec3>& points,
                                              Bridge kind = Bridge::smooth, int refine = 4);

/// Reference: -Lap p = s solved spectrally on the zero-padded doubled box,
/// from the same refined sources, then d^l p evaluated at the points.
std::vector<std::vector<double>> padded_pressure_derivatives(const VectorField& z_plus,
                                                             const VectorField& z_minus, int l,
                                                             const std::vector<Vec3>& points,
                                                             int refine = 4);

}  // namespace alfven
