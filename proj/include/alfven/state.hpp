#pragma once

#include "alfven/grid.hpp"

namespace alfven {

enum class Family { plus, minus };

inline Family opposite(Family f) { return f == Family::plus ? Family::minus : Family::plus; }
/// +1 for the plus family, -1 for the minus family.
inline double sign_of(Family f) { return f == Family::plus ? 1.0 : -1.0; }
inline const char* name_of(Family f) { return f == Family::plus ? "plus" : "minus"; }

/// Fluctuation pair (z+, z-) at time t. Z+ = z+ + B0 and Z- = z- - B0.
struct ElsasserState {
    double t = 0.0;
    VectorField z_plus;
    VectorField z_minus;
    Vec3 background{0.0, 0.0, 1.0};

    [[nodiscard]] const Grid3& grid() const { return z_plus.grid; }
    [[nodiscard]] const VectorField& field(Family f) const {
        return f == Family::plus ? z_plus : z_minus;
    }
    VectorField& field(Family f) { return f == Family::plus ? z_plus : z_minus; }
};

ElsasserState zero_state(const Grid3& grid, double t = 0.0);

/// Amplitude bound of the bootstrap ansatz: sup |z+-| < 1/2.
inline constexpr double kAmplitudeBound = 0.5;

/// Throws Error("bootstrap amplitude exceeded") or Error("invalid field").
void require_amplitude(const ElsasserState& s);
/// max|div z|/max|grad z| over both families (0 for a zero state).
double relative_divergence(const ElsasserState& s);

}  // namespace alfven
