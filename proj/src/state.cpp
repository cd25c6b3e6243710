#include "alfven/state.hpp"

#include <algorithm>
#include <cmath>

#include "alfven/spectral.hpp"

namespace alfven {

ElsasserState zero_state(const Grid3& grid, double t) {
    ElsasserState s;
    s.t = t;
    s.z_plus = VectorField(grid);
    s.z_minus = VectorField(grid);
    return s;
}

void require_amplitude(const ElsasserState& s) {
    require_finite(s.z_plus);
    require_finite(s.z_minus);
    if (max_norm(s.z_plus) >= kAmplitudeBound || max_norm(s.z_minus) >= kAmplitudeBound) {
        throw Error("bootstrap amplitude exceeded");
    }
}

double relative_divergence(const ElsasserState& s) {
    double div = 0.0;
    double grad = 0.0;
    for (Family f : {Family::plus, Family::minus}) {
        const auto& z = s.field(f);
        div = std::max(div, max_abs(divergence(z)));
        for (int a = 0; a < 3; ++a) {
            ScalarField comp(z.grid);
            comp.data = z.c[a];
            grad = std::max(grad, max_norm(gradient(comp)));
        }
    }
    return grad == 0.0 ? 0.0 : div / grad;
}

}  // namespace alfven
