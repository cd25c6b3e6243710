#include "alfven/weights.hpp"

#include <cmath>

#include "alfven/grid.hpp"

namespace alfven {

void WeightParams::validate() const {
    if (!(R > 0.0) || !std::isfinite(R)) throw Error("weight: R must be positive");
    if (!(delta > 0.0 && delta < 2.0 / 3.0)) throw Error("weight: delta must lie in (0, 2/3)");
}

double weight_of(double u, const WeightParams& params) { return std::hypot(params.R, u); }

double weight_slope(double u, const WeightParams& params) { return u / weight_of(u, params); }

}  // namespace alfven
