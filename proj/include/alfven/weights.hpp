#pragma once

namespace alfven {

/// Space-time weight parameters: <u> = (R^2 + u^2)^(1/2), powers use omega = 1 + delta.
struct WeightParams {
    double R = 1.0;
    double delta = 0.1;

    [[nodiscard]] double omega() const { return 1.0 + delta; }
    /// Throws Error unless R > 0 and delta in (0, 2/3).
    void validate() const;
};

double weight_of(double u, const WeightParams& params);
/// d<u>/du = u / <u>; bounded by 1 in magnitude.
double weight_slope(double u, const WeightParams& params);

}  // namespace alfven
