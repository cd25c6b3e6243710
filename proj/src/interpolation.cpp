#include "alfven/interpolation.hpp"

#include <cmath>

namespace alfven {

PeriodicInterpolator::PeriodicInterpolator(const Grid3& grid, int points) : grid_(grid), np_(points) {
    if (points != 4 && points != 6) throw Error("interpolation: stencil must have 4 or 6 points");
}

namespace {

/// Base index and Lagrange weights for nodes base .. base + np - 1.
void axis_weights(double x, double h, int n, int np, int* idx, double* w) {
    const double s = x / h;
    const double fl = std::floor(s);
    const double f = s - fl;
    const int half = np / 2;
    const long base = static_cast<long>(fl) - (half - 1);
    for (int j = 0; j < np; ++j) {
        // node offset relative to floor: j - (half - 1)
        const double xj = j - (half - 1);
        double num = 1.0, den = 1.0;
        for (int m = 0; m < np; ++m) {
            if (m == j) continue;
            const double xm = m - (half - 1);
            num *= f - xm;
            den *= xj - xm;
        }
        w[j] = num / den;
        long i = (base + j) % n;
        if (i < 0) i += n;
        idx[j] = static_cast<int>(i);
    }
}

}  // namespace

void PeriodicInterpolator::evaluate(std::span<const double* const> fields, const Vec3& x,
                                    double* out) const {
    int i1[6], i2[6], i3[6];
    double w1[6], w2[6], w3[6];
    axis_weights(x[0], grid_.spacing(0), grid_.n[0], np_, i1, w1);
    axis_weights(x[1], grid_.spacing(1), grid_.n[1], np_, i2, w2);
    axis_weights(x[2], grid_.spacing(2), grid_.n[2], np_, i3, w3);
    const std::size_t nf = fields.size();
    for (std::size_t c = 0; c < nf; ++c) out[c] = 0.0;
    for (int a = 0; a < np_; ++a)
        for (int b = 0; b < np_; ++b) {
            const double wab = w1[a] * w2[b];
            const std::size_t row = (static_cast<std::size_t>(i1[a]) * grid_.n[1] + i2[b]) * grid_.n[2];
            for (int c = 0; c < np_; ++c) {
                const double w = wab * w3[c];
                const std::size_t q = row + i3[c];
                for (std::size_t f = 0; f < nf; ++f) out[f] += w * fields[f][q];
            }
        }
}

double PeriodicInterpolator::evaluate(const std::vector<double>& field, const Vec3& x) const {
    const double* p = field.data();
    double out = 0.0;
    evaluate(std::span<const double* const>(&p, 1), x, &out);
    return out;
}

}  // namespace alfven
