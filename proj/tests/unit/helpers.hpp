#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "alfven/grid.hpp"
#include "alfven/spectral.hpp"

namespace testing_support {

using alfven::Grid3;
using alfven::ScalarField;
using alfven::VectorField;

inline Grid3 cube(int n, double L = 2.0 * std::numbers::pi) { return Grid3(n, n, n, L, L, L); }

inline ScalarField scalar(const Grid3& g, const std::function<double(double, double, double)>& f) {
    ScalarField s(g);
    for (int i = 0; i < g.n[0]; ++i)
        for (int j = 0; j < g.n[1]; ++j)
            for (int k = 0; k < g.n[2]; ++k)
                s[g.index(i, j, k)] = f(g.coordinate(0, i), g.coordinate(1, j), g.coordinate(2, k));
    return s;
}

inline VectorField vector(const Grid3& g, const std::function<double(double, double, double)>& f1,
                          const std::function<double(double, double, double)>& f2,
                          const std::function<double(double, double, double)>& f3) {
    VectorField v(g);
    v.c[0] = scalar(g, f1).data;
    v.c[1] = scalar(g, f2).data;
    v.c[2] = scalar(g, f3).data;
    return v;
}

/// Random trigonometric polynomial with modes |m_i| <= band on a 2 pi-periodic cube.
inline ScalarField random_band_limited(const Grid3& g, unsigned seed, int band = 3) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd;
    ScalarField s(g);
    for (int a = -band; a <= band; ++a)
        for (int b = -band; b <= band; ++b)
            for (int c = -band; c <= band; ++c) {
                const double amp = nd(rng) / (1.0 + a * a + b * b + c * c);
                const double ph = nd(rng);
                for (int i = 0; i < g.n[0]; ++i)
                    for (int j = 0; j < g.n[1]; ++j)
                        for (int k = 0; k < g.n[2]; ++k) {
                            const double x = 2.0 * std::numbers::pi *
                                             (a * i / double(g.n[0]) + b * j / double(g.n[1]) +
                                              c * k / double(g.n[2]));
                            s[g.index(i, j, k)] += amp * std::cos(x + ph);
                        }
            }
    return s;
}

inline VectorField random_vector(const Grid3& g, unsigned seed, int band = 3) {
    VectorField v(g);
    for (int a = 0; a < 3; ++a) v.c[a] = random_band_limited(g, seed * 7 + a, band).data;
    return v;
}

inline double max_diff(const ScalarField& a, const ScalarField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double max_diff(const VectorField& a, const VectorField& b) {
    double m = 0.0;
    for (int d = 0; d < 3; ++d)
        for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.c[d][i] - b.c[d][i]));
    return m;
}

inline double max_abs(const VectorField& v) {
    double m = 0.0;
    for (int d = 0; d < 3; ++d)
        for (double x : v.c[d]) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace testing_support
