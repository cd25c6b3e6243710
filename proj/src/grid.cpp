#include "alfven/grid.hpp"

#include <algorithm>
#include <cmath>

namespace alfven {

Grid3::Grid3(int n1, int n2, int n3, double L1, double L2, double L3)
    : Grid3(std::array<int, 3>{n1, n2, n3}, std::array<double, 3>{L1, L2, L3}) {}

Grid3::Grid3(std::array<int, 3> n_, std::array<double, 3> L_) : n(n_), L(L_) {
    for (int a = 0; a < 3; ++a) {
        if (n[a] < 8 || n[a] % 2 != 0) {
            throw Error("grid: n" + std::to_string(a + 1) + " must be an even integer >= 8");
        }
        if (!(L[a] > 0.0) || !std::isfinite(L[a])) {
            throw Error("grid: L" + std::to_string(a + 1) + " must be positive");
        }
    }
}

double Grid3::min_spacing() const {
    return std::min({spacing(0), spacing(1), spacing(2)});
}

Vec3 Grid3::centered_point(std::size_t flat) const {
    const int i3 = static_cast<int>(flat % n[2]);
    const int i2 = static_cast<int>((flat / n[2]) % n[1]);
    const int i1 = static_cast<int>(flat / (static_cast<std::size_t>(n[2]) * n[1]));
    return {centered(0, i1), centered(1, i2), centered(2, i3)};
}

void require_same_grid(const Grid3& a, const Grid3& b) {
    if (!(a == b)) throw Error("grid mismatch");
}

void require_finite(const ScalarField& f) {
    if (f.data.size() != f.grid.size()) throw Error("invalid field");
    for (double x : f.data) {
        if (!std::isfinite(x)) throw Error("invalid field");
    }
}

void require_finite(const VectorField& v) {
    for (const auto& comp : v.c) {
        if (comp.size() != v.grid.size()) throw Error("invalid field");
        for (double x : comp) {
            if (!std::isfinite(x)) throw Error("invalid field");
        }
    }
}

double max_abs(const ScalarField& f) {
    double m = 0.0;
    for (double x : f.data) m = std::max(m, std::abs(x));
    return m;
}

double max_norm(const VectorField& v) {
    double m = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double s = v.c[0][i] * v.c[0][i] + v.c[1][i] * v.c[1][i] + v.c[2][i] * v.c[2][i];
        m = std::max(m, s);
    }
    return std::sqrt(m);
}

double l2_squared(const VectorField& v) { return inner(v, v); }

double l2_squared(const ScalarField& f) {
    double s = 0.0;
    for (double x : f.data) s += x * x;
    return s * f.grid.cell_volume();
}

double inner(const VectorField& a, const VectorField& b) {
    require_same_grid(a.grid, b.grid);
    double s = 0.0;
    for (int d = 0; d < 3; ++d) {
        for (std::size_t i = 0; i < a.size(); ++i) s += a.c[d][i] * b.c[d][i];
    }
    return s * a.grid.cell_volume();
}

VectorField operator+(const VectorField& a, const VectorField& b) {
    require_same_grid(a.grid, b.grid);
    VectorField r(a.grid);
    for (int d = 0; d < 3; ++d) {
        for (std::size_t i = 0; i < a.size(); ++i) r.c[d][i] = a.c[d][i] + b.c[d][i];
    }
    return r;
}

VectorField operator-(const VectorField& a, const VectorField& b) {
    require_same_grid(a.grid, b.grid);
    VectorField r(a.grid);
    for (int d = 0; d < 3; ++d) {
        for (std::size_t i = 0; i < a.size(); ++i) r.c[d][i] = a.c[d][i] - b.c[d][i];
    }
    return r;
}

VectorField operator*(double s, const VectorField& a) {
    VectorField r(a.grid);
    for (int d = 0; d < 3; ++d) {
        for (std::size_t i = 0; i < a.size(); ++i) r.c[d][i] = s * a.c[d][i];
    }
    return r;
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid, b.grid);
    ScalarField r(a.grid);
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

ScalarField operator*(double s, const ScalarField& a) {
    ScalarField r(a.grid);
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
    return r;
}

}  // namespace alfven
