#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace alfven {

/// Error raised by every contract violation in the library. The message is
/// the stable, user-facing reason ("invalid field", "bootstrap amplitude
/// exceeded", ...).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Vec3 = std::array<double, 3>;

/// Uniform triply periodic grid. Points sit at x_i = k L_i / n_i, k in [0, n_i).
///
/// Data are stored row-major with x3 fastest: index = (i1 * n2 + i2) * n3 + i3.
struct Grid3 {
    std::array<int, 3> n{};
    std::array<double, 3> L{};

    Grid3() = default;
    Grid3(int n1, int n2, int n3, double L1, double L2, double L3);
    Grid3(std::array<int, 3> n_, std::array<double, 3> L_);

    [[nodiscard]] std::size_t size() const {
        return static_cast<std::size_t>(n[0]) * n[1] * n[2];
    }
    [[nodiscard]] double spacing(int axis) const { return L[axis] / n[axis]; }
    [[nodiscard]] double min_spacing() const;
    [[nodiscard]] double cell_volume() const {
        return spacing(0) * spacing(1) * spacing(2);
    }
    [[nodiscard]] std::size_t index(int i1, int i2, int i3) const {
        return (static_cast<std::size_t>(i1) * n[1] + i2) * n[2] + i3;
    }
    /// Grid coordinate k L / n.
    [[nodiscard]] double coordinate(int axis, int k) const { return k * spacing(axis); }
    /// Representative of the periodic coordinate in [-L/2, L/2). Localized data
    /// and the label charts are centered on x = 0 in this representative.
    [[nodiscard]] double centered(int axis, int k) const {
        return (2 * k < n[axis] ? k : k - n[axis]) * spacing(axis);
    }
    [[nodiscard]] Vec3 centered_point(std::size_t flat) const;

    friend bool operator==(const Grid3&, const Grid3&) = default;
};

struct ScalarField {
    Grid3 grid;
    std::vector<double> data;

    ScalarField() = default;
    explicit ScalarField(const Grid3& g, double value = 0.0)
        : grid(g), data(g.size(), value) {}

    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }
    [[nodiscard]] std::size_t size() const { return data.size(); }
};

struct VectorField {
    Grid3 grid;
    std::array<std::vector<double>, 3> c;

    VectorField() = default;
    explicit VectorField(const Grid3& g)
        : grid(g), c{std::vector<double>(g.size()), std::vector<double>(g.size()),
                     std::vector<double>(g.size())} {}

    [[nodiscard]] std::size_t size() const { return grid.size(); }
};

/// Throws Error("invalid field") if any entry is non-finite or shapes disagree.
void require_finite(const ScalarField& f);
void require_finite(const VectorField& v);
void require_same_grid(const Grid3& a, const Grid3& b);

double max_abs(const ScalarField& f);
/// max over points of the Euclidean norm |v(x)|.
double max_norm(const VectorField& v);
/// Trapezoidal (= rectangle on a periodic grid) quadrature of |v|^2.
double l2_squared(const VectorField& v);
double l2_squared(const ScalarField& f);
double inner(const VectorField& a, const VectorField& b);

VectorField operator+(const VectorField& a, const VectorField& b);
VectorField operator-(const VectorField& a, const VectorField& b);
VectorField operator*(double s, const VectorField& a);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(double s, const ScalarField& a);

}  // namespace alfven
