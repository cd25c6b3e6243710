#pragma once

#include <span>
#include <vector>

#include "alfven/grid.hpp"

namespace alfven {

/// Periodic tensor-product Lagrange interpolation on a Grid3 with a centered
/// stencil of 4 (tricubic) or 6 points per axis. Query points may lie anywhere
/// on the universal cover; they are wrapped into the box.
class PeriodicInterpolator {
public:
    explicit PeriodicInterpolator(const Grid3& grid, int points = 4);

    [[nodiscard]] const Grid3& grid() const { return grid_; }
    [[nodiscard]] int points() const { return np_; }

    /// out[c] = interpolant of fields[c] at x, for every field in the list.
    void evaluate(std::span<const double* const> fields, const Vec3& x, double* out) const;
    [[nodiscard]] double evaluate(const std::vector<double>& field, const Vec3& x) const;

private:
    Grid3 grid_;
    int np_;
};

}  // namespace alfven
