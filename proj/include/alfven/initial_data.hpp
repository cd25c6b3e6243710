#pragma once

#include <cstdint>
#include <string>

#include "alfven/state.hpp"
#include "alfven/weights.hpp"

namespace alfven {

/// Divergence-free, x3-localized initial data: z = curl A with A a random
/// band-limited trigonometric polynomial times exp(-x3^2 / 2 sigma^2).
struct InitialRecipe {
    enum class Kind { zero, one_family, two_family };

    Kind kind = Kind::two_family;
    std::uint64_t seed = 1;
    /// Envelope width; <= 0 selects L3 / 16.
    double sigma = 0.0;
    /// Trigonometric modes |m_i| <= band along each axis.
    int band = 2;
    /// Family carrying the data for Kind::one_family.
    Family one_family = Family::plus;
};

InitialRecipe::Kind recipe_kind_from(const std::string& name);
std::string to_string(InitialRecipe::Kind kind);

/// Weighted initial norm sqrt(sum_{+-} sum_{k<=order} sum_{|a|=k} ||<x3>^omega d^a z||^2).
double initial_norm(const ElsasserState& s, const WeightParams& weight, int order);

/// Builds the recipe's data scaled so that initial_norm(..., norm_order) == epsilon.
ElsasserState make_initial_state(const Grid3& grid, const InitialRecipe& recipe, double epsilon,
                                 const WeightParams& weight, int norm_order);

/// Fully localized solenoidal field curl(exp(-|x|^2 / 2 sigma^2) (c0 + C x)) with
/// seeded random c0, C, centered at x = 0. Used where free-space data are needed.
VectorField localized_blob(const Grid3& grid, std::uint64_t seed, double sigma, double amplitude);

/// Time-reflection image: z'(x) = -M z(M x), M = diag(1, 1, -1) about x3 = 0.
/// The solution from the image is the x3-reflected, time-reversed solution.
ElsasserState time_reflected(const ElsasserState& s);
VectorField time_reflected(const VectorField& v);

/// Lattice translation by (s1, s2) grid cells in x1, x2.
VectorField shifted(const VectorField& v, int s1, int s2);
ElsasserState shifted(const ElsasserState& s, int s1, int s2);

}  // namespace alfven
