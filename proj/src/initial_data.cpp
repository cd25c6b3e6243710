#include "alfven/initial_data.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "alfven/spectral.hpp"

namespace alfven {

InitialRecipe::Kind recipe_kind_from(const std::string& name) {
    if (name == "zero") return InitialRecipe::Kind::zero;
    if (name == "one_family") return InitialRecipe::Kind::one_family;
    if (name == "two_family") return InitialRecipe::Kind::two_family;
    throw Error("unknown initial recipe '" + name + "'");
}

std::string to_string(InitialRecipe::Kind kind) {
    switch (kind) {
        case InitialRecipe::Kind::zero: return "zero";
        case InitialRecipe::Kind::one_family: return "one_family";
        case InitialRecipe::Kind::two_family: return "two_family";
    }
    return "?";
}

double initial_norm(const ElsasserState& s, const WeightParams& weight, int order) {
    const Grid3& g = s.grid();
    std::vector<double> w(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        w[i] = std::pow(weight_of(g.centered_point(i)[2], weight), 2.0 * weight.omega());
    }
    double total = 0.0;
    for (Family f : {Family::plus, Family::minus}) {
        const auto& z = s.field(f);
        for (int a = 0; a < 3; ++a) {
            ScalarField comp(g);
            comp.data = z.c[a];
            for (int k = 0; k <= order; ++k) {
                for (const auto& alpha : multi_indices(k)) {
                    const ScalarField d = k == 0 ? comp : partial(comp, alpha);
                    double acc = 0.0;
                    for (std::size_t i = 0; i < g.size(); ++i) acc += w[i] * d[i] * d[i];
                    total += acc * g.cell_volume();
                }
            }
        }
    }
    return std::sqrt(total);
}

namespace {

/// curl(env(x3) phi) for a random band-limited trigonometric vector phi and
/// env = exp(-x3^2 / 2 sigma^2), evaluated in closed form at the grid points.
/// Coefficients depend only on (seed, stream, band), so the same continuum
/// field is sampled on any grid.
VectorField localized_solenoidal(const Grid3& g, std::uint64_t seed, std::uint64_t stream,
                                 int band, double sigma) {
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + stream);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int w = 2 * band + 1;
    struct Mode {
        std::array<int, 3> m;
        std::array<std::complex<double>, 3> coef;
    };
    std::vector<Mode> modes;
    for (int a = -band; a <= band; ++a)
        for (int b = -band; b <= band; ++b)
            for (int c = -band; c <= band; ++c) {
                Mode md{{a, b, c}, {}};
                for (auto& x : md.coef) {
                    const double re = normal(rng);
                    const double im = normal(rng);
                    x = {re, im};
                }
                modes.push_back(md);
            }

    std::array<std::vector<std::complex<double>>, 3> phase;
    std::array<std::vector<double>, 3> kk;
    for (int ax = 0; ax < 3; ++ax) {
        phase[ax].resize(static_cast<std::size_t>(g.n[ax]) * w);
        kk[ax].resize(w);
        for (int m = -band; m <= band; ++m) kk[ax][m + band] = 2.0 * std::numbers::pi * m / g.L[ax];
        for (int i = 0; i < g.n[ax]; ++i) {
            const double x = g.coordinate(ax, i);
            for (int m = -band; m <= band; ++m) {
                phase[ax][static_cast<std::size_t>(i) * w + (m + band)] = std::polar(1.0, kk[ax][m + band] * x);
            }
        }
    }
    VectorField z(g);
    const std::complex<double> I{0.0, 1.0};
    for (int i1 = 0; i1 < g.n[0]; ++i1)
        for (int i2 = 0; i2 < g.n[1]; ++i2)
            for (int i3 = 0; i3 < g.n[2]; ++i3) {
                // phi_d and d_l phi_d
                std::array<std::complex<double>, 3> phi{};
                std::array<std::array<std::complex<double>, 3>, 3> dphi{};
                for (const auto& md : modes) {
                    const auto p = phase[0][static_cast<std::size_t>(i1) * w + md.m[0] + band] *
                                   phase[1][static_cast<std::size_t>(i2) * w + md.m[1] + band] *
                                   phase[2][static_cast<std::size_t>(i3) * w + md.m[2] + band];
                    const std::array<double, 3> k{kk[0][md.m[0] + band], kk[1][md.m[1] + band],
                                                  kk[2][md.m[2] + band]};
                    for (int d = 0; d < 3; ++d) {
                        const auto cp = md.coef[d] * p;
                        phi[d] += cp;
                        for (int l = 0; l < 3; ++l) dphi[d][l] += I * k[l] * cp;
                    }
                }
                const double x3 = g.centered(2, i3);
                const double env = std::exp(-x3 * x3 / (2.0 * sigma * sigma));
                const double denv = -x3 / (sigma * sigma) * env;
                const auto q = g.index(i1, i2, i3);
                z.c[0][q] = env * (dphi[2][1] - dphi[1][2]).real() - denv * phi[1].real();
                z.c[1][q] = env * (dphi[0][2] - dphi[2][0]).real() + denv * phi[0].real();
                z.c[2][q] = env * (dphi[1][0] - dphi[0][1]).real();
            }
    // The closed-form curl is solenoidal in the continuum; the projection only
    // removes the discrete residue of the envelope's unresolved tail.
    return leray_project(z);
}

}  // namespace

ElsasserState make_initial_state(const Grid3& grid, const InitialRecipe& recipe, double epsilon,
                                 const WeightParams& weight, int norm_order) {
    weight.validate();
    ElsasserState s = zero_state(grid);
    if (recipe.kind == InitialRecipe::Kind::zero || epsilon == 0.0) return s;
    const double sigma = recipe.sigma > 0.0 ? recipe.sigma : grid.L[2] / 16.0;
    if (recipe.kind == InitialRecipe::Kind::one_family) {
        s.field(recipe.one_family) = localized_solenoidal(grid, recipe.seed, 0, recipe.band, sigma);
    } else {
        s.z_plus = localized_solenoidal(grid, recipe.seed, 0, recipe.band, sigma);
        s.z_minus = localized_solenoidal(grid, recipe.seed, 1, recipe.band, sigma);
    }
    const double norm = initial_norm(s, weight, norm_order);
    if (norm == 0.0) return s;
    const double scale = epsilon / norm;
    s.z_plus = scale * s.z_plus;
    s.z_minus = scale * s.z_minus;
    return s;
}

VectorField localized_blob(const Grid3& grid, std::uint64_t seed, double sigma, double amplitude) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::array<double, 3> c0{};
    std::array<std::array<double, 3>, 3> C{};
    for (auto& x : c0) x = normal(rng);
    for (auto& row : C)
        for (auto& x : row) x = normal(rng) / sigma;
    VectorField z(grid);
    for (std::size_t q = 0; q < grid.size(); ++q) {
        const Vec3 x = grid.centered_point(q);
        const double E = std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (2.0 * sigma * sigma));
        std::array<double, 3> phi{};
        for (int j = 0; j < 3; ++j) phi[j] = c0[j] + C[j][0] * x[0] + C[j][1] * x[1] + C[j][2] * x[2];
        // d_i (E phi_j) = E (C[j][i] - x_i phi_j / sigma^2)
        auto d = [&](int i, int j) { return E * (C[j][i] - x[i] * phi[j] / (sigma * sigma)); };
        z.c[0][q] = amplitude * (d(1, 2) - d(2, 1));
        z.c[1][q] = amplitude * (d(2, 0) - d(0, 2));
        z.c[2][q] = amplitude * (d(0, 1) - d(1, 0));
    }
    return z;
}

VectorField time_reflected(const VectorField& v) {
    const Grid3& g = v.grid;
    VectorField out(g);
    for (int i1 = 0; i1 < g.n[0]; ++i1)
        for (int i2 = 0; i2 < g.n[1]; ++i2)
            for (int i3 = 0; i3 < g.n[2]; ++i3) {
                const auto dst = g.index(i1, i2, i3);
                const auto src = g.index(i1, i2, (g.n[2] - i3) % g.n[2]);
                out.c[0][dst] = -v.c[0][src];
                out.c[1][dst] = -v.c[1][src];
                out.c[2][dst] = v.c[2][src];
            }
    return out;
}

ElsasserState time_reflected(const ElsasserState& s) {
    ElsasserState r;
    r.t = -s.t;
    r.z_plus = time_reflected(s.z_plus);
    r.z_minus = time_reflected(s.z_minus);
    r.background = s.background;
    return r;
}

VectorField shifted(const VectorField& v, int s1, int s2) {
    const Grid3& g = v.grid;
    VectorField out(g);
    auto wrap = [](int i, int n) { return ((i % n) + n) % n; };
    for (int i1 = 0; i1 < g.n[0]; ++i1)
        for (int i2 = 0; i2 < g.n[1]; ++i2)
            for (int i3 = 0; i3 < g.n[2]; ++i3) {
                const auto dst = g.index(wrap(i1 + s1, g.n[0]), wrap(i2 + s2, g.n[1]), i3);
                const auto src = g.index(i1, i2, i3);
                for (int d = 0; d < 3; ++d) out.c[d][dst] = v.c[d][src];
            }
    return out;
}

ElsasserState shifted(const ElsasserState& s, int s1, int s2) {
    ElsasserState r = s;
    r.z_plus = shifted(s.z_plus, s1, s2);
    r.z_minus = shifted(s.z_minus, s1, s2);
    return r;
}

}  // namespace alfven
