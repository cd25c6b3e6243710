#include "alfven/pressure_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "alfven/spectral.hpp"

namespace alfven {

namespace {

/// exp(-1/t) and its first two derivatives, zero for t <= 0.
std::array<double, 3> exp_ramp(double t) {
    if (t <= 0.0) return {0.0, 0.0, 0.0};
    const double f = std::exp(-1.0 / t);
    return {f, f / (t * t), f * (1.0 - 2.0 * t) / (t * t * t * t)};
}

}  // namespace

BridgeValue bridge(Bridge kind, double r) {
    if (r <= 1.0) return {1.0, 0.0, 0.0};
    if (r >= 2.0) return {0.0, 0.0, 0.0};
    const double t = r - 1.0;
    if (kind == Bridge::polynomial) {
        // theta = 1 - (10 t^3 - 15 t^4 + 6 t^5)
        const double s = t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
        const double s1 = 30.0 * t * t * (1.0 - t) * (1.0 - t);
        const double s2 = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
        return {1.0 - s, -s1, -s2};
    }
    // S = a / (a + b), a = f(t), b = f(1 - t); theta = 1 - S.
    const auto fa = exp_ramp(t);
    const auto fb = exp_ramp(1.0 - t);
    const double a = fa[0], a1 = fa[1], a2 = fa[2];
    const double b = fb[0], b1 = -fb[1], b2 = fb[2];
    const double D = a + b;
    const double D1 = a1 + b1;
    const double N = a1 * b - a * b1;
    const double N1 = a2 * b - a * b2;
    const double S = a / D;
    const double S1 = N / (D * D);
    const double S2 = (N1 * D - 2.0 * N * D1) / (D * D * D);
    return {1.0 - S, -S1, -S2};
}

double bridge_moment(Bridge kind) {
    // Composite Simpson on [1, 2]; [0, 1] contributes 1/2 exactly.
    const int n = 2000;
    const double h = 1.0 / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double r = 1.0 + i * h;
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        acc += w * bridge(kind, r).theta * r;
    }
    return 0.5 + acc * h / 3.0;
}

std::vector<double> PressureDerivatives::total(std::size_t i) const {
    std::vector<double> t(A[i].size());
    for (std::size_t c = 0; c < t.size(); ++c) t[c] = A[i][c] + B[i][c];
    return t;
}

void require_localized(const VectorField& v, double tol) {
    const Grid3& g = v.grid;
    const double peak = max_norm(v);
    if (peak == 0.0) return;
    double face = 0.0;
    for (int i1 = 0; i1 < g.n[0]; ++i1)
        for (int i2 = 0; i2 < g.n[1]; ++i2)
            for (int i3 = 0; i3 < g.n[2]; ++i3) {
                const std::array<int, 3> idx{i1, i2, i3};
                bool near = false;
                for (int a = 0; a < 3; ++a) near = near || idx[a] == g.n[a] / 2;
                if (!near) continue;
                const auto q = g.index(i1, i2, i3);
                face = std::max(face, std::sqrt(v.c[0][q] * v.c[0][q] + v.c[1][q] * v.c[1][q] +
                                                v.c[2][q] * v.c[2][q]));
            }
    if (face > tol * peak) throw Error("free-space assumption violated");
}

namespace {

int tensor_size(int l) { return l == 1 ? 3 : (l == 2 ? 9 : 27); }

MultiIndex alpha_of(std::initializer_list<int> axes) {
    MultiIndex a{0, 0, 0};
    for (int x : axes) ++a[x];
    return a;
}

struct Sources {
    Grid3 fine;
    std::vector<Vec3> pos;
    ScalarField s;
    SpectralArray s_hat;
    std::array<ScalarField, 3> ds;
    std::array<std::array<ScalarField, 3>, 3> dds;
    /// T[j][i] = z-^j z+^i
    std::array<std::array<std::vector<double>, 3>, 3> T;
    /// U^j = d_i z-^j z+^i
    std::array<std::vector<double>, 3> U;
};

Sources build_sources(const VectorField& z_plus, const VectorField& z_minus, int l, int refine,
                      bool full) {
    require_same_grid(z_plus.grid, z_minus.grid);
    require_finite(z_plus);
    require_finite(z_minus);
    if (l < 1 || l > 3) throw Error("oracle: derivative order must be 1, 2 or 3");
    for (int a = 0; a < 3; ++a) {
        if (z_plus.grid.n[a] > kOracleMaxPoints) throw Error("oracle: grid too large for direct summation");
    }
    require_localized(z_plus);
    require_localized(z_minus);

    Sources src;
    const auto zp = upsample(z_plus, refine);
    const auto zm = upsample(z_minus, refine);
    src.fine = zp.grid;
    const Grid3& g = src.fine;
    const std::size_t n = g.size();
    src.pos.resize(n);
    for (std::size_t q = 0; q < n; ++q) src.pos[q] = g.centered_point(q);

    const auto gp = component_gradients(zp);
    const auto gm = component_gradients(zm);
    src.s = ScalarField(g);
    for (std::size_t q = 0; q < n; ++q) {
        double acc = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) acc += gm[j].c[i][q] * gp[i].c[j][q];
        src.s[q] = acc;
    }
    src.s_hat = to_spectral(src.s);
    if (!full) return src;
    if (l >= 2) {
        for (int a = 0; a < 3; ++a) src.ds[a] = partial(src.s, alpha_of({a}));
    }
    if (l == 3) {
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) src.dds[a][b] = partial(src.s, alpha_of({a, b}));
    }
    if (l == 1) {
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < 3; ++i) {
                src.T[j][i].resize(n);
                for (std::size_t q = 0; q < n; ++q) src.T[j][i][q] = zm.c[j][q] * zp.c[i][q];
            }
    }
    if (l == 2) {
        for (int j = 0; j < 3; ++j) {
            src.U[j].assign(n, 0.0);
            for (std::size_t q = 0; q < n; ++q)
                for (int i = 0; i < 3; ++i) src.U[j][q] += gm[j].c[i][q] * zp.c[i][q];
        }
    }
    return src;
}

/// Derivatives of 1/r at the vector x.
struct Kernel {
    double r = 0.0;
    Vec3 x{};
    std::array<double, 3> d1{};
    std::array<std::array<double, 3>, 3> d2{};

    explicit Kernel(const Vec3& v) : x(v) {
        r = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        const double r2 = r * r, r3 = r2 * r, r5 = r3 * r2;
        for (int i = 0; i < 3; ++i) {
            d1[i] = -x[i] / r3;
            for (int j = 0; j < 3; ++j) d2[i][j] = (3.0 * x[i] * x[j] - (i == j ? r2 : 0.0)) / r5;
        }
    }
    [[nodiscard]] double d3(int i, int j, int k) const {
        const double r2 = r * r, r5 = r2 * r2 * r, r7 = r5 * r2;
        return -15.0 * x[i] * x[j] * x[k] / r7 +
               3.0 * (x[i] * (j == k) + x[j] * (i == k) + x[k] * (i == j)) / r5;
    }
};

}  // namespace

PressureDerivatives pressure_newtonian_oracle(const VectorField& z_plus, const VectorField& z_minus,
                                              int l, const std::vector<Vec3>& points, Bridge kind,
                                              int refine) {
    const Sources src = build_sources(z_plus, z_minus, l, refine, true);
    const Grid3& g = src.fine;
    const double dv = g.cell_volume();
    const double moment = bridge_moment(kind);
    const double inv4pi = 1.0 / (4.0 * std::numbers::pi);
    const int nc = tensor_size(l);

    PressureDerivatives out;
    out.order = l;
    out.points = points;
    for (const auto& x : points) {
        std::vector<double> A(nc, 0.0), B(nc, 0.0);
        // Local Taylor data g = d^{l-1} s and grad g at the evaluation point.
        std::vector<double> g0(nc / 3), g1(nc);
        for (int c = 0; c < nc / 3; ++c) {
            std::vector<int> axes;
            if (l >= 2) axes.push_back(l == 2 ? c : c / 3);
            if (l == 3) axes.push_back(c % 3);
            MultiIndex base{0, 0, 0};
            for (int a : axes) ++base[a];
            g0[c] = evaluate_at(g, src.s_hat, base, x);
            for (int m = 0; m < 3; ++m) {
                MultiIndex am = base;
                ++am[m];
                g1[c * 3 + m] = evaluate_at(g, src.s_hat, am, x);
            }
        }

        for (std::size_t q = 0; q < g.size(); ++q) {
            const Vec3 rv{x[0] - src.pos[q][0], x[1] - src.pos[q][1], x[2] - src.pos[q][2]};
            const double r = std::sqrt(rv[0] * rv[0] + rv[1] * rv[1] + rv[2] * rv[2]);
            if (r < 1e-12) continue;
            const auto th = bridge(kind, r);
            const Vec3 nv{rv[0] / r, rv[1] / r, rv[2] / r};
            if (r < 2.0) {
                // Near field with the singular Taylor part subtracted.
                std::vector<double> G(nc / 3);
                const double sq = src.s[q];
                if (l == 1) {
                    G[0] = th.theta * sq;
                } else if (l == 2) {
                    for (int a = 0; a < 3; ++a) G[a] = th.theta * src.ds[a][q] - th.d1 * nv[a] * sq;
                } else {
                    for (int a = 0; a < 3; ++a)
                        for (int b = 0; b < 3; ++b) {
                            const double dda = (th.d2 - th.d1 / r) * nv[a] * nv[b] + (a == b ? th.d1 / r : 0.0);
                            G[a * 3 + b] = th.theta * src.dds[a][b][q] - th.d1 * nv[a] * src.ds[b][q] -
                                           th.d1 * nv[b] * src.ds[a][q] + dda * sq;
                        }
                }
                const double r3 = r * r * r;
                for (int c = 0; c < nc / 3; ++c) {
                    const double taylor =
                        g0[c] - (rv[0] * g1[c * 3] + rv[1] * g1[c * 3 + 1] + rv[2] * g1[c * 3 + 2]);
                    const double rem = G[c] - th.theta * taylor;
                    for (int k = 0; k < 3; ++k) A[k * (nc / 3) + c] += -rv[k] / r3 * inv4pi * rem * dv;
                }
            }
            if (r > 1.0) {
                const Kernel K(rv);
                const double w = 1.0 - th.theta;
                const double w1 = -th.d1;
                const double w2 = -th.d2;
                std::array<double, 3> dw{};
                std::array<std::array<double, 3>, 3> ddw{};
                for (int i = 0; i < 3; ++i) {
                    dw[i] = w1 * nv[i];
                    for (int j = 0; j < 3; ++j)
                        ddw[i][j] = (w2 - w1 / r) * nv[i] * nv[j] + (i == j ? w1 / r : 0.0);
                }
                if (l == 1) {
                    for (int k = 0; k < 3; ++k) {
                        double acc = 0.0;
                        for (int i = 0; i < 3; ++i)
                            for (int j = 0; j < 3; ++j) {
                                const double ker = K.d3(k, i, j) * w + K.d2[k][i] * dw[j] +
                                                   K.d2[k][j] * dw[i] + K.d1[k] * ddw[i][j];
                                acc += ker * src.T[j][i][q];
                            }
                        B[k] += inv4pi * acc * dv;
                    }
                } else if (l == 2) {
                    for (int k = 0; k < 3; ++k)
                        for (int a = 0; a < 3; ++a) {
                            double acc = 0.0;
                            for (int j = 0; j < 3; ++j)
                                acc += (K.d3(k, a, j) * w + K.d2[k][a] * dw[j]) * src.U[j][q];
                            B[k * 3 + a] += inv4pi * acc * dv;
                        }
                } else {
                    for (int k = 0; k < 3; ++k)
                        for (int a = 0; a < 3; ++a)
                            for (int b = 0; b < 3; ++b)
                                B[(k * 3 + a) * 3 + b] += inv4pi * K.d3(k, a, b) * w * src.s[q] * dv;
                }
            }
        }
        // Exact integral of the subtracted Taylor part.
        for (int k = 0; k < 3; ++k)
            for (int c = 0; c < nc / 3; ++c) A[k * (nc / 3) + c] += moment / 3.0 * g1[c * 3 + k];
        out.A.push_back(std::move(A));
        out.B.push_back(std::move(B));
    }
    return out;
}

std::vector<std::vector<double>> padded_pressure_derivatives(const VectorField& z_plus,
                                                             const VectorField& z_minus, int l,
                                                             const std::vector<Vec3>& points,
                                                             int refine) {
    const Sources src = build_sources(z_plus, z_minus, l, refine, false);
    const Grid3& g = src.fine;
    const Grid3 padded(2 * g.n[0], 2 * g.n[1], 2 * g.n[2], 2 * g.L[0], 2 * g.L[1], 2 * g.L[2]);
    ScalarField s2(padded);
    auto wrap = [](int i, int n, int N) { return ((2 * i < n ? i : i - n) + N) % N; };
    for (int i1 = 0; i1 < g.n[0]; ++i1)
        for (int i2 = 0; i2 < g.n[1]; ++i2)
            for (int i3 = 0; i3 < g.n[2]; ++i3) {
                s2[padded.index(wrap(i1, g.n[0], padded.n[0]), wrap(i2, g.n[1], padded.n[1]),
                                wrap(i3, g.n[2], padded.n[2]))] = src.s[g.index(i1, i2, i3)];
            }
    const auto p_hat = to_spectral(solve_poisson(s2));
    const int nc = tensor_size(l);
    std::vector<std::vector<double>> out;
    for (const auto& x : points) {
        std::vector<double> v(nc);
        for (int c = 0; c < nc; ++c) {
            MultiIndex alpha{0, 0, 0};
            int rest = c;
            for (int d = 0; d < l; ++d) {
                int div = 1;
                for (int e = d + 1; e < l; ++e) div *= 3;
                ++alpha[rest / div];
                rest %= div;
            }
            v[c] = evaluate_at(padded, p_hat, alpha, x);
        }
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace alfven
