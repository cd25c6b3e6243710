#include "alfven/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace alfven {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

std::shared_ptr<const Spectral> Spectral::get(const Grid3& grid) {
    static std::mutex cache_mutex;
    static std::map<std::pair<std::array<int, 3>, std::array<double, 3>>,
                    std::shared_ptr<const Spectral>>
        cache;
    std::lock_guard lock(cache_mutex);
    auto key = std::make_pair(grid.n, grid.L);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto s = std::make_shared<const Spectral>(grid);
    cache.emplace(key, s);
    return s;
}

Spectral::Spectral(const Grid3& grid) : grid_(grid), nc3_(grid.n[2] / 2 + 1) {
    csize_ = static_cast<std::size_t>(grid.n[0]) * grid.n[1] * nc3_;
    for (int a = 0; a < 3; ++a) {
        const int count = a == 2 ? nc3_ : grid.n[a];
        k_[a].resize(count);
        for (int i = 0; i < count; ++i) {
            k_[a][i] = 2.0 * std::numbers::pi * mode(a, i) / grid.L[a];
        }
    }
    std::vector<double> rbuf(grid.size());
    SpectralArray cbuf(csize_);
    std::lock_guard lock(planner_mutex());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    plan_fwd_ = fftw_plan_dft_r2c_3d(grid.n[0], grid.n[1], grid.n[2], rbuf.data(),
                                     reinterpret_cast<fftw_complex*>(cbuf.data()), flags);
    plan_inv_ = fftw_plan_dft_c2r_3d(grid.n[0], grid.n[1], grid.n[2],
                                     reinterpret_cast<fftw_complex*>(cbuf.data()), rbuf.data(),
                                     flags);
    if (plan_fwd_ == nullptr || plan_inv_ == nullptr) throw Error("fftw planning failed");
}

Spectral::~Spectral() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
}

int Spectral::mode(int axis, int idx) const {
    if (axis == 2) return idx;
    const int n = grid_.n[axis];
    return 2 * idx < n ? idx : idx - n;
}

bool Spectral::is_nyquist(int axis, int idx) const {
    return 2 * std::abs(mode(axis, idx)) == grid_.n[axis];
}

bool Spectral::kept(int i1, int i2, int i3) const {
    return 3 * std::abs(mode(0, i1)) < grid_.n[0] && 3 * std::abs(mode(1, i2)) < grid_.n[1] &&
           3 * i3 < grid_.n[2];
}

Complex Spectral::derivative_factor(const MultiIndex& alpha, int i1, int i2, int i3) const {
    const std::array<int, 3> idx{i1, i2, i3};
    Complex f{1.0, 0.0};
    for (int a = 0; a < 3; ++a) {
        if (alpha[a] == 0) continue;
        if (alpha[a] % 2 == 1 && is_nyquist(a, idx[a])) return {0.0, 0.0};
        const Complex ik{0.0, k_[a][idx[a]]};
        for (int p = 0; p < alpha[a]; ++p) f *= ik;
    }
    return f;
}

void Spectral::forward(std::span<const double> in, SpectralArray& out) const {
    out.resize(csize_);
    // r2c leaves its input intact.
    fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_fwd_), const_cast<double*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out.data()));
}

void Spectral::inverse(const SpectralArray& in, std::span<double> out) const {
    SpectralArray work(in);
    fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_inv_),
                         reinterpret_cast<fftw_complex*>(work.data()), out.data());
    const double scale = 1.0 / static_cast<double>(grid_.size());
    for (double& x : out) x *= scale;
}

SpectralArray to_spectral(const Grid3& grid, std::span<const double> data) {
    SpectralArray s;
    Spectral::get(grid)->forward(data, s);
    return s;
}

SpectralArray to_spectral(const ScalarField& f) { return to_spectral(f.grid, f.data); }

ScalarField to_physical(const Grid3& grid, const SpectralArray& s) {
    ScalarField f(grid);
    Spectral::get(grid)->inverse(s, f.data);
    return f;
}

std::vector<MultiIndex> multi_indices(int order) {
    std::vector<MultiIndex> out;
    for (int a = order; a >= 0; --a)
        for (int b = order - a; b >= 0; --b) out.push_back({a, b, order - a - b});
    return out;
}

ScalarField partial(const ScalarField& f, const MultiIndex& alpha) {
    require_finite(f);
    const auto sp = Spectral::get(f.grid);
    SpectralArray s;
    sp->forward(f.data, s);
    sp->for_each_mode([&](std::size_t m, int i1, int i2, int i3) {
        s[m] *= sp->derivative_factor(alpha, i1, i2, i3);
    });
    return to_physical(f.grid, s);
}

ScalarField derivative(const ScalarField& f, int axis) {
    MultiIndex alpha{0, 0, 0};
    alpha[axis] = 1;
    return partial(f, alpha);
}

VectorField gradient(const ScalarField& f) {
    require_finite(f);
    const auto sp = Spectral::get(f.grid);
    SpectralArray s;
    sp->forward(f.data, s);
    VectorField g(f.grid);
    SpectralArray d(s.size());
    for (int a = 0; a < 3; ++a) {
        MultiIndex alpha{0, 0, 0};
        alpha[a] = 1;
        sp->for_each_mode([&](std::size_t m, int i1, int i2, int i3) {
            d[m] = s[m] * sp->derivative_factor(alpha, i1, i2, i3);
        });
        sp->inverse(d, g.c[a]);
    }
    return g;
}

std::array<VectorField, 3> component_gradients(const VectorField& v) {
    std::array<VectorField, 3> g;
    for (int a = 0; a < 3; ++a) {
        ScalarField comp(v.grid);
        comp.data = v.c[a];
        g[a] = gradient(comp);
    }
    return g;
}

namespace {

std::array<SpectralArray, 3> forward_all(const Spectral& sp, const VectorField& v) {
    std::array<SpectralArray, 3> s;
    for (int a = 0; a < 3; ++a) sp.forward(v.c[a], s[a]);
    return s;
}

}  // namespace

VectorField curl(const VectorField& v) {
    require_finite(v);
    const auto sp = Spectral::get(v.grid);
    auto s = forward_all(*sp, v);
    VectorField out(v.grid);
    SpectralArray w(sp->spectral_size());
    for (int k = 0; k < 3; ++k) {
        const int i = (k + 1) % 3;
        const int j = (k + 2) % 3;
        // (curl v)_k = d_i v_j - d_j v_i for cyclic (i, j, k).
        MultiIndex di{0, 0, 0}, dj{0, 0, 0};
        di[i] = 1;
        dj[j] = 1;
        sp->for_each_mode([&](std::size_t m, int i1, int i2, int i3) {
            w[m] = sp->derivative_factor(di, i1, i2, i3) * s[j][m] -
                   sp->derivative_factor(dj, i1, i2, i3) * s[i][m];
        });
        sp->inverse(w, out.c[k]);
    }
    return out;
}

ScalarField divergence(const VectorField& v) {
    require_finite(v);
    const auto sp = Spectral::get(v.grid);
    auto s = forward_all(*sp, v);
    SpectralArray w(sp->spectral_size());
    sp->for_each_mode([&](std::size_t m, int i1, int i2, int i3) {
        Complex acc{0.0, 0.0};
        for (int a = 0; a < 3; ++a) {
            MultiIndex alpha{0, 0, 0};
            alpha[a] = 1;
            acc += sp->derivative_factor(alpha, i1, i2, i3) * s[a][m];
        }
        w[m] = acc;
    });
    return to_physical(v.grid, w);
}

VectorField leray_project(const VectorField& v) {
    require_finite(v);
    const auto sp = Spectral::get(v.grid);
    auto s = forward_all(*sp, v);
    sp->for_each_mode([&](std::size_t m, int i1, int i2, int i3) {
        // Nyquist components along an axis carry no resolvable derivative; they
        // are dropped so the result is divergence-free in the discrete sense.
        std::array<double, 3> k{};
        const std::array<int, 3> idx{i1, i2, i3};
        for (int a = 0; a < 3; ++a) {
            if (sp->is_nyquist(a, idx[a])) {
                s[a][m] = 0.0;
                k[a] = 0.0;
            } else {
                k[a] = sp->wavenumber(a, idx[a]);
            }
        }
        const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if (k2 == 0.0) return;
        const Complex kv = k[0] * s[0][m] + k[1] * s[1][m] + k[2] * s[2][m];
        for (int a = 0; a < 3; ++a) s[a][m] -= k[a] * kv / k2;
    });
    VectorField out(v.grid);
    for (int a = 0; a < 3; ++a) sp->inverse(s[a], out.c[a]);
    return out;
}

ScalarField solve_poisson(const ScalarField& rhs) {
    require_finite(rhs);
    const auto sp = Spectral::get(rhs.grid);
    SpectralArray s;
    sp->forward(rhs.data, s);
    sp->for_each_mode([&](std::size_t m, int i1, int i2, int i3) {
        const double k2 = sp->wavenumber(0, i1) * sp->wavenumber(0, i1) +
                          sp->wavenumber(1, i2) * sp->wavenumber(1, i2) +
                          sp->wavenumber(2, i3) * sp->wavenumber(2, i3);
        s[m] = k2 == 0.0 ? Complex{0.0, 0.0} : s[m] / k2;
    });
    return to_physical(rhs.grid, s);
}

ScalarField dealias(const ScalarField& f) {
    const auto sp = Spectral::get(f.grid);
    SpectralArray s;
    sp->forward(f.data, s);
    sp->for_each_mode([&](std::size_t m, int i1, int i2, int i3) {
        if (!sp->kept(i1, i2, i3)) s[m] = 0.0;
    });
    return to_physical(f.grid, s);
}

VectorField dealias(const VectorField& v) {
    VectorField out(v.grid);
    for (int a = 0; a < 3; ++a) {
        ScalarField f(v.grid);
        f.data = v.c[a];
        out.c[a] = dealias(f).data;
    }
    return out;
}

double evaluate_at(const Grid3& grid, const SpectralArray& f_hat, const MultiIndex& alpha,
                   const Vec3& x) {
    const auto sp = Spectral::get(grid);
    std::array<std::vector<Complex>, 3> phase;
    for (int a = 0; a < 3; ++a) {
        const int count = a == 2 ? sp->half_n3() : grid.n[a];
        phase[a].resize(count);
        for (int i = 0; i < count; ++i) phase[a][i] = std::polar(1.0, sp->wavenumber(a, i) * x[a]);
    }
    double acc = 0.0;
    const int n3h = grid.n[2] / 2;
    sp->for_each_mode([&](std::size_t m, int i1, int i2, int i3) {
        const double weight = (i3 == 0 || i3 == n3h) ? 1.0 : 2.0;
        const Complex v = f_hat[m] * sp->derivative_factor(alpha, i1, i2, i3) * phase[0][i1] *
                          phase[1][i2] * phase[2][i3];
        acc += weight * v.real();
    });
    return acc / static_cast<double>(grid.size());
}

ScalarField upsample(const ScalarField& f, int factor) {
    if (factor < 1) throw Error("upsample: factor must be >= 1");
    if (factor == 1) return f;
    const Grid3& g = f.grid;
    const Grid3 fine(g.n[0] * factor, g.n[1] * factor, g.n[2] * factor, g.L[0], g.L[1], g.L[2]);
    const auto sc = Spectral::get(g);
    const auto sf = Spectral::get(fine);
    SpectralArray coarse;
    sc->forward(f.data, coarse);
    SpectralArray out(sf->spectral_size());
    const double scale = static_cast<double>(fine.size()) / static_cast<double>(g.size());
    sc->for_each_mode([&](std::size_t m, int i1, int i2, int i3) {
        if (sc->is_nyquist(0, i1) || sc->is_nyquist(1, i2) || sc->is_nyquist(2, i3)) return;
        const int m1 = sc->mode(0, i1);
        const int m2 = sc->mode(1, i2);
        const int j1 = m1 >= 0 ? m1 : m1 + fine.n[0];
        const int j2 = m2 >= 0 ? m2 : m2 + fine.n[1];
        const std::size_t q =
            (static_cast<std::size_t>(j1) * fine.n[1] + j2) * sf->half_n3() + static_cast<std::size_t>(i3);
        out[q] = coarse[m] * scale;
    });
    return to_physical(fine, out);
}

VectorField upsample(const VectorField& v, int factor) {
    VectorField out;
    for (int a = 0; a < 3; ++a) {
        ScalarField c(v.grid);
        c.data = v.c[a];
        auto u = upsample(c, factor);
        out.grid = u.grid;
        out.c[a] = std::move(u.data);
    }
    return out;
}

}  // namespace alfven
