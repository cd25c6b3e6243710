#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "alfven/grid.hpp"

namespace alfven {

using Complex = std::complex<double>;
using SpectralArray = std::vector<Complex>;
using MultiIndex = std::array<int, 3>;

/// FFT plans and wavenumber tables for one grid shape. Instances are shared and
/// immutable; all transforms use the new-array FFTW interface, so concurrent
/// calls on distinct buffers are safe.
class Spectral {
public:
    static std::shared_ptr<const Spectral> get(const Grid3& grid);

    explicit Spectral(const Grid3& grid);
    ~Spectral();
    Spectral(const Spectral&) = delete;
    Spectral& operator=(const Spectral&) = delete;

    [[nodiscard]] const Grid3& grid() const { return grid_; }
    /// Number of complex coefficients of the real-to-complex transform.
    [[nodiscard]] std::size_t spectral_size() const { return csize_; }
    [[nodiscard]] int half_n3() const { return nc3_; }

    void forward(std::span<const double> in, SpectralArray& out) const;
    /// Normalized inverse; `in` is left untouched.
    void inverse(const SpectralArray& in, std::span<double> out) const;

    /// Integer mode number along an axis for a spectral index.
    [[nodiscard]] int mode(int axis, int idx) const;
    [[nodiscard]] double wavenumber(int axis, int idx) const { return k_[axis][idx]; }
    [[nodiscard]] bool is_nyquist(int axis, int idx) const;
    /// 2/3-rule: true iff every |mode| < n/3.
    [[nodiscard]] bool kept(int i1, int i2, int i3) const;

    template <typename Fn>
    void for_each_mode(Fn&& fn) const {
        std::size_t flat = 0;
        for (int i1 = 0; i1 < grid_.n[0]; ++i1)
            for (int i2 = 0; i2 < grid_.n[1]; ++i2)
                for (int i3 = 0; i3 < nc3_; ++i3, ++flat) fn(flat, i1, i2, i3);
    }

    /// Multiplier of the partial derivative d^alpha at one mode; Nyquist modes of
    /// odd-order axes are dropped.
    [[nodiscard]] Complex derivative_factor(const MultiIndex& alpha, int i1, int i2, int i3) const;

private:
    Grid3 grid_;
    int nc3_;
    std::size_t csize_;
    std::array<std::vector<double>, 3> k_;
    void* plan_fwd_ = nullptr;
    void* plan_inv_ = nullptr;
};

SpectralArray to_spectral(const ScalarField& f);
SpectralArray to_spectral(const Grid3& grid, std::span<const double> data);
ScalarField to_physical(const Grid3& grid, const SpectralArray& s);

/// All multi-indices with |alpha| == order, in lexicographic order.
std::vector<MultiIndex> multi_indices(int order);

ScalarField partial(const ScalarField& f, const MultiIndex& alpha);
ScalarField derivative(const ScalarField& f, int axis);
VectorField gradient(const ScalarField& f);
/// g[a].c[l] = d_l v^a.
std::array<VectorField, 3> component_gradients(const VectorField& v);
/// (curl v)_k = eps_ijk d_i v^j, computed spectrally.
VectorField curl(const VectorField& v);
ScalarField divergence(const VectorField& v);
/// v - grad Lap^{-1} div v, zero-mean convention on the gradient part.
VectorField leray_project(const VectorField& v);
/// Solves -Lap p = rhs with zero mean.
ScalarField solve_poisson(const ScalarField& rhs);
ScalarField dealias(const ScalarField& f);
VectorField dealias(const VectorField& v);

/// Trigonometric interpolant of d^alpha f at an arbitrary point, from the
/// coefficients of f. Cost is one pass over the spectrum.
double evaluate_at(const Grid3& grid, const SpectralArray& f_hat, const MultiIndex& alpha,
                   const Vec3& x);

/// Band-limited refinement by an integer factor (zero padding in Fourier
/// space; Nyquist modes of the source are dropped).
ScalarField upsample(const ScalarField& f, int factor);
VectorField upsample(const VectorField& v, int factor);

}  // namespace alfven
