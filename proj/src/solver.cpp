#include "alfven/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "alfven/spectral.hpp"

namespace alfven {

void SimConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error("config: dt must be positive");
    if (!std::isfinite(T)) throw Error("config: T must be finite");
    if (std::abs(T) > grid.L[2] / 4.0 + 1e-12) {
        throw Error("config: |T| exceeds the validity window L3/4");
    }
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
        throw Error("config: epsilon must be non-negative");
    }
    weight.validate();
    if (norm_order < 0) throw Error("config: norm_order must be non-negative");
    if (output_stride < 1) throw Error("config: output_stride must be >= 1");
}

int SimConfig::step_count() const {
    if (T == 0.0) return 0;
    return static_cast<int>(std::ceil(std::abs(T) / dt - 1e-9));
}

double SimConfig::signed_dt() const {
    const int n = step_count();
    return n == 0 ? 0.0 : T / n;
}

std::size_t Trajectory::bracket(double t) const {
    if (states.size() < 2) throw Error("trajectory: need at least two snapshots");
    const double a = std::min(t_begin(), t_end());
    const double b = std::max(t_begin(), t_end());
    const double slack = 1e-9 * std::max(1.0, b - a);
    if (t < a - slack || t > b + slack) throw Error("time outside trajectory");
    const bool forward = t_end() > t_begin();
    // Snapshots are monotone in time; binary search on the oriented sequence.
    std::size_t lo = 0;
    std::size_t hi = states.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        const bool before = forward ? states[mid].t <= t : states[mid].t >= t;
        if (before) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo;
}

namespace {

/// Spectral-space copy of the fluctuation pair used inside the integrator.
struct SpecState {
    std::array<SpectralArray, 3> p;
    std::array<SpectralArray, 3> m;
};

/// Wavenumbers with Nyquist entries zeroed, matching the first-derivative
/// convention of the spectral calculus.
std::array<double, 3> effective_k(const Spectral& sp, int i1, int i2, int i3) {
    const std::array<int, 3> idx{i1, i2, i3};
    std::array<double, 3> k{};
    for (int a = 0; a < 3; ++a) k[a] = sp.is_nyquist(a, idx[a]) ? 0.0 : sp.wavenumber(a, idx[a]);
    return k;
}

SpecState to_spec(const Spectral& sp, const ElsasserState& s) {
    SpecState out;
    for (int a = 0; a < 3; ++a) {
        sp.forward(s.z_plus.c[a], out.p[a]);
        sp.forward(s.z_minus.c[a], out.m[a]);
    }
    return out;
}

ElsasserState to_state(const Spectral& sp, const SpecState& s, double t) {
    ElsasserState out = zero_state(sp.grid(), t);
    for (int a = 0; a < 3; ++a) {
        sp.inverse(s.p[a], out.z_plus.c[a]);
        sp.inverse(s.m[a], out.z_minus.c[a]);
    }
    return out;
}

struct Evaluation {
    SpecState d;
    SpectralArray p_hat;
    ElsasserState physical;
};

/// Tendencies in spectral space. The physical fields are returned as a by-product.
Evaluation evaluate(const Spectral& sp, const SpecState& s, double t, bool dealias) {
    Evaluation ev;
    ev.physical = to_state(sp, s, t);
    require_amplitude(ev.physical);
    const Grid3& g = sp.grid();
    const std::size_t n = g.size();

    // T[j][i] = z-^j z+^i.
    std::array<std::array<SpectralArray, 3>, 3> prod;
    std::vector<double> buf(n);
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) {
            const auto& a = ev.physical.z_minus.c[j];
            const auto& b = ev.physical.z_plus.c[i];
            for (std::size_t q = 0; q < n; ++q) buf[q] = a[q] * b[q];
            sp.forward(buf, prod[j][i]);
        }

    const std::size_t cs = sp.spectral_size();
    for (int a = 0; a < 3; ++a) {
        ev.d.p[a].assign(cs, Complex{});
        ev.d.m[a].assign(cs, Complex{});
    }
    ev.p_hat.assign(cs, Complex{});
    const Complex I{0.0, 1.0};
    sp.for_each_mode([&](std::size_t q, int i1, int i2, int i3) {
        const auto k = effective_k(sp, i1, i2, i3);
        const bool keep = !dealias || sp.kept(i1, i2, i3);
        std::array<std::array<Complex, 3>, 3> Th{};
        if (keep) {
            for (int j = 0; j < 3; ++j)
                for (int i = 0; i < 3; ++i) Th[j][i] = prod[j][i][q];
        }
        const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        Complex S{};
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < 3; ++i) S += k[i] * k[j] * Th[j][i];
        const Complex ph = k2 == 0.0 ? Complex{} : -S / k2;
        ev.p_hat[q] = ph;
        for (int i = 0; i < 3; ++i) {
            Complex adv_p{}, adv_m{};
            for (int j = 0; j < 3; ++j) {
                adv_p += k[j] * Th[j][i];
                adv_m += k[j] * Th[i][j];
            }
            ev.d.p[i][q] = -I * adv_p + I * k[2] * s.p[i][q] - I * k[i] * ph;
            ev.d.m[i][q] = -I * adv_m - I * k[2] * s.m[i][q] - I * k[i] * ph;
        }
    });
    return ev;
}

void project(const Spectral& sp, SpecState& s) {
    sp.for_each_mode([&](std::size_t q, int i1, int i2, int i3) {
        const auto k = effective_k(sp, i1, i2, i3);
        const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if (k2 == 0.0) return;
        for (auto* f : {&s.p, &s.m}) {
            const Complex kv = k[0] * (*f)[0][q] + k[1] * (*f)[1][q] + k[2] * (*f)[2][q];
            for (int a = 0; a < 3; ++a) (*f)[a][q] -= k[a] * kv / k2;
        }
    });
}

/// out = base + h * d
SpecState axpy(const SpecState& base, double h, const SpecState& d) {
    SpecState out = base;
    for (int a = 0; a < 3; ++a) {
        for (std::size_t q = 0; q < out.p[a].size(); ++q) {
            out.p[a][q] += h * d.p[a][q];
            out.m[a][q] += h * d.m[a][q];
        }
    }
    return out;
}

void accumulate(SpecState& acc, double h, const SpecState& d) {
    for (int a = 0; a < 3; ++a) {
        for (std::size_t q = 0; q < acc.p[a].size(); ++q) {
            acc.p[a][q] += h * d.p[a][q];
            acc.m[a][q] += h * d.m[a][q];
        }
    }
}

double max_background_speed(const ElsasserState& s) {
    double m = 0.0;
    for (std::size_t q = 0; q < s.z_plus.size(); ++q) {
        const double pz = s.z_plus.c[2][q] + 1.0;
        const double mz = s.z_minus.c[2][q] - 1.0;
        m = std::max(m, std::sqrt(s.z_plus.c[0][q] * s.z_plus.c[0][q] +
                                  s.z_plus.c[1][q] * s.z_plus.c[1][q] + pz * pz));
        m = std::max(m, std::sqrt(s.z_minus.c[0][q] * s.z_minus.c[0][q] +
                                  s.z_minus.c[1][q] * s.z_minus.c[1][q] + mz * mz));
    }
    return m;
}

double max_gradient_norm(const Spectral& sp, const SpectralArray& p_hat) {
    VectorField g(sp.grid());
    SpectralArray d(p_hat.size());
    for (int a = 0; a < 3; ++a) {
        MultiIndex alpha{0, 0, 0};
        alpha[a] = 1;
        sp.for_each_mode([&](std::size_t q, int i1, int i2, int i3) {
            d[q] = p_hat[q] * sp.derivative_factor(alpha, i1, i2, i3);
        });
        sp.inverse(d, g.c[a]);
    }
    return max_norm(g);
}

struct Stepped {
    SpecState next;
    Evaluation first;
};

Stepped rk4(const Spectral& sp, const SpecState& y, double t, double dt, bool dealias) {
    Stepped out{y, evaluate(sp, y, t, dealias)};
    const double c = cfl_number(out.first.physical, dt);
    if (c > kMaxCfl * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "CFL violation: courant number " << c << " > " << kMaxCfl;
        throw Error(msg.str());
    }
    const auto& k1 = out.first.d;
    const auto k2 = evaluate(sp, axpy(y, 0.5 * dt, k1), t + 0.5 * dt, dealias).d;
    const auto k3 = evaluate(sp, axpy(y, 0.5 * dt, k2), t + 0.5 * dt, dealias).d;
    const auto k4 = evaluate(sp, axpy(y, dt, k3), t + dt, dealias).d;
    accumulate(out.next, dt / 6.0, k1);
    accumulate(out.next, dt / 3.0, k2);
    accumulate(out.next, dt / 3.0, k3);
    accumulate(out.next, dt / 6.0, k4);
    project(sp, out.next);
    return out;
}

StepRow make_row(const Spectral& sp, const Evaluation& ev, double dt) {
    StepRow r;
    r.t = ev.physical.t;
    r.l2_zplus = l2_squared(ev.physical.z_plus);
    r.l2_zminus = l2_squared(ev.physical.z_minus);
    r.max_gradp = max_gradient_norm(sp, ev.p_hat);
    r.cfl = cfl_number(ev.physical, dt);
    return r;
}

void require_finite_state(const ElsasserState& s) {
    try {
        require_finite(s.z_plus);
        require_finite(s.z_minus);
    } catch (const Error&) {
        std::ostringstream msg;
        msg << "non-finite state at t = " << s.t;
        throw Error(msg.str());
    }
}

}  // namespace

double cfl_number(const ElsasserState& s, double dt) {
    return std::abs(dt) * (1.0 + max_background_speed(s)) / s.grid().min_spacing();
}

ScalarField pressure_poisson(const VectorField& z_plus, const VectorField& z_minus, bool dealias) {
    require_same_grid(z_plus.grid, z_minus.grid);
    require_finite(z_plus);
    require_finite(z_minus);
    ElsasserState s;
    s.z_plus = z_plus;
    s.z_minus = z_minus;
    const double rel = relative_divergence(s);
    if (rel > 1e-6) throw Error("pressure_poisson: inputs are not divergence-free");
    const auto sp = Spectral::get(z_plus.grid);
    const Grid3& g = z_plus.grid;
    const std::size_t n = g.size();
    SpectralArray acc(sp->spectral_size());
    SpectralArray tmp;
    std::vector<double> buf(n);
    // Accumulate -k_i k_j T^{ji} one product at a time to bound memory.
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) {
            for (std::size_t q = 0; q < n; ++q) buf[q] = z_minus.c[j][q] * z_plus.c[i][q];
            sp->forward(buf, tmp);
            sp->for_each_mode([&](std::size_t q, int i1, int i2, int i3) {
                if (dealias && !sp->kept(i1, i2, i3)) return;
                const auto k = effective_k(*sp, i1, i2, i3);
                acc[q] += k[i] * k[j] * tmp[q];
            });
        }
    sp->for_each_mode([&](std::size_t q, int i1, int i2, int i3) {
        const auto k = effective_k(*sp, i1, i2, i3);
        const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        acc[q] = k2 == 0.0 ? Complex{} : -acc[q] / k2;
    });
    return to_physical(g, acc);
}

Tendency elsasser_rhs(const ElsasserState& s, bool dealias) {
    const auto sp = Spectral::get(s.grid());
    const auto ev = evaluate(*sp, to_spec(*sp, s), s.t, dealias);
    Tendency out;
    out.dz_plus = VectorField(s.grid());
    out.dz_minus = VectorField(s.grid());
    for (int a = 0; a < 3; ++a) {
        sp->inverse(ev.d.p[a], out.dz_plus.c[a]);
        sp->inverse(ev.d.m[a], out.dz_minus.c[a]);
    }
    out.p = to_physical(s.grid(), ev.p_hat);
    return out;
}

ElsasserState step_rk4(const ElsasserState& s, double dt, bool dealias) {
    const auto sp = Spectral::get(s.grid());
    const auto st = rk4(*sp, to_spec(*sp, s), s.t, dt, dealias);
    auto out = to_state(*sp, st.next, s.t + dt);
    out.background = s.background;
    return out;
}

Trajectory run(const SimConfig& config) {
    config.validate();
    const auto initial =
        make_initial_state(config.grid, config.recipe, config.epsilon, config.weight, config.norm_order);
    return run(config, initial);
}

Trajectory run(const SimConfig& config, const ElsasserState& initial, const StepObserver& observer) {
    config.validate();
    require_same_grid(config.grid, initial.grid());
    require_finite_state(initial);
    const auto sp = Spectral::get(config.grid);
    const int steps = config.step_count();
    const double dt = config.signed_dt();

    Trajectory traj;
    traj.config = config;
    SpecState y = to_spec(*sp, initial);
    project(*sp, y);
    double t = initial.t;

    auto store = [&](const Evaluation& ev) {
        traj.states.push_back(ev.physical);
        traj.pressures.push_back(to_physical(config.grid, ev.p_hat));
    };
    for (int step = 0; step < steps; ++step) {
        auto st = rk4(*sp, y, t, dt, config.dealias);
        require_finite_state(st.first.physical);
        const auto row = make_row(*sp, st.first, dt);
        traj.log.push_back(row);
        if (observer) observer(row);
        if (step % config.output_stride == 0) store(st.first);
        y = std::move(st.next);
        t = initial.t + (step + 1) * dt;
    }
    const auto last = evaluate(*sp, y, t, config.dealias);
    require_finite_state(last.physical);
    const auto row = make_row(*sp, last, dt);
    traj.log.push_back(row);
    if (observer) observer(row);
    store(last);
    return traj;
}

VectorField translate_x3(const VectorField& v, double shift) {
    const auto sp = Spectral::get(v.grid);
    VectorField out(v.grid);
    SpectralArray s;
    for (int a = 0; a < 3; ++a) {
        sp->forward(v.c[a], s);
        sp->for_each_mode([&](std::size_t q, int i1, int i2, int i3) {
            const double k = effective_k(*sp, i1, i2, i3)[2];
            s[q] *= std::polar(1.0, k * shift);
        });
        sp->inverse(s, out.c[a]);
    }
    return out;
}

namespace {

/// (Z . grad) j + grad z_other ^ grad z_self, with Z = z_other + b e3.
VectorField vorticity_terms(const VectorField& z_self, const VectorField& z_other, double b) {
    const Grid3& g = z_self.grid;
    const auto gj = component_gradients(curl(z_self));
    const auto go = component_gradients(z_other);
    const auto gs = component_gradients(z_self);
    VectorField out(g);
    for (std::size_t q = 0; q < g.size(); ++q) {
        const std::array<double, 3> Z{z_other.c[0][q], z_other.c[1][q], z_other.c[2][q] + b};
        for (int k = 0; k < 3; ++k) {
            double acc = 0.0;
            for (int l = 0; l < 3; ++l) acc += Z[l] * gj[k].c[l][q];
            // eps_ijk d_i z_other^l d_l z_self^j
            const int i = (k + 1) % 3;
            const int j = (k + 2) % 3;
            for (int l = 0; l < 3; ++l) {
                acc += go[l].c[i][q] * gs[j].c[l][q] - go[l].c[j][q] * gs[i].c[l][q];
            }
            out.c[k][q] = acc;
        }
    }
    return out;
}

}  // namespace

VorticityResidual vorticity_residual(const Trajectory& traj) {
    if (traj.size() < 3) throw Error("vorticity_residual: need at least 3 snapshots");
    VorticityResidual r;
    for (std::size_t s = 1; s + 1 < traj.size(); ++s) {
        const auto& a = traj.states[s - 1];
        const auto& b = traj.states[s];
        const auto& c = traj.states[s + 1];
        const double h1 = b.t - a.t;
        const double h2 = c.t - b.t;
        const double ca = -h2 * h2 / (h1 * h2 * (h1 + h2));
        const double cb = (h2 * h2 - h1 * h1) / (h1 * h2 * (h1 + h2));
        const double cc = h1 * h1 / (h1 * h2 * (h1 + h2));
        r.times.push_back(b.t);
        for (Family f : {Family::plus, Family::minus}) {
            const auto ja = curl(a.field(f));
            const auto jb = curl(b.field(f));
            const auto jc = curl(c.field(f));
            // Z- = z- - e3 carries j+, Z+ = z+ + e3 carries j-.
            const double bg = f == Family::plus ? -1.0 : 1.0;
            auto res = vorticity_terms(b.field(f), b.field(opposite(f)), bg);
            for (int k = 0; k < 3; ++k)
                for (std::size_t q = 0; q < res.size(); ++q)
                    res.c[k][q] += ca * ja.c[k][q] + cb * jb.c[k][q] + cc * jc.c[k][q];
            const double norm = std::sqrt(l2_squared(dealias(res)));
            (f == Family::plus ? r.plus : r.minus).push_back(norm);
        }
    }
    return r;
}

}  // namespace alfven
