#pragma once

// Time evolution of the boundary system. In the spherical-harmonic basis the
// problem decouples into independent modes
//     x'' + omega_l^2 x = g(t),   omega_l = sqrt(kappa * l^2 (l+1)),
// and step_exact advances each mode by the closed-form solution with g
// piecewise linear between samples. The update is uniformly accurate in
// omega*h: for forcing constant or linear in t the local error is pure
// roundoff, whether omega*h is 1e-6 or 1e3. Stoermer-Verlet is kept as an
// independent second-order cross-check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "dtnwave/calculus.hpp"
#include "dtnwave/sphharm.hpp"

namespace dtnwave {

struct EvolveParams {
    double kappa = 1.0;
    double T = 1.0;
    int n_steps = 1;
    int L = 0;

    void validate() const {
        if (!(kappa > 0.0)) throw std::invalid_argument("EvolveParams: need kappa > 0");
        if (!(T > 0.0)) throw std::invalid_argument("EvolveParams: need T > 0");
        if (n_steps < 1) throw std::invalid_argument("EvolveParams: need n_steps >= 1");
        if (L < 0) throw std::invalid_argument("EvolveParams: negative degree");
    }
    double dt() const { return T / n_steps; }
};

/// (f, fdot) at a time instant.
struct BoundaryState {
    double t = 0.0;
    SpectralField f;
    SpectralField fdot;
};

/// Time-sampled states plus the forcing and the equation-defined fddot.
struct Trajectory {
    EvolveParams params;
    std::vector<BoundaryState> states;   // at t_k = k T / n_steps
    std::vector<SpectralField> forcing;  // G(t_k)
    std::vector<SpectralField> fddot;    // G - kappa a_l f at t_k
};

/// (G, f0, f1) with G sampled on the uniform grid over [0, T].
/// An empty G stands for identically zero forcing.
struct DataTriple {
    std::vector<SpectralField> G;
    SpectralField f0;
    SpectralField f1;
    double T = 1.0;
};

/// omega_l = sqrt(kappa l^2 (l+1)); omega_0 = 0.
inline double mode_frequency(int l, double kappa) {
    if (l < 0) throw std::invalid_argument("mode_frequency: negative degree");
    if (!(kappa > 0.0)) throw std::invalid_argument("mode_frequency: need kappa > 0");
    return std::sqrt(kappa * third_order_symbol(l));
}

/// Propagator coefficients for one mode and step size. With theta = omega*h:
///   x1 = cos_t*x0 + h*sinc_t*v0 + h^2*(c1*g0 + c2*(g1-g0))
///   v1 = -omega*sin_t*x0 + cos_t*v0 + h*(sinc_t*g0 + c1*(g1-g0))
/// where sinc = sin(theta)/theta, c1 = (1-cos theta)/theta^2,
/// c2 = (theta - sin theta)/theta^3. Below theta = 3e-2 the three ratios are
/// evaluated by 4-term series (truncation < 2e-18 at the threshold); the
/// direct forms lose ~eps/theta^2 to cancellation, which would cost 4 digits
/// near theta = 1e-4. theta = 0 (the l = 0 kernel) runs through the same
/// series branch and reproduces the exact polynomial update.
struct PropagatorCoeffs {
    double omega = 0.0, h = 0.0;
    double cos_t = 1.0, sin_t = 0.0;
    double sinc_t = 1.0;  // sin(theta)/theta
    double c1 = 0.5;      // (1 - cos theta)/theta^2
    double c2 = 1.0 / 6;  // (theta - sin theta)/theta^3
};

inline PropagatorCoeffs propagator_coeffs(double omega, double h) {
    PropagatorCoeffs pc;
    pc.omega = omega;
    pc.h = h;
    const double theta = omega * h;
    pc.cos_t = std::cos(theta);
    pc.sin_t = std::sin(theta);
    if (theta < 3e-2) {
        const double t2 = theta * theta;
        pc.sinc_t = 1.0 - t2 / 6.0 + t2 * t2 / 120.0 - t2 * t2 * t2 / 5040.0;
        pc.c1 = 0.5 - t2 / 24.0 + t2 * t2 / 720.0 - t2 * t2 * t2 / 40320.0;
        pc.c2 = 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0 - t2 * t2 * t2 / 362880.0;
    } else {
        pc.sinc_t = pc.sin_t / theta;
        pc.c1 = (1.0 - pc.cos_t) / (theta * theta);
        pc.c2 = (theta - pc.sin_t) / (theta * theta * theta);
    }
    return pc;
}

/// One exact oscillator step for a single mode.
inline void oscillator_step(const PropagatorCoeffs& pc, double& x, double& v, double g0,
                            double g1) {
    const double h = pc.h;
    const double dg = g1 - g0;
    const double x1 = pc.cos_t * x + h * pc.sinc_t * v + h * h * (pc.c1 * g0 + pc.c2 * dg);
    const double v1 = -pc.omega * pc.sin_t * x + pc.cos_t * v + h * (pc.sinc_t * g0 + pc.c1 * dg);
    x = x1;
    v = v1;
}

namespace detail {

inline std::vector<PropagatorCoeffs> coeffs_per_degree(int L, double kappa, double h) {
    std::vector<PropagatorCoeffs> pcs;
    pcs.reserve(L + 1);
    for (int l = 0; l <= L; ++l) pcs.push_back(propagator_coeffs(mode_frequency(l, kappa), h));
    return pcs;
}

inline void check_state_pair(const BoundaryState& s, const char* who) {
    if (s.f.L != s.fdot.L) throw std::invalid_argument(std::string(who) + ": f/fdot degree mismatch");
}

}  // namespace detail

/// Advance every mode by the exact solution of x'' + omega_l^2 x = g with g
/// linear between g_now and g_next.
inline BoundaryState step_exact(const BoundaryState& state, const SpectralField& g_now,
                                const SpectralField& g_next, double h, double kappa) {
    if (!(h > 0.0)) throw std::invalid_argument("step_exact: need h > 0");
    detail::check_state_pair(state, "step_exact");
    const int L = state.f.L;
    if (g_now.L != L || g_next.L != L)
        throw std::invalid_argument("step_exact: forcing degree mismatch");

    BoundaryState out;
    out.t = state.t + h;
    out.f = state.f;
    out.fdot = state.fdot;
    for (int l = 0; l <= L; ++l) {
        const PropagatorCoeffs pc = propagator_coeffs(mode_frequency(l, kappa), h);
        for (int m = -l; m <= l; ++m) {
            const std::size_t i = SpectralField::index(l, m);
            oscillator_step(pc, out.f.coeffs[i], out.fdot.coeffs[i], g_now.coeffs[i],
                            g_next.coeffs[i]);
        }
    }
    return out;
}

/// One Stoermer-Verlet (kick-drift-kick) step of the mode system with force
/// -kappa a_l x + g; second order, symplectic for g = 0.
inline BoundaryState step_verlet(const BoundaryState& state, const SpectralField& g_now,
                                 const SpectralField& g_next, double h, double kappa) {
    if (!(h > 0.0)) throw std::invalid_argument("step_verlet: need h > 0");
    detail::check_state_pair(state, "step_verlet");
    const int L = state.f.L;
    if (g_now.L != L || g_next.L != L)
        throw std::invalid_argument("step_verlet: forcing degree mismatch");

    BoundaryState out;
    out.t = state.t + h;
    out.f = state.f;
    out.fdot = state.fdot;
    for (int l = 0; l <= L; ++l) {
        const double k = kappa * third_order_symbol(l);
        for (int m = -l; m <= l; ++m) {
            const std::size_t i = SpectralField::index(l, m);
            double x = out.f.coeffs[i], v = out.fdot.coeffs[i];
            const double vh = v + 0.5 * h * (-k * x + g_now.coeffs[i]);
            x += h * vh;
            v = vh + 0.5 * h * (-k * x + g_next.coeffs[i]);
            out.f.coeffs[i] = x;
            out.fdot.coeffs[i] = v;
        }
    }
    return out;
}

/// Streaming evolution engine. `forcing(k, out)` must fill the degree-L
/// coefficient vector of G(t_k); `visit(k, t, f, fdot, fddot, g)` is called
/// at every sample with flat coefficient arrays of size (L+1)^2. Nothing is
/// stored, so sweeps at large L / many steps stay cheap in memory.
template <typename ForcingFn, typename Visitor>
void evolve_scan(const SpectralField& f0, const SpectralField& f1, ForcingFn&& forcing,
                 const EvolveParams& params, Visitor&& visit) {
    params.validate();
    if (f0.L > params.L || f1.L > params.L)
        throw std::invalid_argument("evolve_scan: data degree exceeds params.L");
    const int L = params.L;
    const std::size_t n_coeff = static_cast<std::size_t>(L + 1) * (L + 1);
    const double h = params.dt();

    const auto pcs = detail::coeffs_per_degree(L, params.kappa, h);
    std::vector<double> al(n_coeff);
    for (int l = 0; l <= L; ++l)
        for (int m = -l; m <= l; ++m) al[SpectralField::index(l, m)] = third_order_symbol(l);

    std::vector<double> f = embed(f0, L).coeffs;
    std::vector<double> fd = embed(f1, L).coeffs;
    std::vector<double> g_now(n_coeff, 0.0), g_next(n_coeff, 0.0), fdd(n_coeff, 0.0);

    forcing(0, g_now);
    for (std::size_t i = 0; i < n_coeff; ++i)
        fdd[i] = g_now[i] - params.kappa * al[i] * f[i];
    visit(std::size_t{0}, 0.0, f, fd, fdd, g_now);

    for (int k = 0; k < params.n_steps; ++k) {
        forcing(k + 1, g_next);
        for (int l = 0; l <= L; ++l) {
            const PropagatorCoeffs& pc = pcs[l];
            const std::size_t lo = SpectralField::index(l, -l);
            const std::size_t hi = SpectralField::index(l, l);
            for (std::size_t i = lo; i <= hi; ++i)
                oscillator_step(pc, f[i], fd[i], g_now[i], g_next[i]);
        }
        for (std::size_t i = 0; i < n_coeff; ++i)
            fdd[i] = g_next[i] - params.kappa * al[i] * f[i];
        const double t = (k + 1 == params.n_steps) ? params.T : (k + 1) * h;
        visit(static_cast<std::size_t>(k + 1), t, f, fd, fdd, g_next);
        std::swap(g_now, g_next);
    }
}

namespace detail {

/// Forcing provider over stored samples (empty = zero forcing).
struct StoredForcing {
    const std::vector<SpectralField>* samples;
    int L;
    void operator()(std::size_t k, std::vector<double>& out) const {
        if (samples->empty()) {
            std::fill(out.begin(), out.end(), 0.0);
            return;
        }
        const SpectralField padded = embed((*samples)[k], L);
        out = padded.coeffs;
    }
};

inline void validate_data(const DataTriple& data, const EvolveParams& params) {
    if (data.f0.L > params.L || data.f1.L > params.L)
        throw std::invalid_argument("solve: data degree exceeds params.L");
    if (!data.G.empty()) {
        if (data.G.size() != static_cast<std::size_t>(params.n_steps) + 1)
            throw std::invalid_argument("solve: forcing sample count != n_steps + 1");
        if (std::abs(data.T - params.T) > 1e-12 * std::max(1.0, params.T))
            throw std::invalid_argument("solve: data.T inconsistent with params.T");
    }
    for (const auto& g : data.G)
        if (g.L > params.L) throw std::invalid_argument("solve: forcing degree exceeds params.L");
    auto finite = [](const SpectralField& c) {
        for (double v : c.coeffs)
            if (!std::isfinite(v)) return false;
        return true;
    };
    if (!finite(data.f0) || !finite(data.f1))
        throw std::invalid_argument("solve: non-finite initial data");
    for (const auto& g : data.G)
        if (!finite(g)) throw std::invalid_argument("solve: non-finite forcing");
}

}  // namespace detail

/// Realization of L^{-1} at finite truncation: trajectory with
/// states(0) = (f0, f1), every step exact, fddot filled from the equation.
inline Trajectory solve(const DataTriple& data, const EvolveParams& params) {
    params.validate();
    detail::validate_data(data, params);

    Trajectory traj;
    traj.params = params;
    traj.states.reserve(params.n_steps + 1);
    traj.forcing.reserve(params.n_steps + 1);
    traj.fddot.reserve(params.n_steps + 1);

    detail::StoredForcing forcing{&data.G, params.L};
    evolve_scan(data.f0, data.f1, forcing, params,
                [&](std::size_t, double t, const std::vector<double>& f,
                    const std::vector<double>& fd, const std::vector<double>& fdd,
                    const std::vector<double>& g) {
                    BoundaryState s;
                    s.t = t;
                    s.f = SpectralField(params.L);
                    s.fdot = SpectralField(params.L);
                    s.f.coeffs = f;
                    s.fdot.coeffs = fd;
                    SpectralField gs(params.L), dds(params.L);
                    gs.coeffs = g;
                    dds.coeffs = fdd;
                    traj.states.push_back(std::move(s));
                    traj.forcing.push_back(std::move(gs));
                    traj.fddot.push_back(std::move(dds));
                });
    return traj;
}

/// L(f) = (fddot - kappa LaplaceBeltrami DtN f, f(0), fdot(0)); in symbols the
/// G-slot is fddot + kappa a_l f, recomputed per sample. Round trip:
/// apply_L(solve(d)) reproduces d at the sample times for piecewise-linear G.
inline DataTriple apply_L(const Trajectory& traj) {
    if (traj.states.size() < 3)
        throw std::invalid_argument("apply_L: need at least 3 time samples");
    const int L = traj.states.front().f.L;
    const double kappa = traj.params.kappa;

    DataTriple data;
    data.T = traj.params.T;
    data.f0 = traj.states.front().f;
    data.f1 = traj.states.front().fdot;
    data.G.reserve(traj.states.size());
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        SpectralField g(L);
        for (int l = 0; l <= L; ++l) {
            const double ka = kappa * third_order_symbol(l);
            for (int m = -l; m <= l; ++m) {
                const std::size_t i = SpectralField::index(l, m);
                g.coeffs[i] = traj.fddot[k].coeffs[i] + ka * traj.states[k].f.coeffs[i];
            }
        }
        data.G.push_back(std::move(g));
    }
    return data;
}

/// Max over samples of |fddot - (G - kappa a_l f)|: the Trajectory invariant.
inline double trajectory_residual(const Trajectory& traj) {
    double worst = 0.0;
    const int L = traj.states.front().f.L;
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        for (int l = 0; l <= L; ++l) {
            const double ka = traj.params.kappa * third_order_symbol(l);
            for (int m = -l; m <= l; ++m) {
                const std::size_t i = SpectralField::index(l, m);
                const double r = traj.fddot[k].coeffs[i] -
                                 (traj.forcing[k].coeffs[i] - ka * traj.states[k].f.coeffs[i]);
                worst = std::max(worst, std::abs(r));
            }
        }
    }
    return worst;
}

}  // namespace dtnwave
