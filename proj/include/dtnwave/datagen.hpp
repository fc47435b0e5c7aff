#pragma once

// Deterministic random boundary data with prescribed Sobolev regularity.
// Coefficients come from a counter-based generator keyed by (seed, l, m,
// slot): no sequential stream, so fields are reproducible independent of
// evaluation order and thread count.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dtnwave/sphharm.hpp"

namespace dtnwave {

namespace rng {

/// splitmix64 finalizer; full-avalanche 64-bit mixer.
inline std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Stateless counter hash of a (seed, a, b, c) key.
inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                                  std::uint64_t c) noexcept {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    h = mix64(h ^ c);
    return h;
}

/// Uniform double strictly inside (0,1) from 53 bits.
inline double to_unit_open(std::uint64_t u) noexcept {
    return (static_cast<double>(u >> 11) + 0.5) * 0x1.0p-53;
}

/// Inverse standard-normal CDF (Acklam's rational approximation,
/// max relative error ~1.15e-9; ample for sampling).
inline double inv_normal_cdf(double p) noexcept {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5, r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

/// Standard normal keyed by (seed, l, m, slot).
inline double normal(std::uint64_t seed, int l, int m, std::uint64_t slot) noexcept {
    const std::uint64_t h = counter_hash(seed, static_cast<std::uint64_t>(l),
                                         static_cast<std::uint64_t>(m + l), slot);
    return inv_normal_cdf(to_unit_open(h));
}

}  // namespace rng

/// Target class for a rough random field: samples land in H^s (barely,
/// for rho close to 1) with E||f||_s^2 = sum_l (2l+1)(1+l(l+1))^{-rho}.
struct RoughSpec {
    double s = 0.0;
    double rho = 1.1;
    int L = 0;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(rho > 1.0)) throw std::invalid_argument("RoughSpec: need rho > 1");
        if (L < 0) throw std::invalid_argument("RoughSpec: negative degree");
    }
};

/// c_{l,m} = xi_{l,m} (1+l(l+1))^{-(s+rho)/2}, xi iid standard normal.
/// `slot` distinguishes time samples (see random_forcing).
inline SpectralField random_field(const RoughSpec& spec, std::uint64_t slot = 0) {
    spec.validate();
    SpectralField c(spec.L);
    for (int l = 0; l <= spec.L; ++l) {
        const double decay =
            std::pow(1.0 + static_cast<double>(l) * (l + 1.0), -0.5 * (spec.s + spec.rho));
        for (int m = -l; m <= l; ++m)
            c.at(l, m) = rng::normal(spec.seed, l, m, slot) * decay;
    }
    return c;
}

/// Independent random field per time sample t_k = k T / n_steps,
/// seed mixed with the sample index. n_steps = 0 gives the single t=0 sample.
inline std::vector<SpectralField> random_forcing(const RoughSpec& spec, int n_steps,
                                                 double /*T*/) {
    spec.validate();
    if (n_steps < 0) throw std::invalid_argument("random_forcing: negative step count");
    std::vector<SpectralField> g;
    g.reserve(n_steps + 1);
    for (int k = 0; k <= n_steps; ++k) g.push_back(random_field(spec, k + 1));
    return g;
}

/// Zero coefficients with l > L_new and relabel the degree. Identity when
/// L_new >= c.L; idempotent.
inline SpectralField truncate(const SpectralField& c, int L_new) {
    if (L_new < 0) throw std::invalid_argument("truncate: negative degree");
    if (L_new >= c.L) return c;
    SpectralField out(L_new);
    for (int l = 0; l <= L_new; ++l)
        for (int m = -l; m <= l; ++m) out.at(l, m) = c.at(l, m);
    return out;
}

}  // namespace dtnwave
