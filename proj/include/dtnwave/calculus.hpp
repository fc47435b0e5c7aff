#pragma once

// Diagonal operator symbols on the sphere, fractional Sobolev norms, the
// Gagliardo double-integral cross-check, and interior evaluation of the
// harmonic extension to the unit ball. Every operator here is diagonal in
// the real spherical-harmonic basis:
//   Laplace-Beltrami       lambda(l) = -l(l+1)
//   Dirichlet-to-Neumann   lambda(l) = l          (exact on the unit ball)
//   third-order -Lb*DtN    lambda(l) = a_l = l^2 (l+1)
//   Sobolev weight         lambda(l) = (1 + l(l+1))^{s/2}

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dtnwave/sphharm.hpp"

namespace dtnwave {

/// Diagonal-in-l spectral symbol.
struct Multiplier {
    std::string name;
    std::function<double(int)> symbol;
};

/// a_l = l^2 (l+1), the symbol of -LaplaceBeltrami∘DtN.
inline double third_order_symbol(int l) noexcept {
    const double ld = l;
    return ld * ld * (ld + 1.0);
}

inline double sobolev_weight(int l, double s) noexcept {
    const double ld = l;
    return std::pow(1.0 + ld * (ld + 1.0), 0.5 * s);
}

inline Multiplier laplace_beltrami_multiplier() {
    return {"laplace_beltrami", [](int l) { return -static_cast<double>(l) * (l + 1); }};
}
inline Multiplier dtn_multiplier() {
    return {"dtn", [](int l) { return static_cast<double>(l); }};
}
inline Multiplier third_order_multiplier() {
    return {"third_order", [](int l) { return third_order_symbol(l); }};
}
inline Multiplier sobolev_multiplier(double s) {
    return {"sobolev:" + std::to_string(s), [s](int l) { return sobolev_weight(l, s); }};
}

/// Catalog lookup by the CLI name strings; "sobolev:<s>" parses the order.
inline Multiplier multiplier_by_name(const std::string& name) {
    if (name == "laplace_beltrami") return laplace_beltrami_multiplier();
    if (name == "dtn") return dtn_multiplier();
    if (name == "third_order") return third_order_multiplier();
    if (name.rfind("sobolev:", 0) == 0) {
        const double s = std::stod(name.substr(8));
        return sobolev_multiplier(s);
    }
    throw std::invalid_argument("unknown multiplier: " + name);
}

/// out_{l,m} = lambda(l) * c_{l,m}; degree preserved.
inline SpectralField apply_multiplier(const Multiplier& mu, const SpectralField& c) {
    SpectralField out(c.L);
    for (int l = 0; l <= c.L; ++l) {
        const double lam = mu.symbol(l);
        for (int m = -l; m <= l; ++m) out.at(l, m) = lam * c.at(l, m);
    }
    return out;
}

/// Outward normal derivative at r=1 of the harmonic extension: lambda(l) = l.
inline SpectralField dtn_of(const SpectralField& c) {
    return apply_multiplier(dtn_multiplier(), c);
}

/// ( sum (1+l(l+1))^s c_{l,m}^2 )^{1/2}; s=0 is the L^2(boundary) norm.
inline double sobolev_norm(const SpectralField& c, double s) {
    if (s < -2.0 || s > 4.0)
        throw std::invalid_argument("sobolev_norm: order outside [-2, 4]");
    double acc = 0.0;
    for (int l = 0; l <= c.L; ++l) {
        const double w = std::pow(1.0 + static_cast<double>(l) * (l + 1.0), s);
        for (int m = -l; m <= l; ++m) {
            const double v = c.at(l, m);
            acc += w * v * v;
        }
    }
    return std::sqrt(acc);
}

/// Gagliardo seminorm [u]_sigma by double quadrature over node pairs with the
/// chordal distance in R^3 and surface dimension 2 in the exponent; the
/// diagonal x=y is excluded. Returns the seminorm (square root of the double
/// integral), homogeneous of degree 1 in u.
inline double gagliardo_seminorm(const SpectralField& c, double sigma, const SphGrid& grid) {
    if (!(sigma > 0.0 && sigma < 1.0))
        throw std::invalid_argument("gagliardo_seminorm: sigma outside (0,1)");
    detail::require_grid_serves(grid, c.L, "gagliardo_seminorm");
    const GridField u = synthesize(c, grid);

    const std::size_t n = grid.n_nodes();
    std::vector<double> px(n), py(n), pz(n), w(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double th = grid.node_colat(j), ph = grid.node_lon(j);
        px[j] = std::sin(th) * std::cos(ph);
        py[j] = std::sin(th) * std::sin(ph);
        pz[j] = std::cos(th);
        w[j] = grid.node_weight(j);
    }
    const double expo = -(1.0 + sigma);  // |x-y|^{-(2+2sigma)} = (|x-y|^2)^{-(1+sigma)}
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = px[i] - px[j], dy = py[i] - py[j], dz = pz[i] - pz[j];
            const double d2 = dx * dx + dy * dy + dz * dz;
            if (d2 <= 0.0) continue;  // coincident nodes (poles) count as diagonal
            const double du = u.values[i] - u.values[j];
            acc += 2.0 * w[i] * w[j] * du * du * std::pow(d2, expo);
        }
    }
    return std::sqrt(acc);
}

/// Spectral twin of the sigma-seminorm: ( sum ((1+l(l+1))^sigma - 1) c^2 )^{1/2}.
/// Used only as the equivalence reference for the Gagliardo form.
inline double spectral_seminorm(const SpectralField& c, double sigma) {
    double acc = 0.0;
    for (int l = 0; l <= c.L; ++l) {
        const double w = std::pow(1.0 + static_cast<double>(l) * (l + 1.0), sigma) - 1.0;
        for (int m = -l; m <= l; ++m) {
            const double v = c.at(l, m);
            acc += w * v * v;
        }
    }
    return std::sqrt(acc);
}

/// Point in the closed unit ball, spherical coordinates.
struct BallPoint {
    double r = 0.0;
    double colat = 0.0;
    double lon = 0.0;
};

/// sum c_{l,m} r^l Y_{l,m}(colat, lon); at r=1 agrees with synthesize.
inline double extend_harmonic(const SpectralField& c, const BallPoint& p) {
    if (!(p.r >= 0.0 && p.r <= 1.0))
        throw std::invalid_argument("extend_harmonic: r outside [0,1]");
    std::vector<double> plm;
    legendre_table(c.L, std::cos(p.colat), plm);
    const double sqrt2 = std::numbers::sqrt2;
    double acc = 0.0;
    double rl = 1.0;  // r^l
    for (int l = 0; l <= c.L; ++l) {
        double ring = c.at(l, 0) * plm[tri_index(l, 0)];
        for (int m = 1; m <= l; ++m) {
            const double p_lm = plm[tri_index(l, m)];
            ring += sqrt2 * p_lm *
                    (c.at(l, m) * std::cos(m * p.lon) + c.at(l, -m) * std::sin(m * p.lon));
        }
        acc += rl * ring;
        rl *= p.r;
    }
    return acc;
}

struct BallNorms {
    double l2 = 0.0;         // L^2(ball) norm of the harmonic extension
    double dirichlet = 0.0;  // int_ball |grad u|^2 = sum l c^2
    double h1 = 0.0;         // sqrt(l2^2 + dirichlet)
};

/// Exact radial integrals of the harmonic extension:
/// ||u||^2_{L2(ball)} = sum c^2/(2l+3), Dirichlet integral = sum l c^2.
inline BallNorms ball_norms(const SpectralField& c) {
    BallNorms out;
    double l2sq = 0.0;
    for (int l = 0; l <= c.L; ++l) {
        for (int m = -l; m <= l; ++m) {
            const double v = c.at(l, m);
            l2sq += v * v / (2.0 * l + 3.0);
            out.dirichlet += l * v * v;
        }
    }
    out.l2 = std::sqrt(l2sq);
    out.h1 = std::sqrt(l2sq + out.dirichlet);
    return out;
}

}  // namespace dtnwave
