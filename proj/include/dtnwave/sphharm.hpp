#pragma once

// Real orthonormal spherical-harmonic analysis/synthesis on S^2 with
// Gauss-Legendre x uniform-longitude quadrature. Conventions:
//   Y_{l,0}     = Pbar_l^0(cos theta)
//   Y_{l, m>0}  = sqrt(2) * Pbar_l^m(cos theta) * cos(m phi)
//   Y_{l,-m}    = sqrt(2) * Pbar_l^m(cos theta) * sin(m phi)
// orthonormal w.r.t. surface measure on the unit sphere.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "dtnwave/legendre.hpp"

namespace dtnwave {

inline constexpr int max_grid_degree = 4096;  // memory guard for build_grid

/// Gauss-Legendre (colatitude) x uniform (longitude) quadrature grid.
/// Weights are strictly positive and sum to 4*pi.
struct SphGrid {
    int n_lat = 0;
    int n_lon = 0;
    std::vector<double> colat;       // n_lat colatitudes, ascending in theta
    std::vector<double> lon;         // n_lon longitudes, uniform on [0, 2pi)
    std::vector<double> lat_weight;  // GL weight * (2pi/n_lon) per ring node

    std::size_t n_nodes() const noexcept {
        return static_cast<std::size_t>(n_lat) * n_lon;
    }
    double node_colat(std::size_t j) const { return colat[j / n_lon]; }
    double node_lon(std::size_t j) const { return lon[j % n_lon]; }
    double node_weight(std::size_t j) const { return lat_weight[j / n_lon]; }
    /// Largest degree whose products this grid integrates exactly (see build_grid).
    int max_degree() const noexcept {
        return std::min(n_lat - 1, (n_lon - 1) / 2);
    }
};

/// Real coefficients c_{l,m}, 0 <= l <= L, -l <= m <= l, packed as
/// index = l^2 + (m + l).
struct SpectralField {
    int L = 0;
    std::vector<double> coeffs;

    SpectralField() : coeffs(1, 0.0) {}
    explicit SpectralField(int degree)
        : L(degree), coeffs(static_cast<std::size_t>(degree + 1) * (degree + 1), 0.0) {
        if (degree < 0) throw std::invalid_argument("SpectralField: negative degree");
    }

    static std::size_t index(int l, int m) noexcept {
        return static_cast<std::size_t>(l) * l + (m + l);
    }
    double& at(int l, int m) { return coeffs[index(l, m)]; }
    double at(int l, int m) const { return coeffs[index(l, m)]; }
    std::size_t size() const noexcept { return coeffs.size(); }
};

/// Unit coefficient on a single (l,m) mode.
inline SpectralField basis_field(int L, int l, int m, double amplitude = 1.0) {
    SpectralField c(L);
    c.at(l, m) = amplitude;
    return c;
}

/// Zero-pad to a (weakly) larger storage degree.
inline SpectralField embed(const SpectralField& c, int L_new) {
    if (L_new < c.L) throw std::invalid_argument("embed: target degree below field degree");
    SpectralField out(L_new);
    for (int l = 0; l <= c.L; ++l)
        for (int m = -l; m <= l; ++m) out.at(l, m) = c.at(l, m);
    return out;
}

/// Point values on a SphGrid. Owns a copy of the (small) grid descriptor.
struct GridField {
    SphGrid grid;
    std::vector<double> values;
};

/// Grid exact for products of spherical harmonics up to degree 2L:
/// L+1 Gauss-Legendre colatitudes, 2L+1 uniform longitudes.
inline SphGrid build_grid(int L) {
    if (L < 0) throw std::invalid_argument("build_grid: negative degree");
    if (L > max_grid_degree) throw std::invalid_argument("build_grid: degree exceeds cap");
    SphGrid g;
    g.n_lat = L + 1;
    g.n_lon = 2 * L + 1;
    const GaussLegendreRule rule = gauss_legendre(g.n_lat);
    g.colat.resize(g.n_lat);
    g.lat_weight.resize(g.n_lat);
    const double lon_w = 2.0 * std::numbers::pi / g.n_lon;
    for (int i = 0; i < g.n_lat; ++i) {
        g.colat[i] = std::acos(rule.nodes[i]);  // nodes descending -> theta ascending
        g.lat_weight[i] = rule.weights[i] * lon_w;
    }
    g.lon.resize(g.n_lon);
    for (int j = 0; j < g.n_lon; ++j) g.lon[j] = lon_w * j;
    return g;
}

namespace detail {

/// cos(m*phi_j), sin(m*phi_j) tables for m = 0..M, all longitudes.
struct FourierTable {
    int n_lon = 0, M = 0;
    std::vector<double> cs, sn;  // (M+1) x n_lon row-major

    FourierTable(const SphGrid& g, int m_max) : n_lon(g.n_lon), M(m_max) {
        cs.resize(static_cast<std::size_t>(M + 1) * n_lon);
        sn.resize(static_cast<std::size_t>(M + 1) * n_lon);
        for (int m = 0; m <= M; ++m)
            for (int j = 0; j < n_lon; ++j) {
                cs[static_cast<std::size_t>(m) * n_lon + j] = std::cos(m * g.lon[j]);
                sn[static_cast<std::size_t>(m) * n_lon + j] = std::sin(m * g.lon[j]);
            }
    }
    const double* cos_row(int m) const { return cs.data() + static_cast<std::size_t>(m) * n_lon; }
    const double* sin_row(int m) const { return sn.data() + static_cast<std::size_t>(m) * n_lon; }
};

inline void require_grid_serves(const SphGrid& g, int L, const char* who) {
    if (g.max_degree() < L)
        throw std::invalid_argument(std::string(who) + ": grid too coarse for degree " +
                                    std::to_string(L));
}

}  // namespace detail

/// values(x_j) = sum_{l,m} c_{l,m} Y_{l,m}(x_j). O(L^3) ring-by-ring.
inline GridField synthesize(const SpectralField& c, const SphGrid& grid) {
    detail::require_grid_serves(grid, c.L, "synthesize");
    const int L = c.L;
    GridField out;
    out.grid = grid;
    out.values.assign(grid.n_nodes(), 0.0);

    const detail::FourierTable four(grid, L);
    const double sqrt2 = std::numbers::sqrt2;
    std::vector<double> plm;
    std::vector<double> am(L + 1), bm(L + 1);

    for (int i = 0; i < grid.n_lat; ++i) {
        legendre_table(L, std::cos(grid.colat[i]), plm);
        // Collapse degrees: am/bm are the cos/sin Fourier amplitudes on this ring.
        for (int m = 0; m <= L; ++m) {
            double a = 0.0, b = 0.0;
            for (int l = m; l <= L; ++l) {
                const double p = plm[tri_index(l, m)];
                a += c.at(l, m) * p;
                if (m > 0) b += c.at(l, -m) * p;
            }
            am[m] = a;
            bm[m] = b;
        }
        double* ring = out.values.data() + static_cast<std::size_t>(i) * grid.n_lon;
        for (int j = 0; j < grid.n_lon; ++j) ring[j] = am[0];
        for (int m = 1; m <= L; ++m) {
            const double* cs = four.cos_row(m);
            const double* sn = four.sin_row(m);
            const double a = sqrt2 * am[m], b = sqrt2 * bm[m];
            for (int j = 0; j < grid.n_lon; ++j) ring[j] += a * cs[j] + b * sn[j];
        }
    }
    return out;
}

/// Quadrature projections c_{l,m} = sum_j w_j v(x_j) Y_{l,m}(x_j).
/// Inverse of synthesize on fields of degree <= grid.max_degree().
inline SpectralField analyze(const GridField& v) {
    const SphGrid& grid = v.grid;
    const int L = grid.max_degree();
    SpectralField c(L);

    const detail::FourierTable four(grid, L);
    const double sqrt2 = std::numbers::sqrt2;
    std::vector<double> plm;
    std::vector<double> Am(L + 1), Bm(L + 1);

    for (int i = 0; i < grid.n_lat; ++i) {
        const double* ring = v.values.data() + static_cast<std::size_t>(i) * grid.n_lon;
        for (int m = 0; m <= L; ++m) {
            const double* cs = four.cos_row(m);
            const double* sn = four.sin_row(m);
            double A = 0.0, B = 0.0;
            for (int j = 0; j < grid.n_lon; ++j) {
                A += ring[j] * cs[j];
                B += ring[j] * sn[j];
            }
            Am[m] = A;
            Bm[m] = B;
        }
        legendre_table(L, std::cos(grid.colat[i]), plm);
        const double w = grid.lat_weight[i];
        for (int m = 0; m <= L; ++m) {
            const double fa = (m == 0) ? w : sqrt2 * w;
            for (int l = m; l <= L; ++l) {
                const double p = plm[tri_index(l, m)];
                c.at(l, m) += fa * p * Am[m];
                if (m > 0) c.at(l, -m) += fa * p * Bm[m];
            }
        }
    }
    return c;
}

/// sum_j w_j v(x_j); exact for integrands of degree <= 2*max_degree.
inline double quadrature(const GridField& v) {
    double s = 0.0;
    const std::size_t n = v.grid.n_nodes();
    for (std::size_t j = 0; j < n; ++j) s += v.grid.node_weight(j) * v.values[j];
    return s;
}

}  // namespace dtnwave
