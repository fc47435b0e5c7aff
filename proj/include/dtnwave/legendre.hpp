#pragma once

// Fully normalized associated Legendre functions and Gauss-Legendre rules.
// Pbar_l^m is normalized so that int_{-1}^{1} Pbar_l^m(x)^2 dx = 1/(2*pi),
// i.e. the spherical-harmonic normalization with the azimuthal factor split
// off. No Condon-Shortley sign.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace dtnwave {

inline constexpr double four_pi = 4.0 * std::numbers::pi;

/// Packed index for a triangular (l,m) table with 0 <= m <= l <= L.
inline std::size_t tri_index(int l, int m) noexcept {
    return static_cast<std::size_t>(l) * (l + 1) / 2 + m;
}

/// Tabulate Pbar_l^m(x) for all 0 <= m <= l <= L into a triangular table.
/// Stable three-term recurrence on the normalized functions; no factorials.
inline void legendre_table(int L, double x, std::vector<double>& table) {
    if (L < 0) throw std::invalid_argument("legendre_table: negative degree");
    table.assign(tri_index(L, L) + 1, 0.0);

    const double omx2 = (1.0 - x) * (1.0 + x);
    // Diagonal Pbar_m^m: running product of (2i-1)/(2i)*(1-x^2).
    double pmm_sq = 1.0;  // product before the sqrt and (2m+1)/(4pi) factor
    for (int m = 0; m <= L; ++m) {
        if (m > 0) pmm_sq *= omx2 * (2.0 * m - 1.0) / (2.0 * m);
        const double pmm = std::sqrt((2.0 * m + 1.0) * pmm_sq / four_pi);
        table[tri_index(m, m)] = pmm;
        if (m + 1 <= L) {
            double prev2 = pmm;
            double prev1 = x * std::sqrt(2.0 * m + 3.0) * pmm;
            table[tri_index(m + 1, m)] = prev1;
            double oldfact = std::sqrt(2.0 * m + 3.0);
            for (int l = m + 2; l <= L; ++l) {
                const double fact =
                    std::sqrt((4.0 * l * l - 1.0) /
                              (static_cast<double>(l) * l - static_cast<double>(m) * m));
                const double pl = (x * prev1 - prev2 / oldfact) * fact;
                table[tri_index(l, m)] = pl;
                oldfact = fact;
                prev2 = prev1;
                prev1 = pl;
            }
        }
    }
}

struct GaussLegendreRule {
    std::vector<double> nodes;    // in (-1,1), descending
    std::vector<double> weights;  // sum to 2
};

/// n-point Gauss-Legendre rule on [-1,1]. Newton iteration on P_n with
/// Chebyshev initial guesses, converged to ~1e-15.
inline GaussLegendreRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: need n >= 1");
    GaussLegendreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // Legendre polynomial and derivative by the standard recurrence.
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        // One clean-up pass for the weight at the converged node.
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Store symmetric pair; nodes descending from +1 side.
        rule.nodes[i] = x;
        rule.weights[i] = w;
        rule.nodes[n - 1 - i] = -x;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[half - 1] = 0.0;
    return rule;
}

}  // namespace dtnwave
