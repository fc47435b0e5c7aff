// Acceptance suite: one test per criterion, each printing a single
// [CRITERION nn] PASS/FAIL line with the measured quantities.

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include "dtnwave/analysis.hpp"
#include "dtnwave/calculus.hpp"
#include "dtnwave/datagen.hpp"
#include "dtnwave/evolve.hpp"
#include "dtnwave/sphharm.hpp"

using namespace dtnwave;

namespace {

struct Verdict {
    int id;
    bool ok = true;
    std::string detail;
    ~Verdict() {
        std::printf("[CRITERION %02d] %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
        std::fflush(stdout);
    }
};

SpectralField random_white(int L, std::uint64_t seed) {
    SpectralField c(L);
    for (int l = 0; l <= L; ++l)
        for (int m = -l; m <= l; ++m) c.at(l, m) = rng::normal(seed, l, m, 0);
    return c;
}

double max_abs_diff(const SpectralField& a, const SpectralField& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a.coeffs[i] - b.coeffs[i]));
    return worst;
}

DataTriple zero_data(int L, double T) {
    DataTriple d;
    d.f0 = SpectralField(L);
    d.f1 = SpectralField(L);
    d.T = T;
    return d;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

}  // namespace

TEST(Acceptance, Criterion01_TransformFidelity) {
    Verdict v{1};
    double worst = 0.0, elapsed_128 = 0.0;
    for (int L : {16, 64, 128}) {
        const SpectralField c = random_white(L, 4000 + L);
        const auto t0 = std::chrono::steady_clock::now();
        const SpectralField back = analyze(synthesize(c, build_grid(L)));
        const auto t1 = std::chrono::steady_clock::now();
        worst = std::max(worst, max_abs_diff(back, c));
        if (L == 128) elapsed_128 = std::chrono::duration<double>(t1 - t0).count();
    }
    v.ok = worst <= 1e-10 && elapsed_128 < 10.0;
    v.detail = "roundtrip max " + fmt(worst) + " (tol 1e-10), L=128 runtime " +
               fmt(elapsed_128) + " s (< 10 s)";
    EXPECT_LE(worst, 1e-10);
    EXPECT_LT(elapsed_128, 10.0);
}

TEST(Acceptance, Criterion02_DispersionRelation) {
    Verdict v{2};
    double worst = 0.0;
    for (int l : {1, 2, 8, 32}) {
        for (double kappa : {0.1, 1.0, 10.0}) {
            const double omega = std::sqrt(kappa * l * l * (l + 1.0));
            const int n = 8192;
            const double T = 24.0 * 2.0 * std::numbers::pi / omega;
            const PropagatorCoeffs pc = propagator_coeffs(omega, T / n);
            std::vector<double> times(n + 1), x(n + 1), vel(n + 1);
            double xs = 1.0, vs = 0.0;
            for (int k = 0; k <= n; ++k) {
                times[k] = k * (T / n);
                x[k] = xs;
                vel[k] = vs;
                oscillator_step(pc, xs, vs, 0.0, 0.0);
            }
            worst = std::max(worst, std::abs(fit_frequency(times, x, vel) - omega) / omega);
        }
    }
    v.ok = worst <= 1e-8;
    v.detail = "worst fitted-frequency rel err " + fmt(worst) + " (tol 1e-8)";
    EXPECT_LE(worst, 1e-8);
}

TEST(Acceptance, Criterion03_EnergyConservation) {
    Verdict v{3};
    double worst_rel = 0.0;
    auto zf = [](std::size_t, std::vector<double>& o) { std::fill(o.begin(), o.end(), 0.0); };
    auto run = [&](const SpectralField& f0, const SpectralField& f1, int L) {
        const EvolveParams p{1.0, 100.0, 10000, L};
        std::vector<double> al(static_cast<std::size_t>(L + 1) * (L + 1));
        for (int l = 0; l <= L; ++l)
            for (int m = -l; m <= l; ++m) al[SpectralField::index(l, m)] = third_order_symbol(l);
        double E0 = -1.0, drift = 0.0;
        evolve_scan(f0, f1, zf, p,
                    [&](std::size_t k, double, const std::vector<double>& f,
                        const std::vector<double>& fd, const std::vector<double>&,
                        const std::vector<double>&) {
                        double e = 0.0;
                        for (std::size_t i = 0; i < f.size(); ++i)
                            e += fd[i] * fd[i] + al[i] * f[i] * f[i];
                        e *= 0.5;
                        if (k == 0) E0 = e;
                        drift = std::max(drift, std::abs(e - E0));
                    });
        worst_rel = std::max(worst_rel, drift / std::max(E0, 1.0));
    };
    for (int l : {1, 8, 64}) run(basis_field(l, l, 0), SpectralField(l), l);  // single modes
    for (int i = 0; i < 3; ++i)
        run(random_field(RoughSpec{1.5, 1.1, 64, 600u + i}),
            random_field(RoughSpec{0.0, 1.1, 64, 650u + i}), 64);
    v.ok = worst_rel <= 1e-11;
    v.detail = "max |E-E0|/max(E0,1) over T=100: " + fmt(worst_rel) + " (tol 1e-11)";
    EXPECT_LE(worst_rel, 1e-11);
}

TEST(Acceptance, Criterion04_EdotIdentityOrder) {
    Verdict v{4};
    const double order = edot_identity_order(1.0, 5.0, 64, 77);
    v.ok = order >= 1.8 && order <= 2.2;
    v.detail = "centered-dE/dt vs pairing order " + fmt(order) + " (2.0 +/- 0.2)";
    EXPECT_NEAR(order, 2.0, 0.2);
}

TEST(Acceptance, Criterion05_PositivityLemma) {
    Verdict v{5};
    const int L = 32;
    const SphGrid grid = build_grid(L);
    double min_val = 0.0, worst_rel = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const SpectralField c =
            random_field(RoughSpec{0.0, 1.1, L, rng::counter_hash(55, 0xacce, i, 0)});
        const PositivityCheck pc = positivity_check(c, grid);
        min_val = std::min({min_val, pc.spectral, pc.quadrature});
        worst_rel = std::max(worst_rel,
                             std::abs(pc.spectral - pc.quadrature) / std::max(1.0, pc.spectral));
    }
    v.ok = min_val >= -1e-12 && worst_rel <= 1e-10;
    v.detail = "1000 fields at L=32: min " + fmt(min_val) + " (>= -1e-12), agreement " +
               fmt(worst_rel) + " (<= 1e-10)";
    EXPECT_GE(min_val, -1e-12);
    EXPECT_LE(worst_rel, 1e-10);
}

TEST(Acceptance, Criterion06_CoercivityConstant) {
    Verdict v{6};
    const CoercivityScan scan = coercivity_constants(10000);
    const double ref = 2.0 / std::pow(3.0, 1.5);
    double slack_min = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const SpectralField c =
            random_field(RoughSpec{0.0, 1.1, 32, rng::counter_hash(66, 0xacce, i, 0)});
        double quad_form = 0.0;
        for (int l = 0; l <= c.L; ++l)
            for (int m = -l; m <= l; ++m)
                quad_form += third_order_symbol(l) * c.at(l, m) * c.at(l, m);
        const double n32 = sobolev_norm(c, 1.5), n0 = sobolev_norm(c, 0.0);
        const double slack = quad_form - 0.384900 * (n32 * n32 - n0 * n0);
        slack_min = std::min(slack_min, slack / std::max(1.0, quad_form));
    }
    v.ok = std::abs(scan.c_lower - ref) <= 1e-8 && scan.attained_at == 1 && slack_min >= -1e-12;
    v.detail = "scan (l<=1e4): " + fmt(scan.c_lower) + " at l=" +
               std::to_string(scan.attained_at) + "; min inequality slack " + fmt(slack_min);
    EXPECT_NEAR(scan.c_lower, ref, 1e-8);
    EXPECT_EQ(scan.attained_at, 1);
    EXPECT_GE(slack_min, -1e-12);
}

TEST(Acceptance, Criterion07_ExponentialEnergyBound) {
    Verdict v{7};
    const int L = 16, n = 500;
    int fails = 0;
    double et2_rate_sum = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        DataTriple d = zero_data(L, 5.0);
        d.f0 = random_field(RoughSpec{1.5, 1.1, L, rng::counter_hash(70, 1, trial, 0)});
        d.f1 = random_field(RoughSpec{0.0, 1.1, L, rng::counter_hash(70, 2, trial, 0)});
        d.G = random_forcing(RoughSpec{0.0, 1.1, L, rng::counter_hash(70, 3, trial, 0)}, n, 5.0);
        const Trajectory tr = solve(d, EvolveParams{1.0, 5.0, n, L});
        const ExpBoundReport rep = exponential_bound_report(tr);
        if (!rep.asserted_holds) ++fails;
        et2_rate_sum += rep.et2_pass_rate;
    }
    v.ok = fails == 0;
    v.detail = "100 forced runs (kappa=1, T=5): e^t bound failures " + std::to_string(fails) +
               "; e^{t/2} variant empirical pass rate " + fmt(et2_rate_sum / 100.0) +
               " (reported, not asserted)";
    EXPECT_EQ(fails, 0);
}

TEST(Acceptance, Criterion08_ContinuityUniformInTruncation) {
    Verdict v{8};
    std::vector<double> est;
    for (int L : {16, 32, 64})
        est.push_back(continuity_constant(EvolveParams{1.0, 1.0, 2000, L}, 50, 88));
    const double lo = std::min({est[0], est[1], est[2]});
    const double hi = std::max({est[0], est[1], est[2]});
    v.ok = hi <= 1.2 * lo;
    v.detail = "estimates L={16,32,64}: " + fmt(est[0]) + ", " + fmt(est[1]) + ", " + fmt(est[2]) +
               "; spread " + fmt(hi / lo) + " (<= 1.2)";
    EXPECT_LE(hi, 1.2 * lo);
}

TEST(Acceptance, Criterion09_DensityCauchyExperiment) {
    Verdict v{9};
    const int L = 64;
    DataTriple d = zero_data(L, 1.0);
    d.f0 = random_field(RoughSpec{1.5, 1.1, L, rng::counter_hash(42, 0xf0, 0, 0)});
    d.f1 = random_field(RoughSpec{0.0, 1.1, L, rng::counter_hash(42, 0xf1, 0, 0)});
    d.G = random_forcing(RoughSpec{0.0, 1.1, L, rng::counter_hash(42, 0x60, 0, 0)}, 512, 1.0);
    const EvolveParams p{1.0, 1.0, 512, L};
    const auto rows = density_study(d, {8, 16, 32, 64}, p);
    const double c_cont = continuity_constant(p, 50, 42);

    bool monotone = true, bounded = true;
    double prev = 1e300;
    std::string series;
    for (const auto& r : rows) {
        if (r.x32_diff > c_cont * r.h_diff * 1.1 + 1e-14) bounded = false;
        if (r.L_hi == 2 * r.L_lo) {
            if (r.x32_diff >= prev) monotone = false;
            prev = r.x32_diff;
            series += (series.empty() ? "" : " > ") + fmt(r.x32_diff);
        }
    }
    v.ok = monotone && bounded;
    v.detail = "Cauchy diffs " + series + (monotone ? " (monotone)" : " (NOT monotone)") +
               "; all ratios <= continuity constant " + fmt(c_cont) + " * 1.1: " +
               (bounded ? "yes" : "no");
    EXPECT_TRUE(monotone);
    EXPECT_TRUE(bounded);
}

TEST(Acceptance, Criterion10_RoundTripLofLinverse) {
    Verdict v{10};
    const int L = 24, n = 64;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        DataTriple d = zero_data(L, 1.0);
        d.f0 = random_field(RoughSpec{1.5, 1.1, L, rng::counter_hash(100, 1, trial, 0)});
        d.f1 = random_field(RoughSpec{0.0, 1.1, L, rng::counter_hash(100, 2, trial, 0)});
        d.G = random_forcing(RoughSpec{0.0, 1.1, L, rng::counter_hash(100, 3, trial, 0)}, n, 1.0);
        const DataTriple back = apply_L(solve(d, EvolveParams{1.0, 1.0, n, L}));
        worst = std::max(worst, max_abs_diff(back.f0, d.f0));
        worst = std::max(worst, max_abs_diff(back.f1, d.f1));
        for (std::size_t k = 0; k < d.G.size(); ++k)
            worst = std::max(worst, max_abs_diff(back.G[k], d.G[k]));
    }
    v.ok = worst <= 1e-10;
    v.detail = "100 random triples: max |apply_L(solve(d)) - d| = " + fmt(worst) + " (tol 1e-10)";
    EXPECT_LE(worst, 1e-10);
}

TEST(Acceptance, Criterion11_CrossValidation) {
    Verdict v{11};
    // Stoermer-Verlet converges to the exact propagator at order 2.
    const SpectralField z(1);
    const double om = mode_frequency(1, 1.0);
    std::vector<double> hs, errs;
    for (int n : {64, 128, 256, 512}) {
        BoundaryState s;
        s.f = basis_field(1, 1, 0);
        s.fdot = SpectralField(1);
        const double h = 1.0 / n;
        for (int k = 0; k < n; ++k) s = step_verlet(s, z, z, h, 1.0);
        hs.push_back(h);
        errs.push_back(std::hypot(s.f.at(1, 0) - std::cos(om), s.fdot.at(1, 0) + om * std::sin(om)));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < hs.size(); ++i) {
        const double xx = std::log(hs[i]), yy = std::log(errs[i]);
        sx += xx;
        sy += yy;
        sxx += xx * xx;
        sxy += xx * yy;
    }
    const double nn = static_cast<double>(hs.size());
    const double order = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);

    // Uniform-in-omega exactness of step_exact for linear forcing.
    double worst_step = 0.0;
    for (double theta : {1e-6, 1.0, 1e3}) {
        const double h = theta / om;
        const PropagatorCoeffs pc = propagator_coeffs(om, h);
        double x = 0.3, vv = -0.7;
        oscillator_step(pc, x, vv, 0.25, -1.1);
        // reference in long double with the A/B (amplitude) algebra
        const long double lom = om, lh = h;
        const long double lth = lom * lh;
        const long double c = cosl(lth), s = sinl(lth);
        long double xr, vr;
        if (lth >= 0.5L) {
            const long double A = 0.3L - 0.25L / (lom * lom);
            const long double B = (-0.7L - (-1.1L - 0.25L) / (lh * lom * lom)) / lom;
            xr = A * c + B * s + (-1.1L) / (lom * lom);
            vr = -A * lom * s + B * lom * c + (-1.1L - 0.25L) / (lh * lom * lom);
        } else {
            const long double t2 = lth * lth;
            const long double sinc = 1.0L - t2 / 6.0L + t2 * t2 / 120.0L - t2 * t2 * t2 / 5040.0L;
            const long double c1 = 0.5L - t2 / 24.0L + t2 * t2 / 720.0L - t2 * t2 * t2 / 40320.0L;
            const long double c2 =
                1.0L / 6.0L - t2 / 120.0L + t2 * t2 / 5040.0L - t2 * t2 * t2 / 362880.0L;
            xr = c * 0.3L + lh * sinc * (-0.7L) + lh * lh * (c1 * 0.25L + c2 * (-1.35L));
            vr = -lom * s * 0.3L + c * (-0.7L) + lh * (sinc * 0.25L + c1 * (-1.35L));
        }
        worst_step = std::max(worst_step,
                              static_cast<double>(std::max(std::abs(x - xr), std::abs(vv - vr))));
    }
    v.ok = std::abs(order - 2.0) <= 0.1 && worst_step <= 1e-12;
    v.detail = "Verlet order " + fmt(order) + " (2.0 +/- 0.1); step_exact error at omega*h in {1e-6,1,1e3}: " +
               fmt(worst_step) + " (<= 1e-12)";
    EXPECT_NEAR(order, 2.0, 0.1);
    EXPECT_LE(worst_step, 1e-12);
}

TEST(Acceptance, Criterion12_BallIdentities) {
    Verdict v{12};
    const BallNorms bn = ball_norms(basis_field(1, 1, 0));
    const double l2_err = std::abs(bn.l2 * bn.l2 - 0.2);
    const double dir_err = std::abs(bn.dirichlet - 1.0);

    // Monte-Carlo oracle: uniform points in the ball, L2 by direct sampling
    // of u = r Y_{1,0}, Dirichlet integral by central finite differences of
    // the harmonic extension in Cartesian coordinates.
    const SpectralField c = basis_field(1, 1, 0);
    auto eval = [&](double X, double Y, double Z) {
        const double r = std::sqrt(X * X + Y * Y + Z * Z);
        const double colat = r > 0 ? std::acos(std::clamp(Z / r, -1.0, 1.0)) : 0.0;
        const double lon = std::atan2(Y, X);
        return extend_harmonic(c, {r, colat, lon < 0 ? lon + 2 * std::numbers::pi : lon});
    };
    const int n_mc = 40000;
    const double eps = 1e-5;
    double mc_l2 = 0.0, mc_dir = 0.0;
    int kept = 0;
    for (int i = 0; i < n_mc; ++i) {
        const double X = 2.0 * rng::to_unit_open(rng::counter_hash(12, 1, i, 0)) - 1.0;
        const double Y = 2.0 * rng::to_unit_open(rng::counter_hash(12, 2, i, 0)) - 1.0;
        const double Z = 2.0 * rng::to_unit_open(rng::counter_hash(12, 3, i, 0)) - 1.0;
        if (X * X + Y * Y + Z * Z > (1.0 - 2 * eps) * (1.0 - 2 * eps)) continue;
        ++kept;
        const double u = eval(X, Y, Z);
        mc_l2 += u * u;
        const double gx = (eval(X + eps, Y, Z) - eval(X - eps, Y, Z)) / (2 * eps);
        const double gy = (eval(X, Y + eps, Z) - eval(X, Y - eps, Z)) / (2 * eps);
        const double gz = (eval(X, Y, Z + eps) - eval(X, Y, Z - eps)) / (2 * eps);
        mc_dir += gx * gx + gy * gy + gz * gz;
    }
    // sample volume is the shrunken ball; scale to it
    const double vol = 4.0 / 3.0 * std::numbers::pi * std::pow(1.0 - 2 * eps, 3);
    mc_l2 *= vol / kept;
    mc_dir *= vol / kept;

    const bool mc_ok = std::abs(mc_l2 - 0.2) < 0.02 && std::abs(mc_dir - 1.0) < 0.02;
    v.ok = l2_err <= 1e-10 && dir_err <= 1e-10 && mc_ok;
    v.detail = "closed form: |L2^2-1/5| = " + fmt(l2_err) + ", |Dirichlet-1| = " + fmt(dir_err) +
               " (tol 1e-10); MC oracle: L2^2 " + fmt(mc_l2) + ", Dirichlet " + fmt(mc_dir);
    EXPECT_LE(l2_err, 1e-10);
    EXPECT_LE(dir_err, 1e-10);
    EXPECT_TRUE(mc_ok);
}
