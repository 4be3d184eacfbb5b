#include <gtest/gtest.h>

#include <random>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include "dslab/poisson.hpp"
#include "dslab/psigma.hpp"

using namespace dslab;

// ---------------------------------------------------------------------------
// P_sigma
// ---------------------------------------------------------------------------

TEST(PSigma, ConstantsPickUpIndicialValue) {
    // P_sigma 1 = sigma (n - 1 - sigma) - lambda
    const auto p = compute_spectral(3, 0.1);
    const auto f = sample_ball(64, 1e-2, 0, [](Real) { return 1.0; });
    const auto g = apply_psigma(0.7, f, p);
    for (const auto& v : g.values) EXPECT_NEAR(std::abs(v - (0.7 * 1.3 - 0.1)), 0.0, 1e-10);
}

TEST(PSigma, IntertwiningExactAndFloat) {
    for (int n : {2, 3, 4}) {
        const auto p = compute_spectral(n, 3.0 / 16);
        for (bool second : {false, true}) {
            const auto e = check_intertwining(Complex(0.625), 4, p, second);
            EXPECT_TRUE(e.exact);
            EXPECT_EQ(e.residual, 0.0) << n;
            EXPECT_GT(e.cases, 0);
            const auto f = check_intertwining(Complex(0.3, -0.8), 4, p, second, false);
            EXPECT_LT(f.residual, 1e-13 * std::max(1.0, f.scale)) << n;
        }
    }
}

TEST(PSigma, ConjugationConvergesFourthOrder) {
    const auto p = compute_spectral(2, 3.0 / 16);
    const auto bt = bump_test(0.3, 0.55);
    std::vector<Real> r;
    for (int N : {128, 256, 512}) r.push_back(check_conjugation(0.7, -0.4, sample_ball(N, 1e-2, 0, bt.u), p));
    EXPECT_GE(std::log2(r[0] / r[1]), 3.5);
    EXPECT_GE(std::log2(r[1] / r[2]), 3.5);
}

TEST(PSigma, ConjugationWithEqualExponentsAt1024) {
    const auto p = compute_spectral(2, 3.0 / 16);
    const auto f = sample_ball(1024, 1e-2, 0, bump_test(0.0, 0.8).u);
    EXPECT_LT(check_conjugation(0.5, 0.5, f, p), 1e-8);
    EXPECT_EQ(check_conjugation(0.0, 0.5, f, p), 0.0);
}

TEST(PSigma, NullVector) {
    for (int n : {2, 3, 4})
        for (Real lambda : {0.0, 3.0 / 16, 0.1}) {
            const auto nv = null_vector_residual(compute_spectral(n, lambda), 1024, 0.99);
            EXPECT_LT(nv.residual, 1e-10) << n << " " << lambda;
        }
}

TEST(PSigma, QuadraticFormPositiveAndMatchesEnergyForm) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<Real> U(0.0, 1.0);
    for (int n : {2, 3}) {
        const auto p = compute_spectral(n, 3.0 / 16);
        for (int i = 0; i < 20; ++i) {
            const Real sigma = p.s_hat_plus.real() + 0.05 + 2.0 * U(rng);
            const Real c = 0.6 * U(rng);
            const auto t = bump_test(c, 0.05 + (0.92 - c) * U(rng), 0, U(rng) - 0.5);
            const Real q = quadratic_form(sigma, t, p);
            EXPECT_GT(q, 0.0);
            EXPECT_NEAR(q, energy_form(sigma, t, p), 1e-8 * std::abs(q));
        }
    }
}

TEST(PSigma, QuadraticFormOnConstant) {
    // <1, -P_sigma 1> = -(sigma (n-1-sigma) - lambda) ||1||^2
    const auto p = compute_spectral(2, 0.1);
    RadialTest one{0, [](Real) { return 1.0; }, [](Real) { return 0.0; }, [](Real) { return 0.0; }};
    const Real norm = weighted_norm2(0.5, one, p);
    EXPECT_NEAR(quadratic_form(0.5, one, p), -(0.25 - 0.1) * norm, 1e-8 * norm);
}

TEST(PSigma, CoarseGridRejected) {
    const auto p = compute_spectral(2, 0.0);
    EXPECT_THROW(apply_psigma(0.5, make_ball_grid(16), p), GridTooCoarse);
}

// ---------------------------------------------------------------------------
// Poisson kernel
// ---------------------------------------------------------------------------

TEST(Poisson, PairingMatchesBallQuadrature) {
    boost::math::quadrature::tanh_sinh<Real> ts;
    for (int n : {2, 3, 4}) {
        const int d = n - 1;
        const Real area = d == 1 ? 2.0 : d == 2 ? 2.0 * pi : 4.0 * pi;
        for (Real s : {0.0, 0.5, 1.0, 1.5, 2.5}) {
            const Real q = area * ts.integrate([&](Real r) { return std::pow(r, d - 1) * std::pow(1 - r * r, s); }, 0.0, 1.0);
            EXPECT_NEAR(pairing_constant(s, n).real(), q, 1e-10 * q) << n << " " << s;
        }
    }
}

TEST(Poisson, ExactLowDimensionalValues) {
    EXPECT_EQ(pairing_constant(0.0, 2).real(), 2.0);
    EXPECT_NEAR(pairing_constant(0.0, 3).real(), pi, 1e-15);
    EXPECT_NEAR(pairing_constant(1.0, 2).real(), 4.0 / 3.0, 1e-15);
}

TEST(Poisson, ZeroPairingInExcludedSet) {
    EXPECT_THROW(pairing_constant(-1.5, 2), ZeroPairing);
    EXPECT_THROW(pairing_constant(-2.0, 3), ZeroPairing);
    EXPECT_NO_THROW(pairing_constant(-1.0, 2));
}

// Oracle: for a plane wave the normalized ball average is
// Gamma(nu+1) (2/z)^nu J_nu(z), nu = s + (n-1)/2.
TEST(Poisson, PlaneWaveMatchesBesselSymbol) {
    const struct {
        int n;
        Real s;
    } cases[] = {{2, 0.3}, {2, -0.75}, {3, 0.5}, {3, -1.3}, {4, 1.0}, {2, -2.0}};
    for (const auto& c : cases) {
        const auto k = make_kernel(c.s, c.n);
        const int d = c.n - 1;
        std::vector<Real> xi(d, 0.0);
        xi[0] = 3.0;
        BandLimited g;
        g.dim = d;
        g.waves = {{xi, 1.0}};
        const std::vector<Real> y(d, 0.2);
        for (Real x : {0.01, 0.5, 2.0}) {
            const Real z = 3.0 * x;
            const Real nu = c.s + 0.5 * d;
            const Real oracle = std::tgamma(nu + 1) * std::pow(2.0 / z, nu) * boost::math::cyl_bessel_j(nu, z);
            EXPECT_NEAR(std::abs(leading_coefficient(k, g, x, y) - g(y) * oracle), 0.0, 1e-10)
                << c.n << " " << c.s << " " << x;
        }
    }
}

TEST(Poisson, RecoversCosineAtSmallX) {
    const auto p = compute_spectral(2, 3.0 / 16);
    const auto g = BandLimited::cosine({1.0});
    for (auto br : {Branch::Plus, Branch::Minus}) {
        const auto k = make_kernel(p, br);
        for (Real y : {0.0, 0.7, 2.0}) {
            EXPECT_LT(std::abs(leading_coefficient(k, g, 1e-2, {y}) - std::cos(y)), 1e-4);
            EXPECT_LT(std::abs(leading_coefficient_richardson(k, g, 1e-2, {y}) - std::cos(y)), 1e-8);
        }
    }
}

TEST(Poisson, DeltaBranchAtNegativeIntegers) {
    const auto k = make_kernel(-1.0, 2);
    EXPECT_EQ(k.branch, KernelBranch::DeltaDerivative);
    EXPECT_THROW(kernel_value(k, 0.5, {0.1}), InvalidArgument);
    EXPECT_EQ(make_kernel(0.5, 2).branch, KernelBranch::PowerLaw);
}

TEST(Poisson, KernelSupportIsTheBall) {
    const auto k = make_kernel(0.5, 2);
    EXPECT_EQ(kernel_value(k, 0.5, {0.6}), Complex(0.0));
    EXPECT_GT(std::abs(kernel_value(k, 0.5, {0.1})), 0.0);
}
