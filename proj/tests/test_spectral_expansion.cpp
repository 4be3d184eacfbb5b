#include <gtest/gtest.h>

#include <random>

#include "dslab/formal_expansion.hpp"
#include "dslab/spectral.hpp"

using namespace dslab;

namespace {

// quadratic formula in long double, independent of compute_spectral
std::pair<std::complex<long double>, std::complex<long double>> roots_oracle(int n, long double lambda) {
    const long double b = n - 1;
    const std::complex<long double> disc = std::sqrt(std::complex<long double>(b * b - 4.0L * lambda));
    return {(b + disc) / 2.0L, (b - disc) / 2.0L};
}

}  // namespace

TEST(Spectral, DeSitterTwoLambdaZero) {
    const auto p = compute_spectral(2, 0.0);
    EXPECT_EQ(p.s_plus, Complex(1.0));
    EXPECT_EQ(p.s_minus, Complex(0.0));
    EXPECT_EQ(p.l_lambda, 0.5);
    EXPECT_EQ(p.regime, Regime::IntegerGap);
    EXPECT_EQ(p.s_hat_plus, Complex(0.0));
    EXPECT_EQ(p.s_hat_minus, Complex(-1.0));
}

TEST(Spectral, NonIntegerGapExample) {
    const auto p = compute_spectral(2, 3.0 / 16);
    EXPECT_DOUBLE_EQ(p.s_plus.real(), 0.75);
    EXPECT_DOUBLE_EQ(p.s_minus.real(), 0.25);
    EXPECT_EQ(p.regime, Regime::NonIntegerGap);
    EXPECT_NEAR(std::abs(symbol_ratio(p) - I), 0.0, 1e-15);
    EXPECT_TRUE(symbol_elliptic(p));
}

TEST(Spectral, ThresholdExactlyAtQuarterSquare) {
    for (int n = 2; n <= 6; ++n) {
        const Real lt = 0.25 * (n - 1) * (n - 1);
        EXPECT_EQ(compute_spectral(n, lt).regime, Regime::Threshold) << n;
        EXPECT_EQ(compute_spectral(n, lt + 1e-3).regime, Regime::ComplexRoots) << n;
        EXPECT_NE(compute_spectral(n, lt - 1e-3).regime, Regime::Threshold) << n;
    }
}

TEST(Spectral, RootsMatchQuadraticFormula) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<Real> U(-3.0, 5.0);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 2 + trial % 4;
        const Real lambda = U(rng);
        const auto p = compute_spectral(n, lambda);
        const auto [sp, sm] = roots_oracle(n, lambda);
        EXPECT_NEAR(p.s_plus.real(), double(sp.real()), 1e-12);
        EXPECT_NEAR(p.s_plus.imag(), double(sp.imag()), 1e-12);
        EXPECT_NEAR(p.s_minus.real(), double(sm.real()), 1e-12);
        EXPECT_NEAR(p.s_minus.imag(), double(sm.imag()), 1e-12);
        // Vieta
        EXPECT_NEAR(std::abs(p.s_plus + p.s_minus - Real(n - 1)), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(p.s_plus * p.s_minus - lambda), 0.0, 1e-12);
        EXPECT_GE(p.s_plus.real(), p.s_minus.real());
    }
}

TEST(Spectral, GapParityDecidesEllipticity) {
    EXPECT_TRUE(symbol_elliptic(compute_spectral(2, 0.0)));   // gap 1
    EXPECT_FALSE(symbol_elliptic(compute_spectral(3, 0.0)));  // gap 2
    EXPECT_NEAR(std::abs(symbol_ratio(compute_spectral(3, 0.0)) - 1.0), 0.0, 1e-14);
    EXPECT_FALSE(symbol_elliptic(compute_spectral(5, 0.0)));  // gap 4
}

TEST(Spectral, TinyLambdaKeepsSmallRootAccurate) {
    const auto p = compute_spectral(4, 1e-14);
    EXPECT_NEAR(p.s_minus.real() / (1e-14 / 3.0), 1.0, 1e-10);
}

TEST(Spectral, RejectsLowDimension) { EXPECT_THROW(compute_spectral(1, 0.0), InvalidArgument); }

TEST(Spectral, JsonShape) {
    const auto j = to_json(compute_spectral(2, 0.0));
    EXPECT_EQ(j["regime"], "IntegerGap");
    EXPECT_EQ(j["s_plus"], 1.0);
    const auto jc = to_json(compute_spectral(2, 1.0));
    EXPECT_TRUE(jc["s_plus"].is_object());
}

// ---------------------------------------------------------------------------
// Formal expansion
// ---------------------------------------------------------------------------

// On the normal form the recursion has two terms: a_j I(s + j) = mu a_{j-2}.
TEST(Expansion, NormalFormMatchesTwoTermRecursion) {
    for (Real lambda : {3.0 / 16, 0.0, -2.0}) {
        for (long mu : {1L, 4L, 9L}) {
            const auto p = compute_spectral(2, lambda);
            ASSERT_TRUE(p.exact_roots);
            const auto frame = exact_branch_frame(Branch::Plus, mu, p, MetricModel::normal_form(2), 8);
            ASSERT_TRUE(frame);
            const Rational s = p.exact_roots->first;
            const Rational lam = to_rational(lambda);
            Rational prev = 1, cur;
            EXPECT_EQ((*frame)[0][0], Rational(1));
            for (int j = 2; j <= 8; j += 2) {
                const Rational sj = s + j;
                const Rational I_s = sj * (Rational(1) - sj) - lam;
                cur = Rational(mu) * prev / I_s;
                EXPECT_EQ((*frame)[j][0], cur) << "lambda " << lambda << " mu " << mu << " j " << j;
                EXPECT_EQ((*frame)[j - 1][0], Rational(0));
                prev = cur;
            }
        }
    }
}

TEST(Expansion, MinusBranchSecondCoefficient) {
    const auto p = compute_spectral(2, 3.0 / 16);
    const auto nf = exact_branch_frame(Branch::Minus, 1, p, MetricModel::normal_form(2), 4);
    ASSERT_TRUE(nf);
    EXPECT_EQ((*nf)[2][0], Rational(-1, 3));
    EXPECT_EQ((*nf)[4][0], Rational(1, 42));
}

TEST(Expansion, ResidualSlopeTracksOrder) {
    const auto p = compute_spectral(2, 3.0 / 16);
    // frames are stored in double; past N = 4 the residual at x = 1e-3 sits on
    // their rounding floor (~1e-23)
    for (int N : {2, 3, 4}) {
        const auto s = build_series({{{1, 0}, 0.0, 1.0}}, p, MetricModel::normal_form(2), N);
        const auto r = series_residual(s, 1e-3, 1e-1);
        EXPECT_GE(r.slope, p.s_minus.real() + N + 1 - 0.1) << N;
        EXPECT_TRUE(r.certified);
    }
}

TEST(Expansion, WarpedModelsCertifyToo) {
    const auto p = compute_spectral(2, 3.0 / 16);
    const auto w = MetricModel::warped(2, 0.1, WarpProfile::CosTau);
    const auto s = build_series({{{1, 0}, 1.0, 1.0}}, p, w, 4);
    EXPECT_TRUE(series_residual(s, 1e-3, 1e-1).certified);
}

TEST(Expansion, ConstantIsExactOnDeSitter) {
    const auto p = compute_spectral(2, 0.0);
    const auto s = build_series({{{0, 0}, 0.0, 1.0}}, p, MetricModel::de_sitter(2), 4);
    EXPECT_EQ(series_residual(s, 1e-3, 1e-1).status, ResidualStatus::Exact);
}

TEST(Expansion, ThresholdCarriesLogs) {
    const auto p = compute_spectral(2, 0.25);
    const auto minus = exact_branch_frame(Branch::Minus, 1, p, MetricModel::de_sitter(2), 4);
    ASSERT_TRUE(minus);
    ASSERT_GE((*minus)[0].size(), 2u);
    EXPECT_EQ((*minus)[0][1], Rational(1));  // x^{1/2} log x leads
    const auto s = build_series({{{0, 0}, 1.0, 1.0}}, p, MetricModel::de_sitter(2), 4);
    EXPECT_TRUE(series_residual(s, 1e-3, 1e-1).certified);
}

TEST(Expansion, IntegerGapResonanceStillSolves) {
    const auto p = compute_spectral(2, 0.0);
    const auto s = build_series({{{1, 0}, 1.0, 1.0}}, p, MetricModel::warped(2, 0.1, WarpProfile::CosTau), 4);
    const auto r = series_residual(s, 1e-3, 1e-1);
    EXPECT_TRUE(r.certified) << r.slope;
}

TEST(Expansion, NumericFrameAgreesWithExact) {
    const auto p = compute_spectral(2, 3.0 / 16);
    const auto m = MetricModel::de_sitter(2);
    const auto ex = exact_branch_frame(Branch::Plus, 4, p, m, 10);
    const auto nu = numeric_branch_frame(Branch::Plus, 4, p, m, 10);
    ASSERT_TRUE(ex);
    for (std::size_t j = 0; j < ex->size(); ++j)
        for (std::size_t k = 0; k < (*ex)[j].size(); ++k)
            EXPECT_NEAR(std::abs(nu[j][k] - to_double((*ex)[j][k])), 0.0, 1e-12 * (1 + std::abs(nu[j][k])));
}
