#include <gtest/gtest.h>

#include "dslab/mode_scattering.hpp"
#include "dslab/pde.hpp"

using namespace dslab;

namespace {

Eigen::Matrix2cd lambda_zero_oracle() {
    // basis {1, arctan t} of the k = 0 equation
    Eigen::Matrix2cd m;
    m << -1.0, 0.0, pi, 1.0;
    return m;
}

}  // namespace

TEST(ModeScattering, LambdaZeroModeZero) {
    const auto c = connection_matrix(0, compute_spectral(2, 0.0));
    EXPECT_LT((c.matrix - lambda_zero_oracle()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(ModeScattering, ReverseInvertsForward) {
    for (Real lambda : {0.0, 3.0 / 16, 0.25, 1.0}) {
        const auto p = compute_spectral(2, lambda);
        for (int k : {0, 1, 8}) {
            const auto a = connection_matrix(k, p);
            const auto b = reverse_connection_matrix(k, p);
            EXPECT_LT((b.matrix * a.matrix - Eigen::Matrix2cd::Identity()).norm(), 1e-8) << lambda << " " << k;
        }
    }
}

TEST(ModeScattering, DeterminantMinusOne) {
    for (int n : {2, 3, 4})
        for (Real lambda : {3.0 / 16, 0.5}) {
            const auto c = connection_matrix(3, compute_spectral(n, lambda));
            EXPECT_NEAR(std::abs(c.matrix.determinant() + 1.0), 0.0, 1e-8) << n << " " << lambda;
        }
}

TEST(ModeScattering, ToleranceStable) {
    const auto p = compute_spectral(2, 3.0 / 16);
    ConnectionOptions tight;
    tight.ode.rtol = 1e-14;
    tight.ode.atol = 1e-16;
    EXPECT_LT((connection_matrix(5, p, tight).matrix - connection_matrix(5, p).matrix).norm(), 1e-9);
}

TEST(ModeScattering, RenormalizedBlocksStayOrderZero) {
    const auto p = compute_spectral(2, 3.0 / 16);
    const auto sm = assemble_scattering(32, p);
    const auto [spread, rel] = sm.renormalized_spread(1, 32);
    EXPECT_LE(spread, 10.0);
    EXPECT_GE(rel, 1e-3);
    // raw off-diagonal entry decays like k^{-(s_+ - s_-)}
    const Real g8 = std::abs(sm.blocks.at(8).matrix(1, 0)), g32 = std::abs(sm.blocks.at(32).matrix(1, 0));
    EXPECT_NEAR(std::log(g32 / g8) / std::log(4.0), -(p.s_plus - p.s_minus).real(), 0.1);
}

TEST(ModeScattering, ModeEquationNeedsDeSitter) {
    EXPECT_THROW(mode_equation(1, compute_spectral(2, 0.0), MetricModel::normal_form(2)), InvalidArgument);
}

// ---------------------------------------------------------------------------
// PDE
// ---------------------------------------------------------------------------

TEST(Pde, ConstantStaysConstant) {
    const auto p = compute_spectral(2, 0.0);
    GridSpec g;
    g.M = 32;
    const auto f = evolve_cauchy([](Real) { return Complex(1); }, [](Real) { return Complex(0); }, 0.0,
                                 MetricModel::de_sitter(2), p, g);
    EXPECT_LT((f.u.array() - 1.0).abs().maxCoeff(), 1e-12);
}

TEST(Pde, ReproducesArctanSolution) {
    // u = tau solves the k = 0, lambda = 0 equation in the tau chart
    const auto p = compute_spectral(2, 0.0);
    GridSpec g;
    g.M = 32;
    const auto f = evolve_cauchy([](Real) { return Complex(0); }, [](Real) { return Complex(1); }, 0.0,
                                 MetricModel::de_sitter(2), p, g);
    Real err = 0.0;
    for (std::size_t i = 0; i < f.tau.size(); ++i) err = std::max(err, std::abs(f.u(i, 0) - f.tau[i]));
    EXPECT_LT(err, 1e-10);
    const auto fit = fit_asymptotics(f, Side::Plus, p, 0);
    EXPECT_NEAR(std::abs(fit.g_plus + 1.0), 0.0, 1e-6);
    EXPECT_NEAR(std::abs(fit.g_minus - pi / 2), 0.0, 1e-6);
}

TEST(Pde, CauchyAgreesWithConnectionAndConverges) {
    const auto p = compute_spectral(2, 3.0 / 16);
    const auto dS = MetricModel::de_sitter(2);
    std::vector<Real> errs;
    for (int M : {128, 256}) {
        CauchyOptions co;
        co.grid.M = M;
        const auto a = scattering_via_cauchy({{{2, 0}, 1.0, 0.0}, {{5, 0}, 1.0, 0.0}}, p, dS, co);
        Real worst = 0.0;
        for (const auto& m : a.modes) {
            const auto c = connection_matrix(m.mode, p).matrix;
            worst = std::max({worst, std::abs(m.v_plus - c(0, 0)), std::abs(m.v_minus - c(1, 0))});
        }
        EXPECT_LT(a.leakage, 1e-10);
        errs.push_back(worst);
    }
    EXPECT_LT(errs[1], 1e-3);
    EXPECT_GT(errs[0] / errs[1], 3.0);
}

TEST(Pde, LogFlagOnlyAtThreshold) {
    auto psi0 = [](Real th) { return Complex(1.0 + 0.3 * std::cos(th)); };
    auto psi1 = [](Real th) { return Complex(0.5 + 0.2 * std::sin(th)); };
    const auto dS = MetricModel::de_sitter(2);
    const auto pt = compute_spectral(2, 0.25);
    const auto fit_t = fit_asymptotics(evolve_cauchy(psi0, psi1, 0.0, dS, pt), Side::Plus, pt, 0);
    EXPECT_TRUE(fit_t.log_flag);
    EXPECT_GE(fit_t.residual_pure, 10.0 * fit_t.residual_log);
    const auto pn = compute_spectral(2, 3.0 / 16);
    const auto fit_n = fit_asymptotics(evolve_cauchy(psi0, psi1, 0.0, dS, pn), Side::Plus, pn, 0);
    EXPECT_FALSE(fit_n.log_flag);
    // free exponents land on the indicial roots
    EXPECT_NEAR(fit_n.exp_plus_fit, 0.75, 0.05);
    EXPECT_NEAR(fit_n.exp_minus_fit, 0.25, 0.05);
}

TEST(Pde, UniquenessExponent) {
    const auto p = compute_spectral(2, 0.0);
    const auto sw = uniqueness_sweep(2, {0.04, 0.02, 0.01, 0.005}, p);
    EXPECT_NEAR(sw.exponent, p.s_minus.real() + 2, 0.3);
    EXPECT_NEAR(sw.predicted, 2.0, 1e-12);
    // the same offsets leave a genuine solution at O(1)
    EXPECT_GT(sw.control, 0.1);
}

TEST(Pde, CflViolationDetected) {
    const auto p = compute_spectral(2, 0.0);
    GridSpec g;
    g.M = 32;
    g.cfl = 5.0;
    EXPECT_THROW(evolve_cauchy([](Real) { return Complex(1); }, [](Real) { return Complex(0); }, 0.0,
                               MetricModel::de_sitter(2), p, g),
                 CFLViolation);
}

TEST(Pde, PerturbedModelStaysClose) {
    const auto p = compute_spectral(2, 3.0 / 16);
    const auto pm = MetricModel::warped(2, 0.05, WarpProfile::OneMinusT2, true);
    const auto a = scattering_via_cauchy({{{1, 0}, 1.0, 0.0}}, p, pm, {});
    const auto c = connection_matrix(1, p).matrix;
    EXPECT_LT(std::abs(a.modes[0].v_plus - c(0, 0)), 0.2);
    EXPECT_LT(std::abs(a.modes[0].v_minus - c(1, 0)), 0.2);
}
