#include <gtest/gtest.h>

#include <boost/math/quadrature/sinh_sinh.hpp>

#include "dslab/geometry_flow.hpp"

using namespace dslab;

namespace {

Real wrap(Real a) { return std::remainder(a, 2.0 * pi); }

}  // namespace

TEST(Flow, DeltaThetaIsArctanIntegral) {
    boost::math::quadrature::sinh_sinh<Real> ss;
    const Real oracle = ss.integrate([](Real t) { return 1.0 / (1.0 + t * t); });
    const auto m = MetricModel::de_sitter(2);
    for (Real th : {0.0, 1.0, 4.0}) {
        const auto tr = integrate_bicharacteristic(PhasePoint{0.0, {th}, 1.0, {1.0}, Side::Plus}, m, 1);
        EXPECT_EQ(tr.end.side, Side::Minus);
        EXPECT_NEAR(std::abs(tr.delta_theta), oracle, 1e-8);
        EXPECT_LT(tr.max_drift, 1e-8);
    }
}

TEST(Flow, DeSitterMapIsAntipodalOnCircle) {
    const auto m = MetricModel::de_sitter(2);
    for (int i = 0; i < 16; ++i) {
        const Real th = 2.0 * pi * i / 16;
        for (Real eta : {1.0, -1.0}) {
            const auto q = classical_scattering_map({{th}, {eta}}, m);
            EXPECT_NEAR(wrap(q.y[0] - th - pi), 0.0, 1e-8);
            EXPECT_NEAR(q.eta_hat[0], eta, 1e-8);
        }
    }
}

TEST(Flow, DeSitterMapIsAntipodalOnSphere) {
    const auto m = MetricModel::de_sitter(3);
    const Real c = std::sqrt(0.5);
    const auto q = classical_scattering_map({{c, c, 0.0}, {0.0, 0.0, 1.0}}, m);
    EXPECT_NEAR(q.y[0], -c, 1e-8);
    EXPECT_NEAR(q.y[1], -c, 1e-8);
    EXPECT_NEAR(q.y[2], 0.0, 1e-8);
    // pushforward of eta under y -> -y
    EXPECT_NEAR(q.eta_hat[2], -1.0, 1e-8);
}

TEST(Flow, ReverseMapInvertsForward) {
    for (const auto& m : {MetricModel::de_sitter(2), MetricModel::warped(2, 0.1, WarpProfile::CosTau),
                          MetricModel::warped(2, 0.05, WarpProfile::OneMinusT2, true)}) {
        for (Real th : {0.3, 2.0, 5.5}) {
            const auto q = classical_scattering_map({{th}, {1.0}}, m);
            const auto b = reverse_scattering_map(q, m);
            EXPECT_NEAR(wrap(b.y[0] - th), 0.0, 1e-8) << to_string(m.family);
            EXPECT_NEAR(b.eta_hat[0], 1.0, 1e-8);
        }
    }
}

TEST(Flow, WarpedDeltaThetaMatchesQuadrature) {
    for (Real eps : {0.05, 0.1, -0.1}) {
        for (auto prof : {WarpProfile::CosTau, WarpProfile::OneMinusT2}) {
            const auto w = MetricModel::warped(2, eps, prof);
            const auto tr = integrate_bicharacteristic(PhasePoint{0.0, {0.3}, 1.0, {1.0}, Side::Plus}, w, 1);
            EXPECT_NEAR(-tr.delta_theta, delta_theta_quadrature(w), 1e-8) << eps;
        }
    }
}

TEST(Flow, HamiltonFieldAtBoundary) {
    // p = xi^2 - |eta|^2 at x = 0 on de Sitter: dx = 2 sign(xi), dy = -2 eta/|xi|
    const auto m = MetricModel::de_sitter(2);
    for (Real xi : {1.0, -2.0}) {
        const auto v = hamilton_field(PhasePoint{0.0, {0.7}, xi, {std::abs(xi)}, Side::Plus}, m);
        EXPECT_NEAR(v.dx, 2.0 * (xi > 0 ? 1 : -1), 1e-14);
        EXPECT_NEAR(v.dy[0], -2.0, 1e-14);
    }
}

TEST(Flow, CharacteristicResidualVanishesOnStart) {
    const auto m = MetricModel::de_sitter(2);
    EXPECT_NEAR(characteristic_residual(PhasePoint{0.0, {0.0}, 1.0, {1.0}, Side::Plus}, m), 0.0, 1e-15);
}

TEST(Flow, RejectsBadInput) {
    const auto m = MetricModel::de_sitter(2);
    EXPECT_THROW(hamilton_field(PhasePoint{0.0, {0.0}, 0.0, {1.0}, Side::Plus}, m), InvalidArgument);
    EXPECT_THROW(classical_scattering_map({{0.0}, {0.5}}, m), InvalidArgument);
    EXPECT_THROW(integrate_bicharacteristic(PhasePoint{0.0, {0.0}, 1.0, {1.0}, Side::Plus}, MetricModel::normal_form(2), 1),
                 InvalidArgument);
}
