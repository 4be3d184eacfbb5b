#pragma once

// Scattering matrix of exact de Sitter, g = sec^2 tau (d tau^2 - d omega^2),
// by separation of variables. On a boundary mode with eigenvalue mu the
// equation P u = 0 becomes
//   f'' + (n-2) tan(tau) f' + (mu + lambda sec^2 tau) f = 0,  |tau| < pi/2,
// equivalently [(1+t^2)^{n/2} f_t]_t (1+t^2)^{-(n-2)/2} + mu f/(1+t^2) + lambda f = 0
// with t = tan tau. Near tau = +-pi/2 the boundary defining function is
// x = cot|tau| and solutions behave like x^{s_+-}.

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "dslab/core.hpp"
#include "dslab/fit.hpp"
#include "dslab/formal_expansion.hpp"
#include "dslab/metric.hpp"
#include "dslab/ode.hpp"
#include "dslab/spectral.hpp"

namespace dslab {

/// Coefficients of f'' = -p(tau) f' - q(tau) f.
struct ModeEquation {
    int n = 2;
    long mu = 0;
    Real lambda = 0.0;

    Real p(Real tau) const { return (n - 2) * std::tan(tau); }
    Real q(Real tau) const {
        const Real c = std::cos(tau);
        return Real(mu) + lambda / (c * c);
    }
};

inline ModeEquation mode_equation(int k, const SpectralParams& p, const MetricModel& model = MetricModel::de_sitter(2)) {
    require(model.family == MetricFamily::ExactDeSitter, "mode_equation: separation needs the exact de Sitter model");
    require(model.n == p.n, "mode_equation: model and spectral dimension differ");
    return ModeEquation{p.n, mode_eigenvalue(p.n, k), p.lambda};
}

struct ConnectionOptions {
    int frame_order = 48;
    Real frame_tol = 1e-10;  // first dropped term, relative
    Real x_min = 0.02;       // smallest admissible matching x
    OdeOptions ode{1e-12, 1e-14};
};

struct ModeConnection {
    int k = 0;
    long mu = 0;
    Eigen::Matrix2cd matrix;  // columns: images of (g+, g-) = e1, e2; rows: (v+, v-) at the far end
    Real condition = 0.0;     // scaled frame matrix at the far end
    Real frame_error = 0.0;   // truncation estimate at the matching point
    Real x_match = 0.0;
    bool experimental = false;  // integer gap (log ansatz)
};

namespace detail {

struct ModeFrames {
    CoeffTable<Complex> plus, minus;
    Real x_match = 0.0;
    Real error = 0.0;
};

inline Real frame_tail(const CoeffTable<Complex>& c, Real x) {
    const Real L = std::abs(std::log(x));
    auto term = [&](std::size_t j) {
        Real m = 0.0;
        for (std::size_t k = 0; k < c[j].size(); ++k) m += std::abs(c[j][k]) * std::pow(L, Real(k));
        return m * std::pow(x, Real(j));
    };
    Real lead = 0.0, tail = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) lead = std::max(lead, term(j));
    // last two orders (odd ones vanish on this model)
    for (std::size_t j = c.size() >= 2 ? c.size() - 2 : 0; j < c.size(); ++j) tail = std::max(tail, term(j));
    return lead > 0.0 ? tail / lead : 0.0;
}

inline ModeFrames mode_frames(long mu, const SpectralParams& p, const ConnectionOptions& opt) {
    const auto model = MetricModel::de_sitter(p.n);
    ModeFrames f;
    f.plus = numeric_branch_frame(Branch::Plus, mu, p, model, opt.frame_order);
    f.minus = numeric_branch_frame(Branch::Minus, mu, p, model, opt.frame_order);
    Real x = 0.5;
    for (; x >= opt.x_min; x *= 0.85) {
        f.error = std::max(frame_tail(f.plus, x), frame_tail(f.minus, x));
        if (f.error < opt.frame_tol) break;
    }
    if (!(f.error < opt.frame_tol))
        throw FrameFitFailure("connection_matrix: asymptotic frame error " + std::to_string(f.error) +
                              " above tolerance at x = " + std::to_string(opt.x_min) + " (mu = " + std::to_string(mu) +
                              ")");
    f.x_match = x;
    return f;
}

// (f, f_tau) of a frame at x on the given side (tau = side * atan(1/x)).
inline OdeVec<Complex> frame_state(const CoeffTable<Complex>& c, Complex s, Real x, int side) {
    Complex u = 0.0, du = 0.0, d2u = 0.0;
    eval_table(c, Complex(1.0), s, x, u, du, d2u);
    OdeVec<Complex> y(2);
    y(0) = u;
    y(1) = -Real(side) * (1.0 + x * x) * du / x;  // dx/dtau = -side (1+x^2)
    return y;
}

// Same with the tau-derivative replaced by the Euler derivative x d/dx,
// which keeps both rows comparably scaled for the condition estimate.
inline Eigen::Vector2cd frame_euler(const CoeffTable<Complex>& c, Complex s, Real x) {
    Complex u = 0.0, du = 0.0, d2u = 0.0;
    eval_table(c, Complex(1.0), s, x, u, du, d2u);
    return {u, du};
}

inline OdeVec<Complex> propagate(const ModeEquation& eq, OdeVec<Complex> y, Real t0, Real t1, const OdeOptions& opt) {
    auto rhs = [&](Real tau, const OdeVec<Complex>& v) {
        OdeVec<Complex> d(2);
        d(0) = v(1);
        d(1) = -eq.p(tau) * v(1) - eq.q(tau) * v(0);
        return d;
    };
    return dopri5<Complex>(rhs, t0, std::move(y), t1, opt);
}

inline Real scaled_condition(const Eigen::Matrix2cd& A) {
    Eigen::Matrix2cd B = A;
    for (int j = 0; j < 2; ++j) B.col(j) /= B.col(j).norm();
    Eigen::JacobiSVD<Eigen::Matrix2cd> svd(B);
    const auto& sv = svd.singularValues();
    return sv(1) > 0.0 ? sv(0) / sv(1) : std::numeric_limits<Real>::infinity();
}

// from_side: +1 maps Y_+ data to Y_- data, -1 the reverse.
inline ModeConnection connect(int k, const SpectralParams& p, const ConnectionOptions& opt, int from_side) {
    require(p.n >= 2, "connection_matrix: n must be >= 2");
    ModeConnection mc;
    mc.k = k;
    mc.mu = mode_eigenvalue(p.n, k);
    mc.experimental = p.regime == Regime::IntegerGap;
    const auto fr = mode_frames(mc.mu, p, opt);
    mc.x_match = fr.x_match;
    mc.frame_error = fr.error;
    const Real x = fr.x_match;
    const Real tau_m = std::atan(1.0 / x);
    const int to_side = -from_side;
    const ModeEquation eq{p.n, mc.mu, p.lambda};

    Eigen::Matrix2cd far;  // frame states at the far end, columns plus/minus
    const auto fp = frame_state(fr.plus, p.s_plus, x, to_side);
    const auto fm = frame_state(fr.minus, p.s_minus, x, to_side);
    far << fp(0), fm(0), fp(1), fm(1);

    Eigen::Matrix2cd euler;
    euler.col(0) = frame_euler(fr.plus, p.s_plus, x);
    euler.col(1) = frame_euler(fr.minus, p.s_minus, x);
    mc.condition = scaled_condition(euler);

    const Eigen::PartialPivLU<Eigen::Matrix2cd> lu(far);
    int col = 0;
    for (const auto* tab : {&fr.plus, &fr.minus}) {
        const Complex s = col == 0 ? p.s_plus : p.s_minus;
        auto y = frame_state(*tab, s, x, from_side);
        y = propagate(eq, y, from_side * tau_m, to_side * tau_m, opt.ode);
        mc.matrix.col(col) = lu.solve(Eigen::Vector2cd(y(0), y(1)));
        ++col;
    }
    return mc;
}

}  // namespace detail

/// Y_+ data (g+, g-) -> far-end data (v+|Y_-, v-|Y_-) on mode k.
inline ModeConnection connection_matrix(int k, const SpectralParams& p, const ConnectionOptions& opt = {}) {
    return detail::connect(k, p, opt, +1);
}

/// Y_- -> Y_+, integrated in the opposite direction.
inline ModeConnection reverse_connection_matrix(int k, const SpectralParams& p, const ConnectionOptions& opt = {}) {
    return detail::connect(k, p, opt, -1);
}

/// Both renormalization conventions of the mode blocks. With mu_k the
/// modified boundary Laplacian eigenvalue (1 on the nullspace):
///   symmetric: diag(mu^{-s+/2+n/4}, mu^{-s-/2+n/4}) S diag(mu^{s+/2-n/4}, mu^{s-/2-n/4})
///   literal:   left factor diag(mu^{-s+/2+n/4}, mu^{-s-+n/4}), same right factor.
struct RenormalizedBlocks {
    Eigen::Matrix2cd symmetric;
    Eigen::Matrix2cd literal;
};

inline Real modified_eigenvalue(int n, int k) {
    const long m = mode_eigenvalue(n, k);
    return m == 0 ? 1.0 : Real(m);
}

inline RenormalizedBlocks renormalize(const Eigen::Matrix2cd& S, Real mu, const SpectralParams& p) {
    const Real q = p.n / 4.0;
    auto pw = [&](Complex e) { return std::pow(Complex(mu), e); };
    const Eigen::Matrix2cd right = Eigen::Vector2cd(pw(p.s_plus / 2.0 - q), pw(p.s_minus / 2.0 - q)).asDiagonal();
    const Eigen::Matrix2cd left_sym = Eigen::Vector2cd(pw(-p.s_plus / 2.0 + q), pw(-p.s_minus / 2.0 + q)).asDiagonal();
    const Eigen::Matrix2cd left_lit = Eigen::Vector2cd(pw(-p.s_plus / 2.0 + q), pw(-p.s_minus + q)).asDiagonal();
    return {left_sym * S * right, left_lit * S * right};
}

struct ScatteringMatrix {
    SpectralParams params;
    std::map<int, ModeConnection> blocks;
    std::map<int, RenormalizedBlocks> renormalized;

    /// max_k |entry| / min_k |entry| of the symmetric renormalized blocks over
    /// k in [k_lo, k_hi], worst entry position; and the smallest entry relative
    /// to the largest.
    std::pair<Real, Real> renormalized_spread(int k_lo, int k_hi) const {
        Real worst = 0.0, gmax = 0.0, gmin = std::numeric_limits<Real>::infinity();
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                Real mx = 0.0, mn = std::numeric_limits<Real>::infinity();
                for (int k = k_lo; k <= k_hi; ++k) {
                    const Real a = std::abs(renormalized.at(k).symmetric(i, j));
                    mx = std::max(mx, a);
                    mn = std::min(mn, a);
                }
                worst = std::max(worst, mn > 0.0 ? mx / mn : std::numeric_limits<Real>::infinity());
                gmax = std::max(gmax, mx);
                gmin = std::min(gmin, mn);
            }
        return {worst, gmin / gmax};
    }
};

/// Modes k = 0..k_max (on S^1 the blocks of -k and k coincide).
inline ScatteringMatrix assemble_scattering(int k_max, const SpectralParams& p, const ConnectionOptions& opt = {}) {
    require(k_max >= 0, "assemble_scattering: k_max must be >= 0");
    ScatteringMatrix sm;
    sm.params = p;
    for (int k = 0; k <= k_max; ++k) {
        auto mc = connection_matrix(k, p, opt);
        sm.renormalized[k] = renormalize(mc.matrix, modified_eigenvalue(p.n, k), p);
        sm.blocks[k] = std::move(mc);
    }
    return sm;
}

inline nlohmann::json to_json(const ModeConnection& m) {
    auto c = [](Complex z) { return complex_to_json(z); };
    return {{"k", m.k},
            {"mu", m.mu},
            {"matrix", {{c(m.matrix(0, 0)), c(m.matrix(0, 1))}, {c(m.matrix(1, 0)), c(m.matrix(1, 1))}}},
            {"condition", m.condition},
            {"frame_error", m.frame_error},
            {"x_match", m.x_match},
            {"experimental", m.experimental}};
}

}  // namespace dslab
