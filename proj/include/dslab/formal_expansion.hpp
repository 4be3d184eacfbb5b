#pragma once

// Boundary Frobenius recursion for P = Box - lambda on a warped model
// g = (a dx^2 - b h_Y)/x^2, one Laplace eigenmode of Y at a time.
//
// Multiplying P by a puts it in the form
//
//     a P = -D^2 + (n-1) D - lambda  -  alpha D  -  mu (a/b) x^2  -  lambda (a - 1),
//
// with D = x d/dx and alpha = D log(a^{-1/2} b^{(n-1)/2}). Acting on
// x^sigma (log x)^k the unperturbed part gives
//
//     x^sigma [ I(sigma) L^k + k (n-1-2 sigma) L^{k-1} - k (k-1) L^{k-2} ],
//
// and the rest only shifts to higher powers of x, so each order j is solved
// from the top log power down.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>
#include <nlohmann/json.hpp>

#include "dslab/core.hpp"
#include "dslab/fit.hpp"
#include "dslab/metric.hpp"
#include "dslab/rational.hpp"
#include "dslab/spectral.hpp"
#include "dslab/taylor.hpp"

namespace dslab {

/// Boundary eigenmode. On S^1 (n = 2) l is the signed Fourier index and m is
/// unused; on S^{n-1} l is the degree and m labels the harmonic.
struct ModeIndex {
    int l = 0;
    int m = 0;
    friend bool operator==(const ModeIndex&, const ModeIndex&) = default;
};

/// Eigenvalue of the positive Laplacian of the round S^{n-1} on mode l.
inline long mode_eigenvalue(int n, int l) {
    if (n == 2) return static_cast<long>(l) * l;
    require(l >= 0, "mode_eigenvalue: spherical degree must be >= 0");
    return static_cast<long>(l) * (l + n - 2);
}

inline Complex indicial_polynomial(Complex s, const SpectralParams& p) {
    return s * (Real(p.n - 1) - s) - p.lambda;
}

inline Complex indicial_derivative(Complex s, const SpectralParams& p) {
    return Real(p.n - 1) - 2.0 * s;
}

/// c[j][k]: coefficient of x^{s+j} (log x)^k.
template <class T>
using CoeffTable = std::vector<std::vector<T>>;

namespace detail {

template <class T>
struct RecursionModel {
    int n;
    T lambda;
    T mu;
    Taylor<T> alpha, beta, gamma;
};

template <class T>
RecursionModel<T> recursion_model(const MetricModel& model, int n, const T& lambda, const T& mu, int order) {
    Taylor<T> a, b;
    model.boundary_series<T>(static_cast<std::size_t>(order), a, b);
    const Taylor<T> q = pow_series(a, T(-1) / T(2)) * pow_series(b, T(n - 1) / T(2));
    return {n, lambda, mu, q.euler() * inverse_series(q), a * inverse_series(b), a};
}

template <class T>
bool is_zero(const T& v, double scale) {
    if constexpr (std::is_same_v<T, Rational>)
        return v == 0;
    else
        return std::abs(v) <= 1e-13 * scale;
}

template <class T>
double magnitude(const T& v) {
    if constexpr (std::is_same_v<T, Rational>)
        return std::abs(to_double(v));
    else
        return std::abs(v);
}

/// One branch with exponent s. lead0/lead1 are the prescribed coefficients of
/// x^s and x^s log x; resonance is the order j > 0 with I(s+j) = 0 (or -1).
template <class T>
CoeffTable<T> solve_branch(const RecursionModel<T>& m, const T& s, int order, int depth, const T& lead0,
                           const T& lead1, int resonance) {
    const int K = depth + 1;
    CoeffTable<T> c(order + 1, std::vector<T>(K, T(0)));
    c[0][0] = lead0;
    if (K > 1)
        c[0][1] = lead1;
    else if (lead1 != T(0))
        throw OrderClash("leading log term requested with log depth 0");

    const T nm1(m.n - 1);
    double scale = std::max(magnitude(lead0), magnitude(lead1));
    for (int j = 1; j <= order; ++j) {
        const T sigma = s + T(j);
        std::vector<T> R(K, T(0));
        for (int k = 0; k < K; ++k) {
            T acc(0);
            for (int i = 1; i <= j; ++i) {
                const auto& prev = c[j - i];
                const T next = k + 1 < K ? prev[k + 1] : T(0);
                if (m.alpha.at(i) != T(0)) acc -= m.alpha.at(i) * ((sigma - T(i)) * prev[k] + T(k + 1) * next);
                if (m.gamma.at(i) != T(0)) acc -= m.lambda * m.gamma.at(i) * prev[k];
            }
            if (m.mu != T(0))
                for (int i = 0; i <= j - 2; ++i) acc -= m.mu * m.beta.at(i) * c[j - 2 - i][k];
            R[k] = acc;
        }

        const T Ival = sigma * (nm1 - sigma) - m.lambda;
        const T Dval = nm1 - T(2) * sigma;
        auto coef = [&](int k) { return k < K ? c[j][k] : T(0); };
        if (j != resonance) {
            for (int k = K - 1; k >= 0; --k)
                c[j][k] = -(R[k] + T(k + 1) * Dval * coef(k + 1) - T((k + 2) * (k + 1)) * coef(k + 2)) / Ival;
        } else {
            // I(sigma) = 0: equation k fixes the L^{k+1} coefficient; x^{s+j}
            // itself is free and set to zero.
            for (int k = K - 1; k >= 0; --k) {
                const T rhs = -R[k] + T((k + 2) * (k + 1)) * coef(k + 2);
                if (k + 1 >= K) {
                    if (!is_zero(rhs, scale))
                        throw OrderClash("resonance at order " + std::to_string(j) +
                                         " needs a log power beyond the allowed depth " + std::to_string(depth));
                    continue;
                }
                c[j][k + 1] = rhs / (T(k + 1) * Dval);
            }
            c[j][0] = T(0);
        }
        for (int k = 0; k < K; ++k) scale = std::max(scale, magnitude(c[j][k]));
    }
    return c;
}

}  // namespace detail

/// Unit frame of one branch: leading datum 1 (the log slot at threshold for
/// the minus branch), all higher coefficients forced by the recursion.
template <class T>
CoeffTable<T> branch_frame(Branch br, const T& s_plus, const T& s_minus, const T& lambda, long mu,
                           const SpectralParams& p, const MetricModel& model, int order, int depth) {
    require(order >= 0, "branch_frame: order must be >= 0");
    require(depth >= 0, "branch_frame: log depth must be >= 0");
    const auto rm = detail::recursion_model<T>(model, p.n, lambda, T(mu), std::max(order, 1));
    if (br == Branch::Plus) return detail::solve_branch(rm, s_plus, order, depth, T(1), T(0), -1);
    if (p.regime == Regime::Threshold) return detail::solve_branch(rm, s_minus, order, depth, T(0), T(1), -1);
    const int res = p.regime == Regime::IntegerGap ? p.integer_gap() : -1;
    return detail::solve_branch(rm, s_minus, order, depth, T(1), T(0), res);
}

/// Exact rational frame when the roots are rational and the model has an
/// exact Taylor expansion; nullopt otherwise.
inline std::optional<CoeffTable<Rational>> exact_branch_frame(Branch br, long mu, const SpectralParams& p,
                                                              const MetricModel& model, int order, int depth = 1) {
    if (!p.exact_roots) return std::nullopt;
    if (model.warped_family() && model.profile == WarpProfile::OneMinusT2) return std::nullopt;
    if (model.theta_dependent()) return std::nullopt;
    return branch_frame<Rational>(br, p.exact_roots->first, p.exact_roots->second, to_rational(p.lambda), mu, p,
                                  model, order, depth);
}

inline CoeffTable<Complex> numeric_branch_frame(Branch br, long mu, const SpectralParams& p,
                                                const MetricModel& model, int order, int depth = 1) {
    return branch_frame<Complex>(br, p.s_plus, p.s_minus, Complex(p.lambda), mu, p, model, order, depth);
}

struct ModeData {
    ModeIndex mode;
    Complex g_plus;
    Complex g_minus;
};

struct ModeSeries {
    ModeIndex mode;
    long mu = 0;
    Complex g_plus, g_minus;
    CoeffTable<Complex> plus_frame, minus_frame;
    std::optional<CoeffTable<Rational>> exact_plus, exact_minus;

    Complex coefficient(Branch br, int j, int k) const {
        const auto& f = br == Branch::Plus ? plus_frame : minus_frame;
        if (j < 0 || j >= static_cast<int>(f.size()) || k < 0 || k >= static_cast<int>(f[j].size())) return 0.0;
        return (br == Branch::Plus ? g_plus : g_minus) * f[j][k];
    }
};

/// Value, D u and D^2 u of sum_{j,k} c_jk x^{s+j} L^k at one x, in any
/// complex scalar type C.
template <class C, class F>
void eval_table(const CoeffTable<Complex>& c, const Complex& weight, const C& s, const F& x, C& u, C& du, C& d2u) {
    using std::exp;
    using std::log;
    const F L = log(x);
    for (std::size_t j = 0; j < c.size(); ++j) {
        const C sigma = s + C(F(static_cast<double>(j)));
        const C xs = exp(sigma * C(L));
        C Lk_2(0), Lk_1(0), Lk(1);  // L^{k-2}, L^{k-1}, L^k
        for (std::size_t k = 0; k < c[j].size(); ++k) {
            if (k == 1) {
                Lk_1 = C(1);
                Lk = C(L);
            } else if (k >= 2) {
                Lk_2 = Lk_1;
                Lk_1 = Lk;
                Lk = Lk * C(L);
            }
            const Complex cw = weight * c[j][k];
            if (cw == Complex(0.0)) continue;
            const C coef = C(F(cw.real()), F(cw.imag())) * xs;
            const F kk(static_cast<double>(k));
            const C kkm1(F(static_cast<double>(k * (k > 0 ? k - 1 : 0))));
            u += coef * Lk;
            du += coef * (sigma * Lk + C(kk) * Lk_1);
            d2u += coef * (sigma * sigma * Lk + C(F(2)) * sigma * C(kk) * Lk_1 + kkm1 * Lk_2);
        }
    }
}

struct PowerLogSeries {
    SpectralParams params;
    MetricModel model;
    int order = 0;
    int log_depth = 1;
    std::vector<ModeSeries> modes;
    Real radius_estimate = std::numeric_limits<Real>::infinity();

    const ModeSeries& mode(ModeIndex idx) const {
        for (const auto& m : modes)
            if (m.mode == idx) return m;
        throw InvalidArgument("PowerLogSeries: mode not present");
    }

    /// Mode coefficient of u at x (both branches).
    Complex eval_mode(const ModeSeries& m, Real x) const {
        Complex u(0), du(0), d2u(0);
        eval_table<Complex, Real>(m.plus_frame, m.g_plus, params.s_plus, x, u, du, d2u);
        eval_table<Complex, Real>(m.minus_frame, m.g_minus, params.s_minus, x, u, du, d2u);
        return u;
    }

    /// (u, x u_x) of one mode at x.
    std::pair<Complex, Complex> eval_mode_with_derivative(const ModeSeries& m, Real x) const {
        Complex u(0), du(0), d2u(0);
        eval_table<Complex, Real>(m.plus_frame, m.g_plus, params.s_plus, x, u, du, d2u);
        eval_table<Complex, Real>(m.minus_frame, m.g_minus, params.s_minus, x, u, du, d2u);
        return {u, du};
    }

    /// u(x, theta) on S^1.
    Complex eval(Real x, Real theta) const {
        require(params.n == 2, "PowerLogSeries::eval: angular evaluation only on S^1");
        Complex acc(0);
        for (const auto& m : modes) acc += eval_mode(m, x) * std::exp(I * Real(m.mode.l) * theta);
        return acc;
    }

    nlohmann::json coefficient_table() const {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& m : modes)
            for (Branch br : {Branch::Plus, Branch::Minus}) {
                const auto& f = br == Branch::Plus ? m.plus_frame : m.minus_frame;
                for (std::size_t j = 0; j < f.size(); ++j)
                    for (std::size_t k = 0; k < f[j].size(); ++k) {
                        const Complex c = m.coefficient(br, static_cast<int>(j), static_cast<int>(k));
                        if (c == Complex(0.0)) continue;
                        rows.push_back({{"branch", to_string(br)}, {"j", j}, {"k", k}, {"mode", m.mode.l},
                                        {"m", m.mode.m}, {"re", c.real()}, {"im", c.imag()}});
                    }
            }
        return rows;
    }
};

namespace detail {

inline Real frame_radius(const CoeffTable<Complex>& f) {
    Real r = std::numeric_limits<Real>::infinity();
    Real lead = 0.0;
    for (const auto& v : f[0]) lead = std::max(lead, std::abs(v));
    if (lead == 0.0) return r;
    for (std::size_t j = 1; j < f.size(); ++j) {
        Real mag = 0.0;
        for (const auto& v : f[j]) mag = std::max(mag, std::abs(v));
        if (mag > 0.0) r = std::min(r, std::pow(lead / mag, 1.0 / Real(j)));
    }
    return r;
}

inline CoeffTable<Complex> to_complex(const CoeffTable<Rational>& t) {
    CoeffTable<Complex> out(t.size());
    for (std::size_t j = 0; j < t.size(); ++j)
        for (const auto& v : t[j]) out[j].push_back(Complex(to_double(v)));
    return out;
}

}  // namespace detail

/// Truncated series sum over modes of x^{s_+} v_+ + x^{s_-} v_- through
/// order x^{s+N} in each branch.
inline PowerLogSeries build_series(const std::vector<ModeData>& data, const SpectralParams& p,
                                   const MetricModel& model, int N, int max_log_depth = 1) {
    model.validate();
    require(model.n == p.n, "build_series: model and spectral dimension differ");
    require(N >= 0, "build_series: order N must be >= 0");
    require(!model.theta_dependent(), "build_series: angular warps couple modes; not supported");

    PowerLogSeries out;
    out.params = p;
    out.model = model;
    out.order = N;
    out.log_depth = max_log_depth;
    for (const auto& d : data) {
        ModeSeries ms;
        ms.mode = d.mode;
        ms.mu = mode_eigenvalue(p.n, d.mode.l);
        ms.g_plus = d.g_plus;
        ms.g_minus = d.g_minus;
        ms.exact_plus = exact_branch_frame(Branch::Plus, ms.mu, p, model, N, max_log_depth);
        ms.exact_minus = exact_branch_frame(Branch::Minus, ms.mu, p, model, N, max_log_depth);
        ms.plus_frame = ms.exact_plus ? detail::to_complex(*ms.exact_plus)
                                      : numeric_branch_frame(Branch::Plus, ms.mu, p, model, N, max_log_depth);
        ms.minus_frame = ms.exact_minus ? detail::to_complex(*ms.exact_minus)
                                        : numeric_branch_frame(Branch::Minus, ms.mu, p, model, N, max_log_depth);
        out.radius_estimate = std::min({out.radius_estimate, detail::frame_radius(ms.plus_frame),
                                        detail::frame_radius(ms.minus_frame)});
        out.modes.push_back(std::move(ms));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Residual check
// ---------------------------------------------------------------------------

enum class ResidualStatus { Fitted, Exact };

struct SeriesResidualReport {
    ResidualStatus status = ResidualStatus::Fitted;
    Real slope = 0.0;           // fitted d log|P u_N| / d log x
    Real expected = 0.0;        // Re s_- + N + 1
    bool certified = false;     // slope >= expected - 0.1, or exact
    std::vector<Real> x, residual;
};

/// P u_N on a log-spaced grid in [x_lo, x_hi], evaluated in 50-digit
/// arithmetic with the closed-form model (not its Taylor series), then a
/// least-squares slope of log ||P u_N||_{l^2 over modes} against log x.
inline SeriesResidualReport series_residual(const PowerLogSeries& series, Real x_lo, Real x_hi, int points = 40) {
    using F = boost::multiprecision::cpp_bin_float_50;
    using C = boost::multiprecision::cpp_complex_50;
    require(x_lo > 0.0 && x_hi > x_lo, "series_residual: need 0 < x_lo < x_hi");
    require(points >= 3, "series_residual: need at least 3 points");
    const auto& p = series.params;
    const auto& model = series.model;

    SeriesResidualReport rep;
    rep.expected = p.s_minus.real() + series.order + 1;
    bool all_exact = true;
    for (int i = 0; i < points; ++i) {
        const Real xd = x_lo * std::pow(x_hi / x_lo, Real(i) / (points - 1));
        const F x(xd);
        const F a = model.a<F>(x), ax = model.a_x<F>(x);
        const F b = model.b<F>(x), bx = model.b_x<F>(x);
        const F alpha = x * (F(p.n - 1) * bx / (2 * b) - ax / (2 * a));
        F sq(0);
        for (const auto& m : series.modes) {
            C u(0), du(0), d2u(0);
            eval_table<C, F>(m.plus_frame, m.g_plus, C(F(p.s_plus.real()), F(p.s_plus.imag())), x, u, du, d2u);
            eval_table<C, F>(m.minus_frame, m.g_minus, C(F(p.s_minus.real()), F(p.s_minus.imag())), x, u, du, d2u);
            const C Pu = -(d2u - C(F(p.n - 1)) * du + C(alpha) * du) / C(a) -
                         C(x * x * F(m.mu) / b) * u - C(F(p.lambda)) * u;
            const F mag = abs(Pu);
            // Relative to the size of the individual terms: an exact solution
            // leaves only 50-digit rounding.
            const F terms = abs(d2u) + abs(du) + abs(u) + F(1e-300);
            if (mag > F(1e-40) * terms) all_exact = false;
            sq += mag * mag;
        }
        rep.x.push_back(xd);
        rep.residual.push_back(static_cast<double>(sqrt(sq)));
    }
    if (all_exact) {
        rep.status = ResidualStatus::Exact;
        rep.certified = true;
        rep.slope = std::numeric_limits<Real>::infinity();
        return rep;
    }
    std::vector<Real> lx, ly;
    for (std::size_t i = 0; i < rep.x.size(); ++i) {
        if (rep.residual[i] <= 0.0) continue;
        lx.push_back(std::log(rep.x[i]));
        ly.push_back(std::log(rep.residual[i]));
    }
    if (lx.size() < 3) throw NonConvergence("series_residual: too few nonzero residual samples to fit");
    rep.slope = linear_fit(lx, ly).slope;
    rep.certified = rep.slope >= rep.expected - 0.1;
    return rep;
}

}  // namespace dslab
