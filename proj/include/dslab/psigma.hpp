#pragma once

// The front-face model operator on the unit ball B in Y in R^{n-1},
//
//     P_sigma = -(E + n - 1 - sigma)(E - sigma) + sum_j d_j^2 - lambda,   E = Y . grad,
//
// i.e. (Y D_Y - i(n-1-sigma))(Y D_Y + i sigma) - Delta_Y - lambda with D = -i d.
// On r^l-type modes of the angular Laplacian (eigenvalue mu = l(l+n-3)):
//
//     P_sigma f = (1-r^2) f'' + ((n-2)/r - (n-2 sigma) r) f' - mu f/r^2 + (sigma(n-1-sigma) - lambda) f.

#include <cmath>
#include <functional>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "dslab/core.hpp"
#include "dslab/fd.hpp"
#include "dslab/polynomial.hpp"
#include "dslab/spectral.hpp"

namespace dslab {

/// Radial samples of one angular mode on a staggered grid r_i = (i + 1/2) h.
struct BallField {
    std::vector<Real> r;
    int mode = 0;  // l; on n = 2 the parity (0 even, 1 odd)
    std::vector<Complex> values;
};

inline BallField make_ball_grid(int points, Real eps = 1e-2, int mode = 0) {
    require(points > 0 && eps > 0.0 && eps < 1.0, "make_ball_grid: bad size or rim collar");
    BallField f;
    f.mode = mode;
    const Real h = (1.0 - eps) / points;
    for (int i = 0; i < points; ++i) f.r.push_back((i + 0.5) * h);
    f.values.assign(points, 0.0);
    return f;
}

template <class Fn>
BallField sample_ball(int points, Real eps, int mode, Fn&& fn) {
    BallField f = make_ball_grid(points, eps, mode);
    for (std::size_t i = 0; i < f.r.size(); ++i) f.values[i] = fn(f.r[i]);
    return f;
}

inline Real angular_eigenvalue(int n, int l) {
    if (n == 2) {
        require(l == 0 || l == 1, "angular_eigenvalue: on n = 2 the mode is a parity 0 or 1");
        return 0.0;
    }
    require(l >= 0, "angular_eigenvalue: mode must be >= 0");
    return Real(l) * (l + n - 3);
}

/// P_sigma on the samples with 4th-order differences: central stencils with
/// parity ghosts at the origin, one-sided 6-point stencils at the outer end.
inline BallField apply_psigma(Complex sigma, const BallField& f, const SpectralParams& p) {
    const int N = static_cast<int>(f.r.size());
    if (N < 32) throw GridTooCoarse("apply_psigma: need at least 32 radial points, got " + std::to_string(N));
    require(f.values.size() == f.r.size(), "apply_psigma: values/grid size mismatch");
    const Real h = 2.0 * f.r[0];
    for (int i = 1; i < N; ++i) {
        require(std::abs(f.r[i] - f.r[i - 1] - h) < 1e-9 * h, "apply_psigma: grid must be staggered uniform r_i = (i+1/2)h");
        require(std::isfinite(std::abs(f.values[i])), "apply_psigma: non-finite sample");
    }
    const int n = p.n;
    const Real mu = angular_eigenvalue(n, f.mode);
    const Real parity = (f.mode % 2 == 0) ? 1.0 : -1.0;
    const Complex c0 = sigma * (Real(n - 1) - sigma) - p.lambda;

    auto val = [&](int i) -> Complex { return i >= 0 ? f.values[i] : parity * f.values[-1 - i]; };
    static const Real d1[5] = {1.0 / 12, -2.0 / 3, 0.0, 2.0 / 3, -1.0 / 12};
    static const Real d2[5] = {-1.0 / 12, 4.0 / 3, -5.0 / 2, 4.0 / 3, -1.0 / 12};

    std::vector<Real> tail_nodes;
    for (int j = N - 6; j < N; ++j) tail_nodes.push_back(f.r[j]);

    BallField out = f;
    for (int i = 0; i < N; ++i) {
        Complex u1(0), u2(0);
        if (i + 2 < N) {
            for (int k = -2; k <= 2; ++k) {
                u1 += d1[k + 2] * val(i + k);
                u2 += d2[k + 2] * val(i + k);
            }
            u1 /= h;
            u2 /= h * h;
        } else {
            const auto w = fornberg_weights(f.r[i], tail_nodes, 2);
            for (int j = 0; j < 6; ++j) {
                u1 += w[1][j] * f.values[N - 6 + j];
                u2 += w[2][j] * f.values[N - 6 + j];
            }
        }
        const Real r = f.r[i];
        out.values[i] = (1.0 - r * r) * u2 + ((n - 2) / r - (Real(n) - 2.0 * sigma) * r) * u1 - mu / (r * r) * f.values[i] +
                        c0 * f.values[i];
    }
    return out;
}

/// sup over the grid of | w^{-s} P_sigma[w^s u] - (4 s (s - sigma)/w + P_{sigma-2s}) u |, w = 1 - r^2.
inline Real check_conjugation(Real s, Real sigma, const BallField& test, const SpectralParams& p) {
    BallField wu = test;
    for (std::size_t i = 0; i < wu.r.size(); ++i) wu.values[i] *= std::pow(1.0 - wu.r[i] * wu.r[i], s);
    const BallField lhs = apply_psigma(sigma, wu, p);
    const BallField rhs = apply_psigma(sigma - 2.0 * s, test, p);
    Real worst = 0.0;
    for (std::size_t i = 0; i < test.r.size(); ++i) {
        const Real w = 1.0 - test.r[i] * test.r[i];
        const Complex l = lhs.values[i] * std::pow(w, -s);
        const Complex r = 4.0 * s * (s - sigma) / w * test.values[i] + rhs.values[i];
        worst = std::max(worst, std::abs(l - r));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Symbolic application on w^a q(Y)
// ---------------------------------------------------------------------------

template <class T>
WeightedPoly<T> flat_laplacian(const WeightedPoly<T>& f) {
    std::vector<WeightedPoly<T>> parts;
    for (int j = 0; j < f.dim(); ++j) parts.push_back(f.deriv(j).deriv(j));
    return combine(parts);
}

template <class T>
WeightedPoly<T> psigma_symbolic(const T& sigma, const T& lambda, int n, const WeightedPoly<T>& f) {
    require(f.dim() == n - 1, "psigma_symbolic: polynomial must live on R^{n-1}");
    const WeightedPoly<T> g = combine<T>({f.euler(), f.scaled(-sigma)});
    const WeightedPoly<T> h = combine<T>({g.euler(), g.scaled(T(n - 1) - sigma)});
    return combine<T>({h.scaled(T(-1)), flat_laplacian(f), f.scaled(-lambda)});
}

struct IdentityReport {
    Real residual = 0.0;  // largest coefficient of the difference
    Real scale = 0.0;     // largest coefficient of either side
    bool exact = false;   // computed in exact rational arithmetic
    int cases = 0;
};

namespace detail {

template <class T>
WeightedPoly<T> shift_weight(const WeightedPoly<T>& f, const T& da) {
    return {f.a + da, f.q};
}

template <class T>
IdentityReport intertwining_impl(const T& sigma, const T& lambda, int n, int degree, bool second) {
    IdentityReport rep;
    rep.exact = std::is_same_v<T, Rational>;
    const int d = n - 1;
    for (const auto& e : monomials_up_to(d, degree)) {
        const Poly<T> q = Poly<T>::monomial(e);
        WeightedPoly<T> diff;
        if (!second) {
            // P_{sigma-2} Delta = Delta P_sigma (the sign of Delta cancels)
            const WeightedPoly<T> u{T(0), q};
            const auto lhs = psigma_symbolic(sigma - T(2), lambda, n, flat_laplacian(u));
            const auto rhs = flat_laplacian(psigma_symbolic(sigma, lambda, n, u));
            diff = combine<T>({lhs, rhs.scaled(T(-1))});
            rep.scale = std::max({rep.scale, lhs.q.max_abs(), rhs.q.max_abs()});
        } else {
            // P_{sigma+2} w^{sigma+2} Delta w^{-sigma} = w^{sigma+2} Delta w^{-sigma} P_sigma on w^sigma q
            const WeightedPoly<T> u{sigma, q};
            auto A = [&](const WeightedPoly<T>& v) {
                return shift_weight(flat_laplacian(shift_weight(v, T(-sigma))), T(sigma + T(2)));
            };
            const auto lhs = psigma_symbolic(sigma + T(2), lambda, n, A(u));
            const auto rhs = A(psigma_symbolic(sigma, lambda, n, u));
            diff = combine<T>({lhs, rhs.scaled(T(-1))});
            rep.scale = std::max({rep.scale, lhs.q.max_abs(), rhs.q.max_abs()});
        }
        rep.residual = std::max(rep.residual, diff.q.max_abs());
        ++rep.cases;
    }
    return rep;
}

}  // namespace detail

/// Both intertwining identities on every monomial up to poly_degree. Exact
/// rational arithmetic when sigma and lambda are (dyadic) reals and
/// exact = true; complex floating point otherwise.
inline IdentityReport check_intertwining(Complex sigma, int poly_degree, const SpectralParams& p, bool second = false,
                                         bool exact = true) {
    require(poly_degree >= 0, "check_intertwining: degree must be >= 0");
    if (exact && sigma.imag() == 0.0)
        return detail::intertwining_impl<Rational>(to_rational(sigma.real()), to_rational(p.lambda), p.n,
                                                   poly_degree, second);
    return detail::intertwining_impl<Complex>(sigma, Complex(p.lambda), p.n, poly_degree, second);
}

struct NullVectorReport {
    Real residual = 0.0;      // sup of |P w^{s} | on the sample points
    Real coefficient = 0.0;   // largest coefficient of the symbolic image
    bool exact = false;
};

/// P_{s_hat_+} applied symbolically to (1 - r^2)^{s_hat_+}, sampled on
/// `points` radii in (0, r_max].
inline NullVectorReport null_vector_residual(const SpectralParams& p, int points = 1024, Real r_max = 0.99) {
    require(p.real_roots(), "null_vector_residual: needs real indicial roots");
    NullVectorReport rep;
    auto run = [&](auto s_hat, auto lambda) {
        using T = decltype(s_hat);
        const WeightedPoly<T> f{s_hat, Poly<T>::constant(p.n - 1, T(1))};
        const auto img = psigma_symbolic(s_hat, lambda, p.n, f);
        rep.coefficient = img.q.max_abs();
        for (int i = 1; i <= points; ++i) {
            std::vector<Real> y(p.n - 1, 0.0);
            y[0] = r_max * Real(i) / points;
            rep.residual = std::max(rep.residual, std::abs(img.eval(y)));
        }
    };
    if (p.exact_roots) {
        rep.exact = true;
        run(p.exact_roots->first - Rational(p.n - 1), to_rational(p.lambda));
    } else {
        run(Complex(p.s_hat_plus.real()), Complex(p.lambda));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Quadratic form
// ---------------------------------------------------------------------------

/// A real radial test function u(r) on one mode, with its derivatives.
struct RadialTest {
    int mode = 0;
    std::function<Real(Real)> u, du, d2u;
};

inline Real sphere_area(int dim) {
    // |S^dim| = 2 pi^{(dim+1)/2} / Gamma((dim+1)/2)
    return 2.0 * std::pow(pi, 0.5 * (dim + 1)) / std::tgamma(0.5 * (dim + 1));
}

/// Smooth bump r^l (phi((r-c)/w) + phi((r+c)/w)), phi(t) = exp(-1/(1-t^2)).
inline RadialTest bump_test(Real c, Real w, int mode = 0, Real amplitude = 1.0) {
    require(w > 0.0 && c >= 0.0 && c + w < 1.0, "bump_test: support must lie inside the unit ball");
    auto phi = [](Real t, int order) -> Real {
        if (std::abs(t) >= 1.0) return 0.0;
        const Real q = 1.0 - t * t;
        if (q < 1e-2) return 0.0;  // e^{-100} / q^3 is below any tolerance used here
        const Real e = std::exp(-1.0 / q);
        const Real g1 = -2.0 * t / (q * q);
        const Real g2 = -2.0 / (q * q) - 8.0 * t * t / (q * q * q);
        if (order == 0) return e;
        if (order == 1) return g1 * e;
        return (g2 + g1 * g1) * e;
    };
    auto beta = [=](Real r, int k) {
        return (phi((r - c) / w, k) + phi((r + c) / w, k)) / std::pow(w, k) * amplitude;
    };
    const int l = mode;
    RadialTest t;
    t.mode = mode;
    t.u = [=](Real r) { return std::pow(r, l) * beta(r, 0); };
    t.du = [=](Real r) {
        return (l > 0 ? l * std::pow(r, l - 1) * beta(r, 0) : 0.0) + std::pow(r, l) * beta(r, 1);
    };
    t.d2u = [=](Real r) {
        Real v = std::pow(r, l) * beta(r, 2);
        if (l > 0) v += 2.0 * l * std::pow(r, l - 1) * beta(r, 1);
        if (l > 1) v += l * (l - 1.0) * std::pow(r, l - 2) * beta(r, 0);
        return v;
    };
    return t;
}

inline RadialTest sum_tests(const std::vector<RadialTest>& parts) {
    require(!parts.empty(), "sum_tests: empty");
    RadialTest t;
    t.mode = parts.front().mode;
    for (const auto& q : parts) require(q.mode == t.mode, "sum_tests: modes differ");
    t.u = [=](Real r) { Real v = 0; for (const auto& q : parts) v += q.u(r); return v; };
    t.du = [=](Real r) { Real v = 0; for (const auto& q : parts) v += q.du(r); return v; };
    t.d2u = [=](Real r) { Real v = 0; for (const auto& q : parts) v += q.d2u(r); return v; };
    return t;
}

namespace detail {

inline void check_weight_integrable(Real sigma, const RadialTest& t) {
    if (sigma < 1.0) return;
    Real scale = 0.0;
    for (int i = 1; i < 64; ++i) scale = std::max(scale, std::abs(t.u(i / 64.0)));
    const Real rim = std::abs(t.u(1.0 - 1e-6)) + std::abs(t.u(1.0 - 1e-3));
    if (rim > 1e-12 * std::max(scale, 1e-300))
        throw QuadratureDivergence("quadratic_form: weight (1-r^2)^{-sigma} is not integrable at the rim for sigma >= 1 "
                                   "unless the test vanishes there");
}

// Narrow bumps defeat a single tanh-sinh pass (early levels can miss the
// support entirely), so integrate panel by panel; only the last panel sees the
// rim singularity of the weight.
template <class Fn>
Real radial_integral(Fn&& fn, int panels = 128) {
    using boost::math::quadrature::gauss;
    boost::math::quadrature::tanh_sinh<Real> ts;
    Real v = 0.0;
    for (int k = 0; k + 1 < panels; ++k) v += gauss<Real, 30>::integrate(fn, Real(k) / panels, Real(k + 1) / panels);
    v += ts.integrate(fn, Real(panels - 1) / panels, 1.0, 1e-13);
    if (!std::isfinite(v)) throw QuadratureDivergence("quadratic_form: non-finite integral");
    return v;
}

}  // namespace detail

/// <u, -P_sigma u> in L^2(r^{n-2} (1-r^2)^{-sigma} dr dw).
inline Real quadratic_form(Real sigma, const RadialTest& t, const SpectralParams& p) {
    detail::check_weight_integrable(sigma, t);
    const int n = p.n;
    const Real mu = angular_eigenvalue(n, t.mode);
    const Real c0 = sigma * (n - 1 - sigma) - p.lambda;
    auto integrand = [&](Real r) {
        if (r <= 0.0 || r >= 1.0) return 0.0;
        const Real u = t.u(r);
        if (u == 0.0) return 0.0;
        const Real w = (1.0 - r) * (1.0 + r);
        Real Pu = w * t.d2u(r) + ((n - 2) / r - (n - 2.0 * sigma) * r) * t.du(r) + c0 * u;
        if (mu != 0.0) Pu -= mu / (r * r) * u;
        return -u * Pu * std::pow(r, n - 2) * std::pow(w, -sigma);
    };
    return sphere_area(n - 2) * detail::radial_integral(integrand);
}

/// Same pairing after integration by parts:
/// ||(1-r^2)^{1/2} u'||^2 + mu ||u/r||^2 + (lambda + sigma^2 - sigma(n-1)) ||u||^2.
inline Real energy_form(Real sigma, const RadialTest& t, const SpectralParams& p) {
    detail::check_weight_integrable(sigma, t);
    const int n = p.n;
    const Real mu = angular_eigenvalue(n, t.mode);
    const Real c = p.lambda + sigma * sigma - sigma * (n - 1);
    auto integrand = [&](Real r) {
        if (r <= 0.0 || r >= 1.0) return 0.0;
        const Real u = t.u(r), du = t.du(r);
        if (u == 0.0 && du == 0.0) return 0.0;
        const Real w = (1.0 - r) * (1.0 + r);
        Real e = w * du * du + c * u * u;
        if (mu != 0.0) e += mu / (r * r) * u * u;
        return std::pow(r, n - 2) * std::pow(w, -sigma) * e;
    };
    return sphere_area(n - 2) * detail::radial_integral(integrand);
}

/// ||u||^2 in the same weighted space.
inline Real weighted_norm2(Real sigma, const RadialTest& t, const SpectralParams& p) {
    detail::check_weight_integrable(sigma, t);
    const int n = p.n;
    auto integrand = [&](Real r) {
        if (r <= 0.0 || r >= 1.0) return 0.0;
        const Real u = t.u(r);
        if (u == 0.0) return 0.0;
        return std::pow(r, n - 2) * std::pow((1.0 - r) * (1.0 + r), -sigma) * u * u;
    };
    return sphere_area(n - 2) * detail::radial_integral(integrand);
}

}  // namespace dslab
