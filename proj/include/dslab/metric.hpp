#pragma once

// Warped metric models on X = [-pi/2, pi/2]_tau x S^{n-1}:
//
//     g = sec^2(tau) (dtau^2 - H(tau, y) dw^2),   H = 1 + eps * w(tau) * f(theta)
//
// Near either boundary component x = cot|tau| and
//
//     g = (a(x) dx^2 - b(x, y) dw^2) / x^2,   a = 1/(1+x^2),  b = (1+x^2) H.
//
// The NormalForm family is the boundary model a = b = 1 with no global extent.

#include <cmath>
#include <string>
#include <type_traits>

#include <boost/math/constants/constants.hpp>

#include "dslab/core.hpp"
#include "dslab/rational.hpp"
#include "dslab/taylor.hpp"

namespace dslab {

enum class MetricFamily { NormalForm, ExactDeSitter, WarpedPerturbation };
enum class WarpProfile { CosTau, OneMinusT2 };
enum class Side { Plus = 1, Minus = -1 };

inline const char* to_string(MetricFamily f) {
    switch (f) {
        case MetricFamily::NormalForm: return "NormalForm";
        case MetricFamily::ExactDeSitter: return "ExactDeSitter";
        case MetricFamily::WarpedPerturbation: return "WarpedPerturbation";
    }
    return "?";
}

inline MetricFamily metric_family_from_string(const std::string& s) {
    if (s == "NormalForm") return MetricFamily::NormalForm;
    if (s == "ExactDeSitter") return MetricFamily::ExactDeSitter;
    if (s == "WarpedPerturbation") return MetricFamily::WarpedPerturbation;
    throw InvalidArgument("unknown metric family '" + s + "'");
}

inline const char* to_string(WarpProfile p) {
    return p == WarpProfile::CosTau ? "CosTau" : "OneMinusT2";
}

inline WarpProfile warp_profile_from_string(const std::string& s) {
    if (s == "CosTau") return WarpProfile::CosTau;
    if (s == "OneMinusT2") return WarpProfile::OneMinusT2;
    throw InvalidArgument("unknown warp profile '" + s + "'");
}

inline int sign_of(Side s) { return static_cast<int>(s); }

inline const char* to_string(Side s) { return s == Side::Plus ? "plus" : "minus"; }

template <class F>
F const_pi() {
    return boost::math::constants::pi<F>();
}

struct MetricModel {
    int n = 2;
    MetricFamily family = MetricFamily::ExactDeSitter;
    Real epsilon = 0.0;
    WarpProfile profile = WarpProfile::CosTau;
    bool angular_sin = false;  // multiply the warp by sin(theta); n = 2 only

    static MetricModel normal_form(int n) { return {n, MetricFamily::NormalForm, 0.0, WarpProfile::CosTau, false}; }
    static MetricModel de_sitter(int n) { return {n, MetricFamily::ExactDeSitter, 0.0, WarpProfile::CosTau, false}; }
    static MetricModel warped(int n, Real eps, WarpProfile p, bool sin_theta = false) {
        return {n, MetricFamily::WarpedPerturbation, eps, p, sin_theta};
    }

    void validate() const {
        require(n >= 2, "MetricModel: n must be >= 2");
        require(std::isfinite(epsilon), "MetricModel: epsilon must be finite");
        require(!angular_sin || n == 2, "MetricModel: angular warp only supported for n = 2");
        if (family == MetricFamily::WarpedPerturbation)
            require(std::abs(epsilon) < 0.5, "MetricModel: |epsilon| must stay below 0.5 so H > 0");
    }

    bool global() const { return family != MetricFamily::NormalForm; }
    bool warped_family() const { return family == MetricFamily::WarpedPerturbation && epsilon != 0.0; }
    bool theta_dependent() const { return warped_family() && angular_sin; }

    // ---- global tau picture -------------------------------------------------
    // Templated on the scalar so the residual checks can run in extended
    // precision; F = double everywhere else.

    template <class F = Real>
    F warp(F tau) const {
        using std::cos;
        if (profile == WarpProfile::CosTau) return cos(tau);
        const F T = 2 * tau / const_pi<F>();
        return 1 - T * T;
    }
    template <class F = Real>
    F warp_dtau(F tau) const {
        using std::sin;
        if (profile == WarpProfile::CosTau) return -sin(tau);
        const F p = const_pi<F>();
        return -8 * tau / (p * p);
    }
    template <class F = Real>
    F angular(F theta) const {
        using std::sin;
        return angular_sin ? F(sin(theta)) : F(1);
    }
    template <class F = Real>
    F angular_dtheta(F theta) const {
        using std::cos;
        return angular_sin ? F(cos(theta)) : F(0);
    }

    /// H(tau, theta); theta ignored unless angular_sin.
    template <class F = Real>
    F H(F tau, F theta = F(0)) const {
        if (!warped_family()) return F(1);
        return 1 + F(epsilon) * warp(tau) * angular(theta);
    }
    template <class F = Real>
    F H_tau(F tau, F theta = F(0)) const {
        if (!warped_family()) return F(0);
        return F(epsilon) * warp_dtau(tau) * angular(theta);
    }
    template <class F = Real>
    F H_theta(F tau, F theta) const {
        if (!theta_dependent()) return F(0);
        return F(epsilon) * warp(tau) * angular_dtheta(theta);
    }

    // ---- boundary chart -----------------------------------------------------

    template <class F = Real>
    static F tau_of_x(F x, Side side) {
        using std::atan;
        return sign_of(side) * (const_pi<F>() / 2 - atan(x));
    }
    template <class F = Real>
    static F dtau_dx(F x, Side side) { return -sign_of(side) / (1 + x * x); }

    template <class F = Real>
    F a(F x) const { return family == MetricFamily::NormalForm ? F(1) : F(1 / (1 + x * x)); }
    template <class F = Real>
    F a_x(F x) const {
        if (family == MetricFamily::NormalForm) return F(0);
        const F q = 1 + x * x;
        return -2 * x / (q * q);
    }
    template <class F = Real>
    F b(F x, F theta = F(0), Side side = Side::Plus) const {
        if (family == MetricFamily::NormalForm) return F(1);
        return (1 + x * x) * H(tau_of_x(x, side), theta);
    }
    template <class F = Real>
    F b_x(F x, F theta = F(0), Side side = Side::Plus) const {
        if (family == MetricFamily::NormalForm) return F(0);
        const F tau = tau_of_x(x, side);
        return 2 * x * H(tau, theta) + (1 + x * x) * H_tau(tau, theta) * dtau_dx(x, side);
    }
    template <class F = Real>
    F b_theta(F x, F theta, Side side = Side::Plus) const {
        if (family == MetricFamily::NormalForm) return F(0);
        return (1 + x * x) * H_theta(tau_of_x(x, side), theta);
    }

    /// Taylor coefficients of a(x) and b(x) at x = 0 (theta-independent models).
    template <class T>
    void boundary_series(std::size_t order, Taylor<T>& a_out, Taylor<T>& b_out) const {
        require(!theta_dependent(), "boundary_series: angular warp has no mode-diagonal recursion");
        if (family == MetricFamily::NormalForm) {
            a_out = Taylor<T>(order, T(1));
            b_out = Taylor<T>(order, T(1));
            return;
        }
        Taylor<T> q(order, T(1));
        if (order >= 2) q[2] = T(1);
        a_out = inverse_series(q);
        Taylor<T> h(order, T(1));
        if (warped_family()) h += warp_series<T>(order) * scalar<T>(epsilon);
        b_out = q * h;
    }

    template <class T>
    Taylor<T> warp_series(std::size_t order) const {
        const Taylor<T> x = Taylor<T>::identity_x(order);
        if (profile == WarpProfile::CosTau) {
            // cos(tau) = x (1 + x^2)^{-1/2}
            Taylor<T> q(order, T(1));
            if (order >= 2) q[2] = T(1);
            return x * pow_series(q, T(-1) / T(2));
        }
        if constexpr (std::is_same_v<T, Rational>) {
            throw InvalidArgument("warp_series: OneMinusT2 profile involves pi and has no exact rational path");
        } else {
            // T = 1 - (2/pi) atan x, w = 1 - T^2 = (4/pi) atan x - (4/pi^2) atan^2 x
            const Taylor<T> at = atan_series<T>(order);
            return at * T(4.0 / pi) - (at * at) * T(4.0 / (pi * pi));
        }
    }

private:
    template <class T>
    static T scalar(Real v) {
        if constexpr (std::is_same_v<T, Rational>)
            return to_rational(v);
        else
            return T(v);
    }
};

}  // namespace dslab
