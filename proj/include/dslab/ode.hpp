#pragma once

// Dormand-Prince 5(4) with PI step control. A post-step hook may modify the
// accepted state in place (used for projection onto first integrals).

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "dslab/core.hpp"

namespace dslab {

struct OdeOptions {
    Real rtol = 1e-10;
    Real atol = 1e-12;
    Real h0 = 0.0;  // 0: automatic
    Real hmax = std::numeric_limits<Real>::infinity();
    long max_steps = 1000000;
};

struct OdeStats {
    long accepted = 0;
    long rejected = 0;
    long evaluations = 0;
};

struct NoHook {
    template <class V>
    void operator()(Real, V&) const {}
};

template <class S>
using OdeVec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

/// Integrate y' = f(t, y) from t0 to t1 (either direction). After every
/// accepted step hook(t, y) may project y; observe(t, y) then sees it.
template <class S, class Rhs, class Hook = NoHook, class Observer = NoHook>
OdeVec<S> dopri5(Rhs&& f, Real t0, OdeVec<S> y, Real t1, const OdeOptions& opt = {}, Hook&& hook = {},
                 Observer&& observe = {}, OdeStats* stats = nullptr) {
    using V = OdeVec<S>;
    static constexpr Real c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr Real a21 = 1.0 / 5;
    static constexpr Real a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr Real a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr Real a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr Real a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
    static constexpr Real b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // b - b*, the embedded 4th-order difference
    static constexpr Real e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

    OdeStats st;
    const Real span = t1 - t0;
    if (span == 0.0) return y;
    const Real dir = span > 0 ? 1.0 : -1.0;

    auto err_norm = [&](const V& ynew, const V& yold, const V& err) {
        Real acc = 0.0;
        for (Eigen::Index i = 0; i < err.size(); ++i) {
            const Real sc = opt.atol + opt.rtol * std::max(std::abs(ynew(i)), std::abs(yold(i)));
            const Real r = std::abs(err(i)) / sc;
            acc += r * r;
        }
        return std::sqrt(acc / Real(err.size()));
    };

    V k1 = f(t0, y);
    ++st.evaluations;
    Real h = opt.h0;
    if (h <= 0.0) {
        Real d0 = 0.0, d1 = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const Real sc = opt.atol + opt.rtol * std::abs(y(i));
            d0 = std::max(d0, std::abs(y(i)) / sc);
            d1 = std::max(d1, std::abs(k1(i)) / sc);
        }
        h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    }
    h = std::min({h, std::abs(span), opt.hmax});

    Real t = t0;
    Real err_prev = 1e-4;
    bool last_rejected = false;
    while (dir * (t1 - t) > 0.0) {
        if (st.accepted + st.rejected >= opt.max_steps)
            throw NonConvergence("dopri5: step budget exhausted at t = " + std::to_string(t));
        bool final_step = false;
        if (h >= std::abs(t1 - t)) {
            h = std::abs(t1 - t);
            final_step = true;
        }
        const Real hs = dir * h;
        const V k2 = f(t + c2 * hs, V(y + hs * (a21 * k1)));
        const V k3 = f(t + c3 * hs, V(y + hs * (a31 * k1 + a32 * k2)));
        const V k4 = f(t + c4 * hs, V(y + hs * (a41 * k1 + a42 * k2 + a43 * k3)));
        const V k5 = f(t + c5 * hs, V(y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
        const V k6 = f(t + hs, V(y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
        const V ynew = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const V k7 = f(t + hs, ynew);
        st.evaluations += 6;
        const V err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const Real en = err_norm(ynew, y, err);
        if (!std::isfinite(en)) {
            ++st.rejected;
            h *= 0.2;
            last_rejected = true;
            if (h < 1e-14 * std::max(1.0, std::abs(t))) throw NonConvergence("dopri5: non-finite state");
            continue;
        }
        if (en <= 1.0) {
            t = final_step ? t1 : t + hs;
            y = ynew;
            hook(t, y);
            observe(t, y);
            k1 = f(t, y);  // hook may have changed y, so no FSAL reuse
            ++st.evaluations;
            ++st.accepted;
            // PI controller (Hairer's beta = 0.04)
            Real fac = 0.9 * std::pow(std::max(en, 1e-10), -0.7 / 5) * std::pow(err_prev, 0.04);
            fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 10.0);
            h = std::min(h * fac, opt.hmax);
            err_prev = std::max(en, 1e-4);
            last_rejected = false;
        } else {
            ++st.rejected;
            h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
            last_rejected = true;
            if (h < 1e-15 * std::max(1.0, std::abs(t))) throw NonConvergence("dopri5: step size underflow");
        }
    }
    if (stats) *stats = st;
    return y;
}

}  // namespace dslab
