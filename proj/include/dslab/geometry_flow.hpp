#pragma once

// Null bicharacteristics of p = xi^2/a - |eta|^2/b in 0-cotangent coordinates
// xi dx/x + eta dy/x, and the classical scattering map they induce.
//
// Near a boundary component the flow is that of the rescaled field W'_p on
// (x, y, eta_hat), eta_hat = eta/|xi|, which is smooth up to x = 0:
//
//     x'       = 2 sgn(xi) / a
//     y'       = -2 b^{-1} eta_hat
//     eta_hat' = d_y(b^{-1}) |eta_hat|^2 + sgn(xi) eta_hat d_x p_hat
//
// with p_hat = 1/a - |eta_hat|^2/b (zero on the characteristic set). Since
// x' never vanishes, the chart legs are integrated with x as the independent
// variable. Across the middle, |tau| < pi/4, the null geodesic flow of the
// conformal metric dtau^2 - H dw^2 is integrated in tau.
//
// Points of Y = S^1 use the angle theta; Y = S^{n-1} (n >= 3) is embedded in
// R^n with eta_hat a tangent vector.

#include <cmath>
#include <numeric>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dslab/core.hpp"
#include "dslab/metric.hpp"
#include "dslab/ode.hpp"

namespace dslab {

struct PhasePoint {
    Real x = 0.0;
    std::vector<Real> y;    // {theta} for n = 2, unit vector in R^n otherwise
    Real xi = 1.0;
    std::vector<Real> eta;  // {eta} for n = 2, tangent vector in R^n otherwise
    Side side = Side::Plus;
};

/// p/xi^2 at the point; zero on the characteristic set.
inline Real characteristic_residual(const PhasePoint& pt, const MetricModel& m) {
    const Real theta = m.n == 2 ? pt.y.at(0) : 0.0;
    Real e2 = 0.0;
    for (Real e : pt.eta) e2 += e * e;
    return 1.0 / m.a(pt.x) - e2 / (pt.xi * pt.xi) / m.b(pt.x, theta, pt.side);
}

struct FieldVector {
    Real dx = 0.0;
    std::vector<Real> dy;
    Real dxi = 0.0;  // fiber coordinates are projective: |xi| is held at 1
    std::vector<Real> deta_hat;
};

namespace detail {

inline void check_model_for_flow(const MetricModel& m) {
    m.validate();
    require(m.global(), "geometry_flow: model must have two boundary components (not NormalForm)");
    require(m.n == 2 || !m.theta_dependent(), "geometry_flow: angular warp only on S^1");
}

inline Real dot(const std::vector<Real>& a, const std::vector<Real>& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace detail

/// W'_p at a point of the boundary chart (x >= 0).
inline FieldVector hamilton_field(const PhasePoint& pt, const MetricModel& m) {
    detail::check_model_for_flow(m);
    require(pt.x >= 0.0, "hamilton_field: x must be >= 0");
    if (pt.xi == 0.0) throw InvalidArgument("hamilton_field: xi = 0 lies outside the boundary chart");
    const std::size_t dim = m.n == 2 ? 1 : static_cast<std::size_t>(m.n);
    require(pt.y.size() == dim && pt.eta.size() == dim, "hamilton_field: y/eta dimension mismatch");

    const Real sg = pt.xi > 0 ? 1.0 : -1.0;
    const Real x = pt.x;
    const Real theta = m.n == 2 ? pt.y[0] : 0.0;
    const Real a = m.a(x), ax = m.a_x(x);
    const Real b = m.b(x, theta, pt.side), bx = m.b_x(x, theta, pt.side);
    std::vector<Real> eh(dim);
    for (std::size_t i = 0; i < dim; ++i) eh[i] = pt.eta[i] / std::abs(pt.xi);
    const Real e2 = detail::dot(eh, eh);
    const Real dp_dx = -ax / (a * a) + bx / (b * b) * e2;

    FieldVector v;
    v.dx = 2.0 * sg / a;
    v.dy.resize(dim);
    v.deta_hat.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        v.dy[i] = -2.0 * eh[i] / b;
        v.deta_hat[i] = sg * eh[i] * dp_dx;
    }
    if (m.n == 2) {
        v.deta_hat[0] += -m.b_theta(x, theta, pt.side) / (b * b) * e2;
    } else {
        for (std::size_t i = 0; i < dim; ++i) v.deta_hat[i] += 2.0 / b * e2 * pt.y[i];
    }
    return v;
}

struct BoundaryLimit {
    Side side = Side::Minus;
    std::vector<Real> y;
    std::vector<Real> eta_hat;
    int sign_xi = -1;
};

struct TrajectorySample {
    Real tau = 0.0;  // global compactified time
    Real x = 0.0;    // boundary-chart x (cot|tau|)
    std::vector<Real> y;
    Real xi = 0.0;
    std::vector<Real> eta;
    Real p_residual = 0.0;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    BoundaryLimit end;
    Real arc = 0.0;            // length of the projected curve in Y
    Real delta_theta = 0.0;    // unwrapped angle change (n = 2)
    Real max_drift = 0.0;      // largest |p| seen before re-projection
    long steps = 0;
};

struct FlowOptions {
    Real rtol = 1e-10;
    Real atol = 1e-12;
    Real x_stop = 1e-6;
    Real x_switch = 1.0;
    long max_steps = 200000;
    bool record = true;
};

namespace detail {

// Chart-leg state: [y (dim), eta_hat (dim), arc]
// Bulk state:      [y (dim), sigma, eta (dim), arc]

class FlowIntegrator {
public:
    FlowIntegrator(const MetricModel& m, const FlowOptions& o)
        : m_(m), o_(o), dim_(m.n == 2 ? 1 : static_cast<std::size_t>(m.n)) {}

    Trajectory run(PhasePoint pt, int direction) {
        require(direction == 1 || direction == -1, "integrate_bicharacteristic: direction must be +1 or -1");
        require(pt.y.size() == dim_ && pt.eta.size() == dim_, "integrate_bicharacteristic: dimension mismatch");
        if (pt.xi == 0.0) throw InvalidArgument("integrate_bicharacteristic: xi = 0");
        Trajectory tr;
        if (m_.n == 2) theta0_ = pt.y[0];

        // Normalise the fiber and project onto p = 0.
        const Real axi = std::abs(pt.xi);
        for (auto& e : pt.eta) e /= axi;
        pt.xi = pt.xi > 0 ? 1.0 : -1.0;

        Side side = pt.side;
        Real x = pt.x;
        int sg = static_cast<int>(pt.xi);
        if (x < o_.x_stop && direction * sg < 0)
            throw InvalidArgument("integrate_bicharacteristic: start points out of the spacetime");
        std::vector<Real> y = pt.y, eh = pt.eta;
        Real arc = 0.0;

        if (x > o_.x_switch) {
            // Start in the middle: move to the tau picture first.
            Real sigma;
            std::vector<Real> eta;
            to_bulk(side, x, sg, eh, sigma, eta);
            Real tau = MetricModel::tau_of_x(x, side);
            bulk_leg(tr, tau, y, sigma, eta, arc, direction, side, x, sg, eh);
        } else if (direction * sg > 0) {
            chart_leg(tr, side, x, o_.x_switch, sg, y, eh, arc);
            Real sigma;
            std::vector<Real> eta;
            to_bulk(side, o_.x_switch, sg, eh, sigma, eta);
            Real tau = MetricModel::tau_of_x(o_.x_switch, side);
            bulk_leg(tr, tau, y, sigma, eta, arc, direction, side, x, sg, eh);
        }
        // Arriving leg: x decreases towards the boundary.
        std::vector<Real> y_far = y, eh_far = eh;
        Real arc_far = arc;
        const Real x2 = 2.0 * o_.x_stop;
        if (x > x2) {
            chart_leg(tr, side, x, x2, sg, y, eh, arc);
        }
        y_far = y;
        eh_far = eh;
        arc_far = arc;
        const Real x_far = x;
        chart_leg(tr, side, x, o_.x_stop, sg, y, eh, arc);

        // Linear extrapolation to x = 0.
        BoundaryLimit lim;
        lim.side = side;
        lim.sign_xi = sg;
        lim.y.resize(dim_);
        lim.eta_hat.resize(dim_);
        const Real w = x_far > o_.x_stop ? o_.x_stop / (x_far - o_.x_stop) : 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            lim.y[i] = y[i] + w * (y[i] - y_far[i]);
            lim.eta_hat[i] = eh[i] + w * (eh[i] - eh_far[i]);
        }
        tr.arc = arc + w * (arc - arc_far);
        if (m_.n != 2) {
            normalise(lim.y);
            project_tangent(lim.y, lim.eta_hat);
        }
        // At x = 0 the characteristic set is |eta_hat| = 1.
        const Real en = std::sqrt(dot(lim.eta_hat, lim.eta_hat));
        for (auto& e : lim.eta_hat) e /= en;
        if (m_.n == 2) tr.delta_theta = lim.y[0] - theta0_;
        tr.end = lim;
        return tr;
    }

private:
    const MetricModel& m_;
    FlowOptions o_;
    std::size_t dim_;
    Real theta0_ = 0.0;

    static void normalise(std::vector<Real>& v) {
        const Real r = std::sqrt(dot(v, v));
        for (auto& e : v) e /= r;
    }
    static void project_tangent(const std::vector<Real>& y, std::vector<Real>& v) {
        const Real d = dot(y, v);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= d * y[i];
    }
    Real theta_of(const std::vector<Real>& y) const { return m_.n == 2 ? y[0] : 0.0; }

    void to_bulk(Side side, Real x, int sg, const std::vector<Real>& eh, Real& sigma, std::vector<Real>& eta) const {
        sigma = -sign_of(side) * Real(sg) * (1.0 + x * x) / x;
        eta.resize(dim_);
        for (std::size_t i = 0; i < dim_; ++i) eta[i] = eh[i] / x;
    }

    void sample(Trajectory& tr, Real tau, Real x, const std::vector<Real>& y, Real xi, const std::vector<Real>& eta,
                Real pres) const {
        if (!o_.record) return;
        tr.samples.push_back({tau, x, y, xi, eta, pres});
    }

    /// x from x_from to x_to with fixed sgn(xi) on the given side.
    void chart_leg(Trajectory& tr, Side side, Real& x_from, Real x_to, int sg, std::vector<Real>& y,
                   std::vector<Real>& eh, Real& arc) {
        using V = OdeVec<Real>;
        const std::size_t d = dim_;
        V s(2 * d + 1);
        for (std::size_t i = 0; i < d; ++i) {
            s(i) = y[i];
            s(d + i) = eh[i];
        }
        s(2 * d) = arc;
        project_chart(x_from, s, side);

        auto rhs = [&](Real x, const V& st) {
            V out = V::Zero(st.size());
            const Real theta = m_.n == 2 ? st(0) : 0.0;
            const Real a = m_.a(x), ax = m_.a_x(x);
            const Real b = m_.b(x, theta, side), bx = m_.b_x(x, theta, side);
            Real e2 = 0.0;
            for (std::size_t i = 0; i < d; ++i) e2 += st(d + i) * st(d + i);
            const Real dp_dx = -ax / (a * a) + bx / (b * b) * e2;
            // d/dx = (a / (2 sg)) d/ds
            const Real j = a / (2.0 * sg);
            Real speed2 = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                out(i) = j * (-2.0 * st(d + i) / b);
                out(d + i) = j * (sg * st(d + i) * dp_dx);
                speed2 += out(i) * out(i);
            }
            if (m_.n == 2)
                out(d) += j * (-m_.b_theta(x, theta, side) / (b * b) * e2);
            else
                for (std::size_t i = 0; i < d; ++i) out(d + i) += j * (2.0 / b * e2 * st(i));
            out(2 * d) = std::sqrt(speed2);
            return out;
        };
        Real drift = 0.0;
        auto hook = [&](Real x, V& st) {
            drift = std::max(drift, std::abs(chart_residual(x, st, side)));
            project_chart(x, st, side);
        };
        auto obs = [&](Real x, const V& st) {
            ++tr.steps;
            std::vector<Real> yy(d), ee(d);
            for (std::size_t i = 0; i < d; ++i) {
                yy[i] = st(i);
                ee[i] = st(d + i);
            }
            sample(tr, MetricModel::tau_of_x(x, side), x, yy, Real(sg), ee, chart_residual(x, st, side));
        };
        OdeOptions opt;
        opt.rtol = o_.rtol;
        opt.atol = o_.atol;
        opt.max_steps = o_.max_steps;
        s = dopri5<Real>(rhs, x_from, s, x_to, opt, hook, obs);
        tr.max_drift = std::max(tr.max_drift, drift);
        for (std::size_t i = 0; i < d; ++i) {
            y[i] = s(i);
            eh[i] = s(d + i);
        }
        arc = s(2 * d);
        x_from = x_to;
    }

    Real chart_residual(Real x, const OdeVec<Real>& st, Side side) const {
        const std::size_t d = dim_;
        const Real theta = m_.n == 2 ? st(0) : 0.0;
        Real e2 = 0.0;
        for (std::size_t i = 0; i < d; ++i) e2 += st(d + i) * st(d + i);
        return 1.0 / m_.a(x) - e2 / m_.b(x, theta, side);
    }

    void project_chart(Real x, OdeVec<Real>& st, Side side) const {
        const std::size_t d = dim_;
        if (m_.n != 2) {
            Real r = 0.0;
            for (std::size_t i = 0; i < d; ++i) r += st(i) * st(i);
            r = std::sqrt(r);
            Real dd = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                st(i) /= r;
                dd += st(i) * st(d + i);
            }
            for (std::size_t i = 0; i < d; ++i) st(d + i) -= dd * st(i);
        }
        const Real theta = m_.n == 2 ? st(0) : 0.0;
        Real e2 = 0.0;
        for (std::size_t i = 0; i < d; ++i) e2 += st(d + i) * st(d + i);
        if (e2 == 0.0) throw InvalidArgument("geometry_flow: eta = 0 is not on the characteristic set");
        const Real target = m_.b(x, theta, side) / m_.a(x);
        const Real f = std::sqrt(target / e2);
        for (std::size_t i = 0; i < d; ++i) st(d + i) *= f;
    }

    /// Middle leg in tau from tau0 to the opposite (or same) chart switch.
    void bulk_leg(Trajectory& tr, Real tau0, std::vector<Real>& y, Real sigma, std::vector<Real> eta, Real& arc,
                  int direction, Side& side, Real& x, int& sg, std::vector<Real>& eh) {
        using V = OdeVec<Real>;
        const std::size_t d = dim_;
        // tau moves with d tau/ds = 2 sigma; follow the requested direction.
        const Real tdir = direction * sigma > 0 ? 1.0 : -1.0;
        const Real tau_sw = MetricModel::tau_of_x(o_.x_switch, Side::Plus);
        const Real tau1 = tdir * tau_sw;

        V s(2 * d + 2);
        for (std::size_t i = 0; i < d; ++i) {
            s(i) = y[i];
            s(d + 1 + i) = eta[i];
        }
        s(d) = sigma;
        s(2 * d + 1) = arc;
        project_bulk(tau0, s);

        auto rhs = [&](Real tau, const V& st) {
            V out = V::Zero(st.size());
            const Real theta = m_.n == 2 ? st(0) : 0.0;
            const Real H = m_.H(tau, theta), Ht = m_.H_tau(tau, theta);
            const Real sg_ = st(d);
            Real e2 = 0.0;
            for (std::size_t i = 0; i < d; ++i) e2 += st(d + 1 + i) * st(d + 1 + i);
            const Real j = 1.0 / (2.0 * sg_);  // d/dtau = d/ds / (2 sigma)
            Real speed2 = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                out(i) = j * (-2.0 * st(d + 1 + i) / H);
                speed2 += out(i) * out(i);
            }
            out(d) = j * (-Ht / (H * H) * e2);
            if (m_.n == 2)
                out(d + 1) = j * (-m_.H_theta(tau, theta) / (H * H) * e2);
            else
                for (std::size_t i = 0; i < d; ++i) out(d + 1 + i) = j * (2.0 / H * e2 * st(i));
            out(2 * d + 1) = std::sqrt(speed2);
            return out;
        };
        Real drift = 0.0;
        auto hook = [&](Real tau, V& st) {
            drift = std::max(drift, std::abs(bulk_residual(tau, st)));
            project_bulk(tau, st);
        };
        auto obs = [&](Real tau, const V& st) {
            ++tr.steps;
            std::vector<Real> yy(d), ee(d);
            for (std::size_t i = 0; i < d; ++i) {
                yy[i] = st(i);
                ee[i] = st(d + 1 + i);
            }
            sample(tr, tau, 1.0 / std::tan(std::abs(tau)), yy, st(d), ee, bulk_residual(tau, st));
        };
        OdeOptions opt;
        opt.rtol = o_.rtol;
        opt.atol = o_.atol;
        opt.max_steps = o_.max_steps;
        s = dopri5<Real>(rhs, tau0, s, tau1, opt, hook, obs);
        tr.max_drift = std::max(tr.max_drift, drift);

        side = tdir > 0 ? Side::Plus : Side::Minus;
        x = o_.x_switch;
        for (std::size_t i = 0; i < d; ++i) {
            y[i] = s(i);
            eta[i] = s(d + 1 + i);
        }
        arc = s(2 * d + 1);
        // xi = -side x sigma/(1+x^2), eta_chart = x eta_tau, then project.
        const Real xi = -sign_of(side) * x * s(d) / (1.0 + x * x);
        sg = xi > 0 ? 1 : -1;
        eh.resize(d);
        for (std::size_t i = 0; i < d; ++i) eh[i] = x * eta[i] / std::abs(xi);
        // Arriving means x decreases in the flow direction.
        if (direction * sg > 0) throw NonConvergence("geometry_flow: trajectory does not leave the middle region");
    }

    Real bulk_residual(Real tau, const OdeVec<Real>& st) const {
        const std::size_t d = dim_;
        const Real theta = m_.n == 2 ? st(0) : 0.0;
        Real e2 = 0.0;
        for (std::size_t i = 0; i < d; ++i) e2 += st(d + 1 + i) * st(d + 1 + i);
        return 1.0 - e2 / (m_.H(tau, theta) * st(d) * st(d));
    }

    void project_bulk(Real tau, OdeVec<Real>& st) const {
        const std::size_t d = dim_;
        if (m_.n != 2) {
            Real r = 0.0;
            for (std::size_t i = 0; i < d; ++i) r += st(i) * st(i);
            r = std::sqrt(r);
            Real dd = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                st(i) /= r;
                dd += st(i) * st(d + 1 + i);
            }
            for (std::size_t i = 0; i < d; ++i) st(d + 1 + i) -= dd * st(i);
        }
        const Real theta = m_.n == 2 ? st(0) : 0.0;
        Real e2 = 0.0;
        for (std::size_t i = 0; i < d; ++i) e2 += st(d + 1 + i) * st(d + 1 + i);
        const Real sgn = st(d) > 0 ? 1.0 : -1.0;
        st(d) = sgn * std::sqrt(e2 / m_.H(tau, theta));
    }
};

}  // namespace detail

/// Follow the bicharacteristic through start (direction +1 along W'_p, -1
/// against it) until it reaches a boundary component; the end point is the
/// limit extrapolated from x_stop and 2 x_stop.
inline Trajectory integrate_bicharacteristic(const PhasePoint& start, const MetricModel& model, int direction,
                                             const FlowOptions& opt = {}) {
    detail::check_model_for_flow(model);
    detail::FlowIntegrator fi(model, opt);
    return fi.run(start, direction);
}

struct BoundaryCovector {
    std::vector<Real> y;
    std::vector<Real> eta_hat;  // unit length
};

inline PhasePoint boundary_start(const BoundaryCovector& q, Side side, const MetricModel& m) {
    const std::size_t dim = m.n == 2 ? 1 : static_cast<std::size_t>(m.n);
    require(q.y.size() == dim && q.eta_hat.size() == dim, "scattering map: dimension mismatch");
    const Real en = std::sqrt(detail::dot(q.eta_hat, q.eta_hat));
    require(std::abs(en - 1.0) < 1e-8, "scattering map: eta_hat must have unit length");
    if (m.n != 2) {
        require(std::abs(detail::dot(q.y, q.y) - 1.0) < 1e-10, "scattering map: y must lie on the unit sphere");
        require(std::abs(detail::dot(q.y, q.eta_hat)) < 1e-10, "scattering map: eta_hat must be tangent at y");
    }
    return {0.0, q.y, 1.0, q.eta_hat, side};
}

/// S_cl: limit at Y_- of the bicharacteristic leaving Y_+ at q.
inline BoundaryCovector classical_scattering_map(const BoundaryCovector& q, const MetricModel& model,
                                                 const FlowOptions& opt = {}) {
    const auto tr = integrate_bicharacteristic(boundary_start(q, Side::Plus, model), model, 1, opt);
    if (tr.end.side != Side::Minus) throw NonConvergence("classical_scattering_map: trajectory returned to Y_+");
    return {tr.end.y, tr.end.eta_hat};
}

/// The same map with the roles of Y_+ and Y_- exchanged, read back on the
/// original curve: leave Y_- with the negated covector and negate again at
/// the end. Composing with classical_scattering_map gives the identity.
inline BoundaryCovector reverse_scattering_map(const BoundaryCovector& q, const MetricModel& model,
                                               const FlowOptions& opt = {}) {
    BoundaryCovector neg = q;
    for (auto& e : neg.eta_hat) e = -e;
    const auto tr = integrate_bicharacteristic(boundary_start(neg, Side::Minus, model), model, 1, opt);
    if (tr.end.side != Side::Plus) throw NonConvergence("reverse_scattering_map: trajectory returned to Y_-");
    BoundaryCovector out{tr.end.y, tr.end.eta_hat};
    for (auto& e : out.eta_hat) e = -e;
    return out;
}

/// Angle swept by a null geodesic of dtau^2 - H(tau) dtheta^2 between the
/// two boundaries: int H^{-1/2} dtau by adaptive Gauss-Kronrod.
inline Real delta_theta_quadrature(const MetricModel& m) {
    require(!m.theta_dependent(), "delta_theta_quadrature: needs a theta-independent warp");
    auto f = [&](Real tau) { return 1.0 / std::sqrt(m.H(tau)); };
    Real err = 0.0;
    return boost::math::quadrature::gauss_kronrod<Real, 61>::integrate(f, -0.5 * pi, 0.5 * pi, 15, 1e-14, &err);
}

}  // namespace dslab
