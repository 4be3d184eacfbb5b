#pragma once

// Cauchy problem for P u = 0 on n = 2 models g = sec^2 tau (d tau^2 - H d theta^2):
//   u_tt = -(H_t / 2H) u_t + H^{-1} u_thth - (H_th / 2H^2) u_th - lambda sec^2(t) u
// (t = tau, th = theta), by method of lines: 4th-order periodic differences in
// theta, classical RK4 in tau. Steps are graded toward the boundary so that
// h / (pi/2 - |tau|) stays bounded. The compactified time stored alongside is
// T = 2 tau / pi, so 1 - |T| is a boundary defining function.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "dslab/core.hpp"
#include "dslab/fit.hpp"
#include "dslab/formal_expansion.hpp"
#include "dslab/metric.hpp"
#include "dslab/mode_scattering.hpp"
#include "dslab/spectral.hpp"

namespace dslab {

struct GridSpec {
    int M = 256;           // theta points
    Real cfl = 0.5;        // h_max / d theta
    Real delta = 1e-3;     // stop at |T| = 1 - delta
    Real grade = 0.25;     // below this distance to the boundary h shrinks linearly
    Real blowup = 1e12;    // overflow guard on sup |u|

    GridSpec refined() const {
        GridSpec g = *this;
        g.M *= 2;
        return g;
    }
};

struct GridField {
    MetricModel model;
    Real lambda = 0.0;
    GridSpec grid;
    Real cfl_ratio = 0.0;
    std::vector<Real> tau;    // ascending
    std::vector<Real> theta;
    Eigen::MatrixXcd u;       // rows: times, columns: theta
    Eigen::MatrixXcd u_tau;
    std::vector<Real> energy;

    Real T(std::size_t i) const { return 2.0 * tau[i] / pi; }
    /// de Sitter boundary defining function cot|tau| at row i.
    Real x(std::size_t i) const { return 1.0 / std::tan(std::abs(tau[i])); }

    /// (1/M) sum_j u_j e^{-i k theta_j} on every row.
    Eigen::VectorXcd mode(int k) const {
        const int M = static_cast<int>(theta.size());
        Eigen::VectorXcd e(M);
        for (int j = 0; j < M; ++j) e(j) = std::exp(-I * Real(k) * theta[j]) / Real(M);
        return u * e;
    }

    std::size_t row_nearest(Real T_target) const {
        std::size_t best = 0;
        for (std::size_t i = 1; i < tau.size(); ++i)
            if (std::abs(T(i) - T_target) < std::abs(T(best) - T_target)) best = i;
        return best;
    }
};

namespace detail {

class WaveStepper {
public:
    WaveStepper(const MetricModel& m, Real lambda, const GridSpec& g) : m_(m), lambda_(lambda), g_(g) {
        require(m.n == 2, "evolve_cauchy: PDE evolution is implemented for n = 2");
        require(g.M >= 16, "evolve_cauchy: need at least 16 theta points");
        require(g.delta > 0.0 && g.delta < 0.5, "evolve_cauchy: delta must lie in (0, 1/2)");
        m.validate();
        dth_ = 2.0 * pi / g.M;
        theta_.resize(g.M);
        Real hmin = std::numeric_limits<Real>::infinity();
        for (int j = 0; j < g.M; ++j) {
            theta_[j] = j * dth_;
            for (Real tau : {0.0, 0.5, 1.0, 1.5}) hmin = std::min(hmin, m.H(tau, theta_[j]));
        }
        // RK4 reaches 2.83 on the imaginary axis; the 4th-order second
        // difference has spectral radius 16/3 / dth^2.
        limit_ = 2.83 / std::sqrt(16.0 / 3.0) * std::sqrt(std::max(hmin, 1e-3));
        if (!(g.cfl > 0.0 && g.cfl <= limit_))
            throw CFLViolation("evolve_cauchy: cfl " + std::to_string(g.cfl) + " exceeds stability bound " +
                               std::to_string(limit_));
    }

    const std::vector<Real>& theta() const { return theta_; }
    Real dtheta() const { return dth_; }

    void rhs(Real tau, const Eigen::VectorXcd& u, const Eigen::VectorXcd& v, Eigen::VectorXcd& du,
             Eigen::VectorXcd& dv) const {
        const int M = g_.M;
        const Real c = std::cos(tau);
        const Real pot = lambda_ / (c * c);
        du = v;
        dv.resize(M);
        const Real i12 = 1.0 / (12.0 * dth_), i12s = 1.0 / (12.0 * dth_ * dth_);
        for (int j = 0; j < M; ++j) {
            const Complex a2 = u((j + M - 2) % M), a1 = u((j + M - 1) % M), b1 = u((j + 1) % M),
                          b2 = u((j + 2) % M);
            const Complex uth = (-b2 + 8.0 * b1 - 8.0 * a1 + a2) * i12;
            const Complex uthth = (-b2 + 16.0 * b1 - 30.0 * u(j) + 16.0 * a1 - a2) * i12s;
            const Real H = m_.H(tau, theta_[j]);
            const Real Ht = m_.H_tau(tau, theta_[j]);
            const Real Hth = m_.H_theta(tau, theta_[j]);
            dv(j) = -0.5 * Ht / H * v(j) + uthth / H - 0.5 * Hth / (H * H) * uth - pot * u(j);
        }
    }

    Real energy(Real tau, const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) const {
        const int M = g_.M;
        Real e = 0.0;
        for (int j = 0; j < M; ++j) {
            const Complex uth = (u((j + 1) % M) - u((j + M - 1) % M)) / (2.0 * dth_);
            e += std::norm(v(j)) + std::norm(uth) / m_.H(tau, theta_[j]) + std::norm(u(j));
        }
        return e * dth_;
    }

    Real step_size(Real tau) const {
        const Real dist = 0.5 * pi - std::abs(tau);
        return g_.cfl * dth_ * std::min(1.0, dist / g_.grade);
    }

    /// RK4 from tau0 to tau1, recording every accepted state.
    template <class Record>
    void run(Eigen::VectorXcd u, Eigen::VectorXcd v, Real tau0, Real tau1, Record&& rec) const {
        const Real dir = tau1 > tau0 ? 1.0 : -1.0;
        Real t = tau0;
        Eigen::VectorXcd k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
        long steps = 0;
        while (dir * (tau1 - t) > 1e-15) {
            // step size at the end of the step nearest the boundary
            Real h = step_size(t);
            if (dir * t > 0.0) h = std::min(h, step_size(t + dir * h));
            h = std::min(h, std::abs(tau1 - t));
            const Real hs = dir * h;
            rhs(t, u, v, k1u, k1v);
            rhs(t + 0.5 * hs, u + 0.5 * hs * k1u, v + 0.5 * hs * k1v, k2u, k2v);
            rhs(t + 0.5 * hs, u + 0.5 * hs * k2u, v + 0.5 * hs * k2v, k3u, k3v);
            rhs(t + hs, u + hs * k3u, v + hs * k3v, k4u, k4v);
            u += hs / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            v += hs / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            t = (std::abs(tau1 - t) <= h) ? tau1 : t + hs;
            const Real sup = u.cwiseAbs().maxCoeff();
            if (!std::isfinite(sup) || sup > g_.blowup)
                throw BlowUp("evolve_cauchy: sup|u| = " + std::to_string(sup) + " at tau = " + std::to_string(t));
            rec(t, u, v);
            if (++steps > 10000000) throw NonConvergence("evolve_cauchy: step budget exhausted");
        }
    }

    Real limit() const { return limit_; }

private:
    MetricModel m_;
    Real lambda_;
    GridSpec g_;
    Real dth_ = 0.0;
    Real limit_ = 0.0;
    std::vector<Real> theta_;
};

struct Snapshot {
    Real tau;
    Eigen::VectorXcd u, v;
};

inline GridField assemble_field(const MetricModel& m, Real lambda, const GridSpec& g, const WaveStepper& ws,
                                std::vector<Snapshot> snaps) {
    std::sort(snaps.begin(), snaps.end(), [](const Snapshot& a, const Snapshot& b) { return a.tau < b.tau; });
    GridField f;
    f.model = m;
    f.lambda = lambda;
    f.grid = g;
    f.cfl_ratio = g.cfl;
    f.theta = ws.theta();
    f.u.resize(static_cast<Eigen::Index>(snaps.size()), g.M);
    f.u_tau.resize(static_cast<Eigen::Index>(snaps.size()), g.M);
    for (std::size_t i = 0; i < snaps.size(); ++i) {
        f.tau.push_back(snaps[i].tau);
        f.u.row(static_cast<Eigen::Index>(i)) = snaps[i].u.transpose();
        f.u_tau.row(static_cast<Eigen::Index>(i)) = snaps[i].v.transpose();
        f.energy.push_back(ws.energy(snaps[i].tau, snaps[i].u, snaps[i].v));
    }
    return f;
}

}  // namespace detail

enum class EvolveRange { Both, TowardPlus, TowardMinus };

/// Evolve Cauchy data from T0 (u = psi0, V u = psi1 with V = cos(tau) d_tau the
/// unit normal of the slice) toward |T| = 1 - delta.
inline GridField evolve_state(const Eigen::VectorXcd& u0, const Eigen::VectorXcd& ut0, Real T0,
                              const MetricModel& model, Real lambda, const GridSpec& grid,
                              EvolveRange range = EvolveRange::Both) {
    const Real Tend = 1.0 - grid.delta;
    require(std::abs(T0) <= Tend, "evolve_cauchy: T0 must lie in (-1 + delta, 1 - delta)");
    detail::WaveStepper ws(model, lambda, grid);
    require(u0.size() == grid.M && ut0.size() == grid.M, "evolve_cauchy: data size must equal grid.M");
    const Real tau0 = 0.5 * pi * T0;
    std::vector<detail::Snapshot> snaps{{tau0, u0, ut0}};
    auto rec = [&](Real t, const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) { snaps.push_back({t, u, v}); };
    if (range != EvolveRange::TowardMinus) ws.run(u0, ut0, tau0, 0.5 * pi * Tend, rec);
    if (range != EvolveRange::TowardPlus) ws.run(u0, ut0, tau0, -0.5 * pi * Tend, rec);
    return detail::assemble_field(model, lambda, grid, ws, std::move(snaps));
}

inline GridField evolve_cauchy(const std::function<Complex(Real)>& psi0, const std::function<Complex(Real)>& psi1,
                               Real T0, const MetricModel& model, const SpectralParams& p, const GridSpec& grid = {},
                               EvolveRange range = EvolveRange::Both) {
    require(p.n == 2, "evolve_cauchy: PDE evolution is implemented for n = 2");
    Eigen::VectorXcd u0(grid.M), ut0(grid.M);
    const Real c = std::cos(0.5 * pi * T0);
    for (int j = 0; j < grid.M; ++j) {
        const Real th = 2.0 * pi * j / grid.M;
        u0(j) = psi0(th);
        ut0(j) = psi1(th) / c;
    }
    return evolve_state(u0, ut0, T0, model, p.lambda, grid, range);
}

// ---------------------------------------------------------------------------
// Asymptotic fits
// ---------------------------------------------------------------------------

enum class FitBasis { Frames, Powers };

struct FitOptions {
    FitBasis basis = FitBasis::Frames;
    int frame_order = 48;
    int terms = 3;            // powers per branch in the Powers basis
    int power_step = 2;       // 2 for even models
    Real window = 100.0;      // fit over 1 - |T| in [delta, window * delta]
    Real free_window = 10.0;  // exponent fit over [delta, free_window * delta]
    Real log_ratio = 10.0;
    Real noise_floor = 1e-8;  // relative residual below which no log is claimed
};

struct AsymptoticFit {
    Side side = Side::Plus;
    int mode = 0;
    Complex g_plus, g_minus;
    Real exp_plus_fit = std::numeric_limits<Real>::quiet_NaN();
    Real exp_minus_fit = std::numeric_limits<Real>::quiet_NaN();
    bool log_flag = false;
    Real residual = 0.0;      // relative, of the fit that produced g
    Real residual_pure = 0.0; // Powers basis without logs
    Real residual_log = 0.0;  // Powers basis with x^{s_-+j} log x added
    Real condition = 0.0;
    int samples = 0;
};

namespace detail {

struct WindowData {
    std::vector<Real> x;  // cot|tau|
    std::vector<Complex> u;
};

inline WindowData window_samples(const GridField& f, Side side, int k, Real hi) {
    const Eigen::VectorXcd m = f.mode(k);
    WindowData w;
    const Real sg = sign_of(side);
    for (std::size_t i = 0; i < f.tau.size(); ++i) {
        const Real T = f.T(i);
        if (sg * T <= 0.0) continue;
        const Real xb = 1.0 - std::abs(T);
        if (xb < f.grid.delta * (1.0 - 1e-9) || xb > hi * f.grid.delta) continue;
        w.x.push_back(f.x(i));
        w.u.push_back(m(static_cast<Eigen::Index>(i)));
    }
    return w;
}

inline Real rel_residual(const LstsqResult& r, const Eigen::VectorXcd& b) {
    const Real nb = b.norm();
    return nb > 0.0 ? r.residual / nb : r.residual;
}

inline std::vector<Complex> dedupe_exponents(std::vector<Complex> e) {
    std::vector<Complex> out;
    for (const auto& v : e) {
        bool dup = false;
        for (const auto& w : out) dup = dup || std::abs(v - w) < 1e-9;
        if (!dup) out.push_back(v);
    }
    return out;
}

struct PowerFit {
    LstsqResult res;
    std::vector<Complex> exps;
    int log_cols = 0;
};

inline PowerFit power_fit(const WindowData& w, const SpectralParams& p, const FitOptions& o, bool with_log) {
    std::vector<Complex> e;
    for (int j = 0; j < o.terms; ++j) e.push_back(p.s_plus + Real(o.power_step * j));
    for (int j = 0; j < o.terms; ++j) e.push_back(p.s_minus + Real(o.power_step * j));
    PowerFit pf;
    pf.exps = dedupe_exponents(e);
    const int nl = with_log ? o.terms : 0;
    const auto rows = static_cast<Eigen::Index>(w.x.size());
    Eigen::MatrixXcd A(rows, static_cast<Eigen::Index>(pf.exps.size()) + nl);
    Eigen::VectorXcd b(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const Real x = w.x[static_cast<std::size_t>(i)];
        const Real L = std::log(x);
        for (std::size_t c = 0; c < pf.exps.size(); ++c) A(i, static_cast<Eigen::Index>(c)) = std::exp(pf.exps[c] * L);
        for (int j = 0; j < nl; ++j)
            A(i, static_cast<Eigen::Index>(pf.exps.size()) + j) = std::exp((p.s_minus + Real(o.power_step * j)) * L) * L;
        b(i) = w.u[static_cast<std::size_t>(i)];
    }
    pf.res = lstsq(A, b, 1e14);
    pf.log_cols = nl;
    pf.res.residual = rel_residual(pf.res, b);
    return pf;
}

}  // namespace detail

/// Per-mode fit of the field near Y_+ or Y_- against the boundary frames.
inline AsymptoticFit fit_asymptotics(const GridField& field, Side side, const SpectralParams& p, int k = 0,
                                     const FitOptions& opt = {}) {
    AsymptoticFit fit;
    fit.side = side;
    fit.mode = k;
    const auto w = detail::window_samples(field, side, k, std::max(opt.window, opt.free_window));
    const auto wf = detail::window_samples(field, side, k, opt.window);
    if (wf.x.size() < 8)
        throw RankDeficient("fit_asymptotics: only " + std::to_string(wf.x.size()) +
                            " samples in the window; evolve closer to the boundary");
    fit.samples = static_cast<int>(wf.x.size());

    // pure vs log-augmented power fits (log detection)
    const auto pure = detail::power_fit(wf, p, opt, false);
    const auto logf = detail::power_fit(wf, p, opt, true);
    fit.residual_pure = pure.res.residual;
    fit.residual_log = logf.res.residual;
    fit.log_flag = fit.residual_pure > opt.noise_floor &&
                   fit.residual_pure >= opt.log_ratio * std::max(fit.residual_log, 1e-300);

    if (opt.basis == FitBasis::Frames) {
        const MetricModel fm = field.model.theta_dependent() ? MetricModel::de_sitter(2) : field.model;
        const long mu = mode_eigenvalue(2, k);
        const auto fp = numeric_branch_frame(Branch::Plus, mu, p, fm, opt.frame_order);
        const auto fmn = numeric_branch_frame(Branch::Minus, mu, p, fm, opt.frame_order);
        const auto rows = static_cast<Eigen::Index>(wf.x.size());
        Eigen::MatrixXcd A(rows, 2);
        Eigen::VectorXcd b(rows);
        for (Eigen::Index i = 0; i < rows; ++i) {
            const Real x = wf.x[static_cast<std::size_t>(i)];
            Complex u = 0.0, du = 0.0, d2u = 0.0;
            eval_table(fp, Complex(1.0), p.s_plus, x, u, du, d2u);
            A(i, 0) = u;
            u = du = d2u = 0.0;
            eval_table(fmn, Complex(1.0), p.s_minus, x, u, du, d2u);
            A(i, 1) = u;
            b(i) = wf.u[static_cast<std::size_t>(i)];
        }
        const auto r = lstsq(A, b);
        fit.g_plus = r.coef(0);
        fit.g_minus = r.coef(1);
        fit.residual = detail::rel_residual(r, b);
        fit.condition = r.condition;
    } else {
        const auto& use = (p.regime == Regime::Threshold) ? logf : pure;
        fit.g_plus = use.res.coef(0);
        if (p.regime == Regime::Threshold)
            fit.g_minus = use.res.coef(static_cast<Eigen::Index>(use.exps.size()));  // x^s log x slot
        else
            for (std::size_t c = 0; c < use.exps.size(); ++c)
                if (std::abs(use.exps[c] - p.s_minus) < 1e-9) fit.g_minus = use.res.coef(static_cast<Eigen::Index>(c));
        fit.residual = use.res.residual;
        fit.condition = use.res.condition;
    }

    // free exponents by variable projection on the lower window
    if (p.regime != Regime::ComplexRoots) {
        std::vector<Real> xs;
        std::vector<Complex> us;
        for (std::size_t i = 0; i < w.x.size(); ++i) {
            const Real T = 2.0 / pi * std::atan(w.x[i]);  // 1 - |T| from x = cot|tau|
            if (T <= opt.free_window * field.grid.delta) {
                xs.push_back(w.x[i]);
                us.push_back(w.u[i]);
            }
        }
        if (xs.size() >= 6) {
            auto resid = [&](const std::vector<Real>& e) {
                const auto rows = static_cast<Eigen::Index>(xs.size());
                Eigen::MatrixXcd A(rows, 2);
                Eigen::VectorXcd b(rows);
                for (Eigen::Index i = 0; i < rows; ++i) {
                    const Real x = xs[static_cast<std::size_t>(i)];
                    A(i, 0) = std::pow(x, e[0]);
                    A(i, 1) = std::pow(x, e[1]);
                    b(i) = us[static_cast<std::size_t>(i)];
                }
                try {
                    return lstsq(A, b, 1e14).residual;
                } catch (const RankDeficient&) {
                    return std::numeric_limits<Real>::max();
                }
            };
            const auto nm = nelder_mead(resid, {p.s_plus.real(), p.s_minus.real()}, {0.05, -0.05}, 1e-15, 4000);
            fit.exp_plus_fit = std::max(nm.x[0], nm.x[1]);
            fit.exp_minus_fit = std::min(nm.x[0], nm.x[1]);
        }
    }
    return fit;
}

inline nlohmann::json to_json(const AsymptoticFit& f) {
    auto num = [](Real v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    return {{"side", to_string(f.side)},
            {"mode", f.mode},
            {"g_plus", complex_to_json(f.g_plus)},
            {"g_minus", complex_to_json(f.g_minus)},
            {"exp_plus_fit", num(f.exp_plus_fit)},
            {"exp_minus_fit", num(f.exp_minus_fit)},
            {"log_flag", f.log_flag},
            {"residual", f.residual},
            {"residual_pure", f.residual_pure},
            {"residual_log", f.residual_log},
            {"condition", f.condition},
            {"samples", f.samples}};
}

// ---------------------------------------------------------------------------
// Scattering through the Cauchy problem
// ---------------------------------------------------------------------------

struct CauchyModeResult {
    int mode = 0;
    Complex v_plus, v_minus;  // at Y_-
    AsymptoticFit fit;
};

struct CauchyScattering {
    std::vector<CauchyModeResult> modes;
    Real x_seed = 0.0;
    Real leakage = 0.0;  // largest off-data mode amplitude at the far end, relative
    GridField field;
};

struct CauchyOptions {
    GridSpec grid;
    FitOptions fit;
    int frame_order = 48;
    Real frame_tol = 1e-10;
    Real seed_cap = 0.5;         // largest seed x
    Real seed_cap_angular = 0.05;  // when the model couples modes
};

/// Seed the formal series with data (g+, g-) per mode near Y_+, evolve to
/// Y_-, fit there.
inline CauchyScattering scattering_via_cauchy(const std::vector<ModeData>& data, const SpectralParams& p,
                                              const MetricModel& model, const CauchyOptions& opt = {}) {
    require(p.n == 2 && model.n == 2, "scattering_via_cauchy: n = 2 only");
    require(!data.empty(), "scattering_via_cauchy: no mode data");
    const MetricModel fm = model.theta_dependent() ? MetricModel::de_sitter(2) : model;
    struct Seeded {
        CoeffTable<Complex> plus, minus;
    };
    std::vector<Seeded> frames;
    Real x_seed = model.theta_dependent() ? opt.seed_cap_angular : opt.seed_cap;
    for (const auto& d : data) {
        const long mu = mode_eigenvalue(2, d.mode.l);
        Seeded s{numeric_branch_frame(Branch::Plus, mu, p, fm, opt.frame_order),
                 numeric_branch_frame(Branch::Minus, mu, p, fm, opt.frame_order)};
        while (x_seed > 1e-3 && std::max(detail::frame_tail(s.plus, x_seed), detail::frame_tail(s.minus, x_seed)) >
                                    opt.frame_tol)
            x_seed *= 0.85;
        frames.push_back(std::move(s));
    }
    const int M = opt.grid.M;
    Eigen::VectorXcd u0 = Eigen::VectorXcd::Zero(M), ut0 = Eigen::VectorXcd::Zero(M);
    for (std::size_t q = 0; q < data.size(); ++q) {
        Complex u = 0.0, du = 0.0, d2u = 0.0;
        eval_table(frames[q].plus, data[q].g_plus, p.s_plus, x_seed, u, du, d2u);
        eval_table(frames[q].minus, data[q].g_minus, p.s_minus, x_seed, u, du, d2u);
        const Complex u_tau = -(1.0 + x_seed * x_seed) * du / x_seed;  // tau = atan(1/x)
        for (int j = 0; j < M; ++j) {
            const Complex e = std::exp(I * Real(data[q].mode.l) * (2.0 * pi * j / M));
            u0(j) += u * e;
            ut0(j) += u_tau * e;
        }
    }
    const Real T_seed = 2.0 / pi * std::atan(1.0 / x_seed);
    require(T_seed <= 1.0 - opt.grid.delta, "scattering_via_cauchy: seed lies beyond the evolution window");
    CauchyScattering out;
    out.x_seed = x_seed;
    out.field = evolve_state(u0, ut0, T_seed, model, p.lambda, opt.grid, EvolveRange::TowardMinus);

    Real data_amp = 0.0;
    for (const auto& d : data) {
        CauchyModeResult r;
        r.mode = d.mode.l;
        r.fit = fit_asymptotics(out.field, Side::Minus, p, d.mode.l, opt.fit);
        r.v_plus = r.fit.g_plus;
        r.v_minus = r.fit.g_minus;
        data_amp = std::max(data_amp, std::abs(out.field.mode(d.mode.l)(0)));
        out.modes.push_back(std::move(r));
    }
    Real leak = 0.0;
    for (int k = -M / 4; k <= M / 4; ++k) {
        bool in_data = false;
        for (const auto& d : data) in_data = in_data || d.mode.l == k;
        if (!in_data) leak = std::max(leak, std::abs(out.field.mode(k)(0)));
    }
    out.leakage = data_amp > 0.0 ? leak / data_amp : leak;
    return out;
}

// ---------------------------------------------------------------------------
// Uniqueness probe
// ---------------------------------------------------------------------------

struct UniquenessReport {
    Real sup_probe = 0.0;  // sup_theta |u| on the slice nearest T_probe
    Real sup_all = 0.0;
    Real T_probe = 0.0;
};

inline UniquenessReport decay_uniqueness_probe(const GridField& f, Real T_probe = 0.0) {
    UniquenessReport r;
    const auto i = f.row_nearest(T_probe);
    r.T_probe = f.T(i);
    r.sup_probe = f.u.row(static_cast<Eigen::Index>(i)).cwiseAbs().maxCoeff();
    r.sup_all = f.u.cwiseAbs().maxCoeff();
    return r;
}

struct UniquenessSweep {
    int order = 0;
    std::vector<Real> offsets;  // 1 - T at the seed
    std::vector<Real> sup_values;
    Real exponent = 0.0;        // fitted d log sup / d log offset
    Real predicted = 0.0;       // Re(s_- + N + 1 - s_+)
    Real control = 0.0;         // sup over |T| <= 1/2 for a genuine g_- = 1 solution
};

/// Cauchy data at 1 - T = offset of the first term left after an order-N
/// expansion with vanishing leading data, x^{s_- + N + 1} e^{i k theta}, evolved
/// to T_probe.
inline UniquenessSweep uniqueness_sweep(int N, const std::vector<Real>& offsets, const SpectralParams& p,
                                        const GridSpec& grid = {}, int k = 1, Real T_probe = 0.0) {
    require(p.n == 2, "uniqueness_sweep: n = 2 only");
    require(p.regime != Regime::ComplexRoots, "uniqueness_sweep: needs real indicial roots");
    UniquenessSweep sw;
    sw.order = N;
    sw.offsets = offsets;
    sw.predicted = (p.s_minus + Real(N + 1) - p.s_plus).real();
    const auto model = MetricModel::de_sitter(2);
    const Real sigma = p.s_minus.real() + N + 1;
    std::vector<Real> lx, ly;
    for (Real eps : offsets) {
        const Real T0 = 1.0 - eps;
        const Real x = 1.0 / std::tan(0.5 * pi * T0);
        Eigen::VectorXcd u0(grid.M), ut0(grid.M);
        for (int j = 0; j < grid.M; ++j) {
            const Complex e = std::exp(I * Real(k) * (2.0 * pi * j / grid.M));
            u0(j) = std::pow(x, sigma) * e;
            ut0(j) = -(1.0 + x * x) * sigma * std::pow(x, sigma - 1.0) * e;
        }
        GridSpec g = grid;
        g.delta = std::min(g.delta, 0.5 * eps);
        const auto f = evolve_state(u0, ut0, T0, model, p.lambda, g, EvolveRange::TowardMinus);
        const auto rep = decay_uniqueness_probe(f, T_probe);
        sw.sup_values.push_back(rep.sup_probe);
        lx.push_back(std::log(eps));
        ly.push_back(std::log(rep.sup_probe));
    }
    sw.exponent = linear_fit(lx, ly).slope;

    // control: a genuine solution with g_- = 1
    CauchyOptions co;
    co.grid = grid;
    const auto cs = scattering_via_cauchy({{{k, 0}, 0.0, 1.0}}, p, model, co);
    // sup over the interior slab: a single slice can sit on a node of the mode
    for (std::size_t i = 0; i < cs.field.tau.size(); ++i)
        if (std::abs(cs.field.T(i)) <= 0.5)
            sw.control = std::max(sw.control, cs.field.u.row(static_cast<Eigen::Index>(i)).cwiseAbs().maxCoeff());
    return sw;
}

}  // namespace dslab
