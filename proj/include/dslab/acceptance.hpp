#pragma once

// The ten acceptance checks, each returning a pass flag, a one-line detail
// and its raw metrics. Shared by `dslab verify` and the acceptance test.

#include <chrono>
#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <nlohmann/json.hpp>

#include "dslab/formal_expansion.hpp"
#include "dslab/geometry_flow.hpp"
#include "dslab/mode_scattering.hpp"
#include "dslab/pde.hpp"
#include "dslab/poisson.hpp"
#include "dslab/psigma.hpp"
#include "dslab/spectral.hpp"

namespace dslab {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    nlohmann::json metrics = nlohmann::json::object();
    double seconds = 0.0;
};

inline nlohmann::json to_json(const CriterionResult& r) {
    return nlohmann::json{{"id", r.id},           {"name", r.name},       {"pass", r.pass},
                          {"detail", r.detail},   {"metrics", r.metrics}, {"seconds", r.seconds}};
}

namespace acceptance {

namespace detail {

inline std::string fmt(Real v) {
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

inline double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline CriterionResult start(int id, std::string name) {
    CriterionResult r;
    r.id = id;
    r.name = std::move(name);
    return r;
}

inline Real wrap_angle(Real a) {
    a = std::fmod(a, 2.0 * pi);
    if (a > pi) a -= 2.0 * pi;
    if (a < -pi) a += 2.0 * pi;
    return a;
}

}  // namespace detail

// 1 ---------------------------------------------------------------------------
inline CriterionResult indicial_algebra() {
    auto r = detail::start(1, "indicial algebra");
    struct Row {
        int n;
        Real lambda;
        Regime expected;
    };
    // hand classification: gap 2 sqrt((n-1)^2/4 - lambda)
    const std::vector<Row> table{
        {2, 0.0, Regime::IntegerGap},    {2, 3.0 / 16, Regime::NonIntegerGap}, {2, 0.25, Regime::Threshold},
        {2, 1.0, Regime::ComplexRoots},  {3, 0.0, Regime::IntegerGap},         {3, 3.0 / 16, Regime::NonIntegerGap},
        {3, 0.25, Regime::NonIntegerGap}, {3, 1.0, Regime::Threshold},         {4, 0.0, Regime::IntegerGap},
        {4, 3.0 / 16, Regime::NonIntegerGap}, {4, 0.25, Regime::NonIntegerGap}, {4, 1.0, Regime::NonIntegerGap},
    };
    Real sum_err = 0.0, prod_err = 0.0;
    int mismatches = 0;
    for (const auto& row : table) {
        const auto p = compute_spectral(row.n, row.lambda);
        sum_err = std::max(sum_err, std::abs(p.s_plus + p.s_minus - Real(row.n - 1)));
        prod_err = std::max(prod_err, std::abs(p.s_plus * p.s_minus - row.lambda));
        if (p.regime != row.expected) ++mismatches;
    }
    r.pass = sum_err <= 1e-12 && prod_err <= 1e-12 && mismatches == 0;
    r.detail = "sum err " + detail::fmt(sum_err) + ", product err " + detail::fmt(prod_err) + ", regime mismatches " +
               std::to_string(mismatches) + "/12";
    r.metrics = {{"sum_error", sum_err}, {"product_error", prod_err}, {"regime_mismatches", mismatches}};
    return r;
}

// 2 ---------------------------------------------------------------------------
inline CriterionResult classical_scattering() {
    auto r = detail::start(2, "classical scattering map");
    const auto t0 = std::chrono::steady_clock::now();
    const auto m = MetricModel::de_sitter(2);
    boost::math::quadrature::sinh_sinh<Real> ss;
    const Real oracle = ss.integrate([](Real t) { return 1.0 / (1.0 + t * t); });
    Real dtheta_err = 0.0, map_err = 0.0;
    for (int i = 0; i < 16; ++i) {
        const Real th = 2.0 * pi * i / 16;
        for (Real eta : {1.0, -1.0}) {
            const auto tr = integrate_bicharacteristic(PhasePoint{0.0, {th}, 1.0, {eta}, Side::Plus}, m, 1);
            dtheta_err = std::max(dtheta_err, std::abs(std::abs(tr.delta_theta) - oracle));
            const auto q = classical_scattering_map({{th}, {eta}}, m);
            map_err = std::max(map_err, std::abs(detail::wrap_angle(q.y[0] - th - pi)));
            map_err = std::max(map_err, std::abs(q.eta_hat[0] - eta));
        }
    }
    const double secs = detail::elapsed(t0);
    r.pass = dtheta_err <= 1e-6 && map_err <= 1e-6 && secs < 1.0;
    r.detail = "|dtheta - pi| " + detail::fmt(dtheta_err) + ", antipodal err " + detail::fmt(map_err) + ", " +
               detail::fmt(secs) + " s";
    r.metrics = {{"oracle", oracle}, {"delta_theta_error", dtheta_err}, {"antipodal_error", map_err}, {"runtime", secs}};
    return r;
}

// 3 ---------------------------------------------------------------------------
inline CriterionResult frobenius_recursion() {
    auto r = detail::start(3, "Frobenius recursion");
    const auto p = compute_spectral(2, 3.0 / 16);
    const auto model = MetricModel::normal_form(2);
    const int N = 4;
    const auto series = build_series({{{1, 0}, 0.0, 1.0}}, p, model, N);
    const auto rep = series_residual(series, 1e-3, 1e-1);
    const Real need = p.s_minus.real() + N + 1 - 0.1;
    const auto frame = exact_branch_frame(Branch::Minus, 1, p, model, N);
    const bool have = frame.has_value();
    const bool a2 = have && (*frame)[2][0] == Rational(-1, 3);
    r.pass = rep.slope >= need && a2;
    r.detail = "slope " + detail::fmt(rep.slope) + " (need >= " + detail::fmt(need) + "), a_2 = " +
               (have ? (*frame)[2][0].str() : std::string("n/a"));
    r.metrics = {{"slope", rep.slope}, {"required", need}, {"a2", have ? (*frame)[2][0].str() : ""}};
    return r;
}

// 4 ---------------------------------------------------------------------------
inline CriterionResult threshold_log() {
    auto r = detail::start(4, "threshold log detection");
    const auto dS = MetricModel::de_sitter(2);
    auto psi0 = [](Real th) { return Complex(1.0 + 0.3 * std::cos(th)); };
    auto psi1 = [](Real th) { return Complex(0.5 + 0.2 * std::sin(th)); };

    const auto pt = compute_spectral(2, 0.25);
    const auto ft = evolve_cauchy(psi0, psi1, 0.0, dS, pt);
    Real worst_ratio = std::numeric_limits<Real>::infinity();
    bool flags_set = true;
    for (int k : {0, 1}) {
        const auto fit = fit_asymptotics(ft, Side::Plus, pt, k);
        worst_ratio = std::min(worst_ratio, fit.residual_pure / std::max(fit.residual_log, 1e-300));
        flags_set = flags_set && fit.log_flag;
    }
    const auto pn = compute_spectral(2, 3.0 / 16);
    const auto fn = evolve_cauchy(psi0, psi1, 0.0, dS, pn);
    bool flag_clear = true;
    for (int k : {0, 1}) flag_clear = flag_clear && !fit_asymptotics(fn, Side::Plus, pn, k).log_flag;

    r.pass = worst_ratio >= 10.0 && flags_set && flag_clear;
    r.detail = "pure/log residual " + detail::fmt(worst_ratio) + ", flag at 1/4 " + (flags_set ? "set" : "unset") +
               ", flag at 3/16 " + (flag_clear ? "unset" : "set");
    r.metrics = {{"residual_ratio", worst_ratio}, {"flag_threshold", flags_set}, {"flag_noninteger", !flag_clear}};
    return r;
}

// 5 ---------------------------------------------------------------------------
inline CriterionResult poisson_constants() {
    auto r = detail::start(5, "Poisson constants");
    boost::math::quadrature::tanh_sinh<Real> ts;
    Real quad_err = 0.0;
    for (int n : {2, 3, 4}) {
        const int d = n - 1;
        const Real area = d == 1 ? 2.0 : d == 2 ? 2.0 * pi : 4.0 * pi;
        for (Real s : {0.0, 0.5, 1.0, 1.5}) {
            const Real q =
                area * ts.integrate([&](Real rho) { return std::pow(rho, d - 1) * std::pow(1.0 - rho * rho, s); }, 0.0, 1.0);
            quad_err = std::max(quad_err, std::abs(pairing_constant(s, n) - q) / q);
        }
    }
    const Real c2 = pairing_constant(0.0, 2).real();
    const Real c3 = pairing_constant(0.0, 3).real();

    const auto p = compute_spectral(2, 3.0 / 16);
    const auto g = BandLimited::cosine({1.0});
    Real rec_err = 0.0;
    for (auto br : {Branch::Plus, Branch::Minus}) {
        const auto k = make_kernel(p, br);
        for (Real y : {0.0, 0.7, 2.0, 4.0}) rec_err = std::max(rec_err, std::abs(leading_coefficient(k, g, 1e-2, {y}) - std::cos(y)));
    }
    r.pass = quad_err <= 1e-10 && c2 == 2.0 && std::abs(c3 - pi) <= 1e-10 && rec_err <= 1e-4;
    r.detail = "quadrature rel err " + detail::fmt(quad_err) + ", C(2,0) = " + detail::fmt(c2) + ", C(3,0) - pi = " +
               detail::fmt(c3 - pi) + ", cos recovery err " + detail::fmt(rec_err);
    r.metrics = {{"quadrature_error", quad_err}, {"c_2_0", c2}, {"c_3_0", c3}, {"recovery_error", rec_err}};
    return r;
}

// 6 ---------------------------------------------------------------------------
inline CriterionResult psigma_identities(std::uint64_t seed = 1) {
    auto r = detail::start(6, "P_sigma identities");
    Real exact_res = 0.0, float_res = 0.0;
    bool all_exact = true;
    for (int n : {2, 3}) {
        const auto p = compute_spectral(n, 3.0 / 16);
        for (bool second : {false, true}) {
            const auto e = check_intertwining(Complex(0.75), 4, p, second);
            exact_res = std::max(exact_res, e.residual);
            all_exact = all_exact && e.exact;
            const auto f = check_intertwining(Complex(0.7, 0.3), 4, p, second, false);
            float_res = std::max(float_res, f.residual);
        }
    }

    const auto p2 = compute_spectral(2, 3.0 / 16);
    const auto bt = bump_test(0.3, 0.55);
    std::vector<Real> conj;
    for (int N : {128, 256, 512}) conj.push_back(check_conjugation(0.7, -0.4, sample_ball(N, 1e-2, 0, bt.u), p2));
    const Real order = std::min(std::log2(conj[0] / conj[1]), std::log2(conj[1] / conj[2]));

    Real null_res = 0.0;
    for (int n : {2, 3}) null_res = std::max(null_res, null_vector_residual(compute_spectral(n, 3.0 / 16), 1024, 0.99).residual);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<Real> U(0.0, 1.0);
    Real min_ratio = std::numeric_limits<Real>::infinity();
    int nonpositive = 0;
    for (int i = 0; i < 100; ++i) {
        const Real sigma = p2.s_hat_plus.real() + 0.05 + 2.0 * U(rng);
        const Real c = 0.6 * U(rng);
        const Real w = 0.05 + (0.97 - c - 0.05) * U(rng);
        const auto t = sum_tests({bump_test(c, w, 0, U(rng) - 0.5), bump_test(0.2 * U(rng), 0.5, 0, 1.0)});
        const Real q = quadratic_form(sigma, t, p2);
        if (!(q > 0.0)) ++nonpositive;
        min_ratio = std::min(min_ratio, q / weighted_norm2(sigma, t, p2));
    }

    r.pass = all_exact && exact_res == 0.0 && float_res < 1e-12 && order >= 3.5 && null_res < 1e-10 && nonpositive == 0;
    r.detail = "intertwining exact " + detail::fmt(exact_res) + " float " + detail::fmt(float_res) + ", FD order " +
               detail::fmt(order) + ", null " + detail::fmt(null_res) + ", nonpositive " + std::to_string(nonpositive) +
               "/100";
    r.metrics = {{"intertwining_exact", exact_res}, {"intertwining_float", float_res}, {"conjugation_residuals", conj},
                 {"order", order},  {"null_vector", null_res}, {"nonpositive", nonpositive},
                 {"min_ratio", min_ratio}, {"seed", seed}};
    return r;
}

// 7 ---------------------------------------------------------------------------
inline CriterionResult mode_zero_matrix() {
    auto r = detail::start(7, "mode-0 connection matrix");
    const auto c = connection_matrix(0, compute_spectral(2, 0.0));
    // closed-form basis {1, arctan t}; arctan(+-inf) = +-pi/2 fixes the entries
    Eigen::Matrix2cd oracle;
    oracle << -1.0, 0.0, pi, 1.0;
    const Real err = (c.matrix - oracle).cwiseAbs().maxCoeff();
    r.pass = err <= 1e-8;
    r.detail = "max entry error " + detail::fmt(err);
    r.metrics = {{"error", err}, {"condition", c.condition}};
    return r;
}

// 8 ---------------------------------------------------------------------------
inline CriterionResult ellipticity_shadow() {
    auto r = detail::start(8, "ellipticity shadow");
    const auto p = compute_spectral(2, 3.0 / 16);
    const auto sm = assemble_scattering(32, p);
    const auto [spread, rel] = sm.renormalized_spread(1, 32);
    const Complex ratio = symbol_ratio(p);
    const Real ratio_err = std::abs(ratio - I);
    r.pass = spread <= 10.0 && rel >= 1e-3 && ratio_err <= 1e-12 && symbol_elliptic(p);
    r.detail = "spread " + detail::fmt(spread) + ", min/max " + detail::fmt(rel) + ", |ratio - i| " + detail::fmt(ratio_err);
    r.metrics = {{"spread", spread}, {"relative_min", rel}, {"symbol_ratio", complex_to_json(ratio)}};
    return r;
}

// 9 ---------------------------------------------------------------------------
inline CriterionResult pde_cross_validation() {
    auto r = detail::start(9, "PDE/mode cross-validation");
    const auto t0 = std::chrono::steady_clock::now();
    const auto p = compute_spectral(2, 3.0 / 16);
    const auto dS = MetricModel::de_sitter(2);
    const int kmax = 8;
    std::vector<Eigen::Matrix2cd> oracle;
    for (int k = 0; k <= kmax; ++k) oracle.push_back(connection_matrix(k, p).matrix);
    std::vector<Real> errs;
    for (int M : {256, 512}) {
        CauchyOptions co;
        co.grid.M = M;
        std::vector<ModeData> dp, dm;
        for (int k = 0; k <= kmax; ++k) {
            dp.push_back({{k, 0}, 1.0, 0.0});
            dm.push_back({{k, 0}, 0.0, 1.0});
        }
        const auto a = scattering_via_cauchy(dp, p, dS, co);
        const auto b = scattering_via_cauchy(dm, p, dS, co);
        Real worst = 0.0;
        for (int k = 0; k <= kmax; ++k) {
            Eigen::Matrix2cd e;
            e << a.modes[k].v_plus, b.modes[k].v_plus, a.modes[k].v_minus, b.modes[k].v_minus;
            worst = std::max(worst, (e - oracle[k]).cwiseAbs().maxCoeff());
        }
        errs.push_back(worst);
    }
    const double secs = detail::elapsed(t0);
    const Real gain = errs[0] / errs[1];
    r.pass = errs[0] <= 1e-3 && gain >= 3.0 && secs < 300.0;
    r.detail = "err M=256 " + detail::fmt(errs[0]) + ", M=512 " + detail::fmt(errs[1]) + ", gain " + detail::fmt(gain) +
               ", " + detail::fmt(secs) + " s";
    r.metrics = {{"errors", errs}, {"gain", gain}, {"runtime", secs}};
    return r;
}

// 10 --------------------------------------------------------------------------
inline CriterionResult empirical_uniqueness() {
    auto r = detail::start(10, "empirical uniqueness");
    const auto p = compute_spectral(2, 0.0);
    const std::vector<Real> offsets{0.04, 0.02, 0.01, 0.005};
    bool ok = true;
    std::ostringstream os;
    nlohmann::json runs = nlohmann::json::array();
    for (int N : {2, 4}) {
        const auto sw = uniqueness_sweep(N, offsets, p);
        const Real target = p.s_minus.real() + N;
        ok = ok && std::abs(sw.exponent - target) <= 0.3;
        os << "N=" << N << " exponent " << detail::fmt(sw.exponent) << " (target " << target << ") ";
        runs.push_back({{"order", N}, {"exponent", sw.exponent}, {"target", target}, {"sup", sw.sup_values},
                        {"control", sw.control}});
    }
    r.pass = ok;
    r.detail = os.str();
    r.detail.pop_back();
    r.metrics = {{"runs", runs}, {"offsets", offsets}};
    return r;
}

}  // namespace acceptance

/// Run one criterion (1..10) or all of them (id = 0). Exceptions become
/// failures with the error text as detail.
inline std::vector<CriterionResult> run_acceptance(int id = 0, std::uint64_t seed = 1,
                                                   const std::function<void(const CriterionResult&)>& on_result = {}) {
    using Fn = std::function<CriterionResult()>;
    const std::vector<std::pair<std::string, Fn>> all{
        {"indicial algebra", acceptance::indicial_algebra},
        {"classical scattering map", acceptance::classical_scattering},
        {"Frobenius recursion", acceptance::frobenius_recursion},
        {"threshold log detection", acceptance::threshold_log},
        {"Poisson constants", acceptance::poisson_constants},
        {"P_sigma identities", [seed] { return acceptance::psigma_identities(seed); }},
        {"mode-0 connection matrix", acceptance::mode_zero_matrix},
        {"ellipticity shadow", acceptance::ellipticity_shadow},
        {"PDE/mode cross-validation", acceptance::pde_cross_validation},
        {"empirical uniqueness", acceptance::empirical_uniqueness},
    };
    require(id >= 0 && id <= static_cast<int>(all.size()), "run_acceptance: criterion id out of range");
    std::vector<CriterionResult> out;
    for (int i = 1; i <= static_cast<int>(all.size()); ++i) {
        if (id != 0 && id != i) continue;
        const auto t0 = std::chrono::steady_clock::now();
        CriterionResult res;
        try {
            res = all[i - 1].second();
        } catch (const std::exception& e) {
            res = acceptance::detail::start(i, all[i - 1].first);
            res.detail = std::string("error: ") + e.what();
        }
        res.seconds = acceptance::detail::elapsed(t0);
        if (on_result) on_result(res);
        out.push_back(std::move(res));
    }
    return out;
}

inline std::string format_result(const CriterionResult& r) {
    std::ostringstream os;
    os << (r.pass ? "PASS" : "FAIL") << "  [" << (r.id < 10 ? " " : "") << r.id << "] " << r.name << ": " << r.detail;
    return os.str();
}

}  // namespace dslab
