// dslab: command-line front end. Every subcommand reads an optional JSON
// config, applies flag overrides, runs, writes artifacts and checks any
// tolerances named in the config against the metrics it produced.
//
// exit codes: 0 ok, 1 assertion failed, 2 bad config/usage, 3 numerical error

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "dslab/dslab.hpp"

using namespace dslab;
using nlohmann::json;

namespace {

struct Run {
    ExperimentConfig cfg;
    bool json_out = false;
    json result = json::object();
    std::map<std::string, Real> metrics;  // checked against params.tolerances
    bool failed = false;                  // a built-in assertion failed
};

std::filesystem::path output_path(const std::string& out) {
    std::filesystem::path p(out);
    if (p.is_relative()) {
        if (const char* dir = std::getenv("DSLAB_OUT_DIR"); dir && *dir) p = std::filesystem::path(dir) / p;
    }
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    return p;
}

// fixed formatting so reruns are byte-identical
std::string num(Real v) {
    std::ostringstream os;
    os << std::setprecision(17) << (v == 0.0 ? 0.0 : v);
    return os.str();
}

void write_text(Run& run, const std::string& text) {
    if (run.cfg.params.out.empty()) return;
    const auto path = output_path(run.cfg.params.out);
    std::ofstream f(path);
    if (!f) throw ConfigError("params.out: cannot write '" + path.string() + "'");
    f << text;
    run.result["artifact"] = path.string();
}

// ---------------------------------------------------------------------------

void cmd_roots(Run& run) {
    const auto& p = run.cfg.params;
    const auto sp = compute_spectral(p.n, p.lambda);
    run.result = to_json(sp);
    run.result["symbol_ratio"] = complex_to_json(symbol_ratio(sp));
    run.result["symbol_elliptic"] = symbol_elliptic(sp);
    run.metrics["sum_error"] = std::abs(sp.s_plus + sp.s_minus - Real(p.n - 1));
    run.metrics["product_error"] = std::abs(sp.s_plus * sp.s_minus - p.lambda);
    if (!run.json_out) {
        std::cout << "s_+ = " << sp.s_plus << "  s_- = " << sp.s_minus << "  l = " << sp.l_lambda
                  << "  regime " << to_string(sp.regime) << "\n";
    }
}

void cmd_flow(Run& run) {
    const auto& p = run.cfg.params;
    const auto model = make_model(p.model, p.n);
    std::ostringstream csv;
    Real worst_return = 0.0, worst_drift = 0.0;
    json rows = json::array();
    if (p.n == 2) {
        csv << "theta_in,eta_in,theta_out,eta_out,delta_theta,max_drift\n";
        for (int i = 0; i < p.samples; ++i) {
            const Real th = 2.0 * pi * i / p.samples;
            const auto tr = integrate_bicharacteristic(boundary_start({{th}, {1.0}}, Side::Plus, model), model, 1);
            if (tr.end.side != Side::Minus) throw NonConvergence("flow: trajectory returned to Y_+");
            const BoundaryCovector q{tr.end.y, tr.end.eta_hat};
            const auto back = reverse_scattering_map(q, model);
            worst_return = std::max(worst_return, std::abs(std::remainder(back.y[0] - th, 2.0 * pi)));
            worst_drift = std::max(worst_drift, tr.max_drift);
            csv << num(th) << ",1," << num(q.y[0]) << "," << num(q.eta_hat[0]) << "," << num(tr.delta_theta) << ","
                << num(tr.max_drift) << "\n";
            rows.push_back({{"theta_in", th}, {"theta_out", q.y[0]}, {"delta_theta", tr.delta_theta}});
        }
        if (!model.theta_dependent()) run.result["delta_theta_quadrature"] = delta_theta_quadrature(model);
    } else {
        // points on a great circle of S^{n-1}, eta along it
        csv << "i,y_in,y_out,eta_out,max_drift\n";
        for (int i = 0; i < p.samples; ++i) {
            const Real a = 2.0 * pi * i / p.samples;
            std::vector<Real> y(p.n, 0.0), eta(p.n, 0.0);
            y[0] = std::cos(a);
            y[1] = std::sin(a);
            eta[0] = -std::sin(a);
            eta[1] = std::cos(a);
            const auto q = classical_scattering_map({y, eta}, model);
            const auto back = reverse_scattering_map(q, model);
            Real d = 0.0;
            for (int j = 0; j < p.n; ++j) d = std::max(d, std::abs(back.y[j] - y[j]));
            worst_return = std::max(worst_return, d);
            auto vec = [](const std::vector<Real>& v) {
                std::string s;
                for (std::size_t j = 0; j < v.size(); ++j) s += (j ? " " : "") + num(v[j]);
                return s;
            };
            csv << i << "," << vec(y) << "," << vec(q.y) << "," << vec(q.eta_hat) << ",0\n";
            rows.push_back({{"y_in", y}, {"y_out", q.y}, {"eta_out", q.eta_hat}});
        }
    }
    write_text(run, csv.str());
    run.result["model"] = to_string(model.family);
    run.result["samples"] = rows;
    run.result["round_trip_error"] = worst_return;
    run.metrics["round_trip_error"] = worst_return;
    run.metrics["max_drift"] = worst_drift;
    if (!run.json_out) std::cout << csv.str();
}

void cmd_expand(Run& run) {
    const auto& p = run.cfg.params;
    const auto sp = compute_spectral(p.n, p.lambda);
    const auto model = make_model(p.model, p.n);
    const auto series = build_series({{{p.k, 0}, p.g_plus, p.g_minus}}, sp, model, p.order);
    const auto rep = series_residual(series, 1e-3, 1e-1);
    run.result["spectral"] = to_json(sp);
    run.result["coefficients"] = series.coefficient_table();
    run.result["slope"] = rep.slope;
    run.result["expected"] = rep.expected;
    run.result["certified"] = rep.certified;
    run.result["radius_estimate"] = series.radius_estimate;
    const auto& m = series.modes.front();
    for (Branch br : {Branch::Plus, Branch::Minus}) {
        const auto& ex = br == Branch::Plus ? m.exact_plus : m.exact_minus;
        if (!ex) continue;
        json t = json::array();
        for (const auto& row : *ex) {
            json r = json::array();
            for (const auto& v : row) r.push_back(v.str());
            t.push_back(r);
        }
        run.result[std::string("exact_") + to_string(br)] = t;
    }
    run.metrics["slope_deficit"] = std::max(0.0, rep.expected - rep.slope);
    std::ostringstream csv;
    csv << "branch,j,k,re,im\n";
    for (const auto& row : run.result["coefficients"])
        csv << row["branch"].get<std::string>() << "," << row["j"] << "," << row["k"] << "," << num(row["re"]) << ","
            << num(row["im"]) << "\n";
    write_text(run, csv.str());
    if (!run.json_out) {
        std::cout << csv.str() << "residual slope " << rep.slope << " (expected " << rep.expected << ")"
                  << (rep.certified ? " certified" : "") << "\n";
    }
    if (!rep.certified) run.failed = true;
}

void cmd_poisson(Run& run) {
    const auto& p = run.cfg.params;
    const Real c = pairing_constant(p.s, p.n).real();
    const auto k = make_kernel(p.s, p.n);
    std::vector<Real> xi(p.n - 1, 0.0);
    xi[0] = 1.0;
    const auto g = BandLimited::cosine(xi);
    std::ostringstream csv;
    csv << "y,leading_coefficient,cos_y,error\n";
    Real worst = 0.0;
    json rows = json::array();
    for (int i = 0; i < p.samples; ++i) {
        const Real y0 = 2.0 * pi * i / p.samples;
        std::vector<Real> y(p.n - 1, 0.0);
        y[0] = y0;
        const Complex lc = leading_coefficient(k, g, p.x, y);
        const Real err = std::abs(lc - std::cos(y0));
        worst = std::max(worst, err);
        csv << num(y0) << "," << num(lc.real()) << "," << num(std::cos(y0)) << "," << num(err) << "\n";
        rows.push_back({{"y", y0}, {"value", complex_to_json(lc)}, {"error", err}});
    }
    write_text(run, csv.str());
    run.result = {{"n", p.n},
                  {"s", p.s},
                  {"x", p.x},
                  {"pairing_constant", c},
                  {"branch", to_string(k.branch)},
                  {"recovery", rows},
                  {"recovery_error", worst}};
    run.metrics["recovery_error"] = worst;
    if (!run.json_out) std::cout << "C_s^{-1} = " << num(c) << "  branch " << to_string(k.branch) << "\n" << csv.str();
}

void cmd_psigma(Run& run) {
    const auto& p = run.cfg.params;
    const auto sp = compute_spectral(p.n, p.lambda);
    const auto ex = check_intertwining(Complex(p.sigma), p.order, sp);
    const auto ex2 = check_intertwining(Complex(p.sigma), p.order, sp, true);
    const auto fl = check_intertwining(Complex(p.sigma, 0.3), p.order, sp, false, false);
    json r = {{"intertwining_exact", std::max(ex.residual, ex2.residual)},
              {"exact_arithmetic", ex.exact},
              {"intertwining_float", fl.residual},
              {"intertwining_float_relative", fl.residual / std::max(1.0, fl.scale)}};
    run.metrics["intertwining_exact"] = std::max(ex.residual, ex2.residual);
    run.metrics["intertwining_float"] = fl.residual;
    run.metrics["intertwining_float_relative"] = fl.residual / std::max(1.0, fl.scale);

    const auto bt = bump_test(0.3, 0.55);
    std::vector<Real> conj;
    for (int N : {128, 256, 512}) conj.push_back(check_conjugation(0.7, p.sigma, sample_ball(N, 1e-2, 0, bt.u), sp));
    const Real order = std::log2(conj[1] / conj[2]);
    r["conjugation"] = conj;
    r["conjugation_order"] = order;

    if (sp.real_roots()) {
        const auto nv = null_vector_residual(sp);
        r["null_vector"] = nv.residual;
        run.metrics["null_vector"] = nv.residual;
    }
    const bool form_regime =
        sp.real_roots() && p.sigma > sp.s_hat_plus.real() && p.lambda < 0.25 * (p.n - 1) * (p.n - 1);
    if (form_regime) {
        std::mt19937_64 rng(run.cfg.seed);
        std::uniform_real_distribution<Real> U(0.0, 1.0);
        Real mn = std::numeric_limits<Real>::infinity();
        int bad = 0;
        for (int i = 0; i < p.samples; ++i) {
            const Real c = 0.6 * U(rng);
            const Real w = 0.05 + (0.97 - c - 0.05) * U(rng);
            const auto t = bump_test(c, w, 0, U(rng) - 0.5);
            const Real q = quadratic_form(p.sigma, t, sp);
            if (!(q > 0.0)) ++bad;
            mn = std::min(mn, q / weighted_norm2(p.sigma, t, sp));
        }
        r["quadratic_form_min_ratio"] = mn;
        r["quadratic_form_nonpositive"] = bad;
        if (bad) run.failed = true;
    }
    run.result = r;
    if (!run.json_out) std::cout << r.dump(2) << "\n";
}

void cmd_scatter(Run& run) {
    const auto& p = run.cfg.params;
    const auto sp = compute_spectral(p.n, p.lambda);
    const auto sm = assemble_scattering(p.kmax, sp);
    std::ostringstream csv;
    csv << "k,m11_re,m11_im,m12_re,m12_im,m21_re,m21_im,m22_re,m22_im,"
           "renorm11,renorm12,renorm21,renorm22,cond\n";
    json rows = json::array();
    Real worst_det = 0.0;
    for (int k = 0; k <= p.kmax; ++k) {
        const auto& b = sm.blocks.at(k);
        const auto& r = sm.renormalized.at(k).symmetric;
        csv << k;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) csv << "," << num(b.matrix(i, j).real()) << "," << num(b.matrix(i, j).imag());
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) csv << "," << num(std::abs(r(i, j)));
        csv << "," << num(b.condition) << "\n";
        rows.push_back(to_json(b));
        worst_det = std::max(worst_det, std::abs(std::abs(b.matrix.determinant()) - 1.0));
    }
    write_text(run, csv.str());
    run.result = {{"spectral", to_json(sp)}, {"modes", rows}, {"symbol_ratio", complex_to_json(symbol_ratio(sp))}};
    if (p.kmax >= 2) {
        const auto [spread, rel] = sm.renormalized_spread(1, p.kmax);
        run.result["renormalized_spread"] = spread;
        run.result["renormalized_min_relative"] = rel;
        run.metrics["renormalized_spread"] = spread;
    }
    run.metrics["determinant_defect"] = worst_det;
    if (!run.json_out) std::cout << csv.str();
}

void cmd_evolve(Run& run) {
    const auto& p = run.cfg.params;
    require(p.n == 2, "evolve: n = 2 only");
    const auto sp = compute_spectral(p.n, p.lambda);
    const auto model = make_model(p.model, p.n);
    CauchyOptions co;
    co.grid.M = p.grid.M;
    co.grid.cfl = p.grid.cfl;
    co.grid.delta = p.grid.delta;
    const auto res = scattering_via_cauchy({{{p.k, 0}, p.g_plus, p.g_minus}}, sp, model, co);
    const auto& m = res.modes.front();
    auto fit = to_json(m.fit);
    run.result = {{"spectral", to_json(sp)},
                  {"model", to_string(model.family)},
                  {"mode", p.k},
                  {"data", {{"g_plus", p.g_plus}, {"g_minus", p.g_minus}}},
                  {"x_seed", res.x_seed},
                  {"leakage", res.leakage},
                  {"fit", fit}};
    run.metrics["leakage"] = res.leakage;
    run.metrics["fit_residual"] = m.fit.residual;
    if (model.family == MetricFamily::ExactDeSitter) {
        const auto c = connection_matrix(p.k, sp).matrix;
        const Eigen::Vector2cd want = c * Eigen::Vector2cd(p.g_plus, p.g_minus);
        const Real err = std::max(std::abs(want(0) - m.v_plus), std::abs(want(1) - m.v_minus));
        run.result["connection_error"] = err;
        run.metrics["connection_error"] = err;
    }
    // time slices of the chosen mode
    const auto& f = res.field;
    const Eigen::VectorXcd mk = f.mode(p.k);
    std::ostringstream csv;
    csv << "T,x,re,im,energy\n";
    const std::size_t stride = std::max<std::size_t>(1, f.tau.size() / 400);
    for (std::size_t i = 0; i < f.tau.size(); i += stride)
        csv << num(f.T(i)) << "," << num(f.x(i)) << "," << num(mk(i).real()) << "," << num(mk(i).imag()) << ","
            << num(f.energy[i]) << "\n";
    write_text(run, csv.str());
    if (!run.json_out) std::cout << run.result.dump(2) << "\n";
}

void cmd_verify(Run& run, int criterion) {
    const auto& p = run.cfg.params;
    if (p.suite != "acceptance") throw ConfigError("params.suite: unknown suite '" + p.suite + "'");
    const auto results = run_acceptance(criterion, run.cfg.seed, [&](const CriterionResult& r) {
        if (!run.json_out) std::cout << format_result(r) << std::endl;
    });
    json arr = json::array();
    int passed = 0;
    for (const auto& r : results) {
        arr.push_back(to_json(r));
        passed += r.pass;
    }
    run.result = {{"suite", p.suite}, {"criteria", arr}, {"passed", passed}, {"total", results.size()}};
    if (!run.json_out) std::cout << passed << "/" << results.size() << " criteria passed\n";
    if (passed != static_cast<int>(results.size())) run.failed = true;
    std::ostringstream csv;
    csv << "id,name,pass\n";
    for (const auto& r : results) csv << r.id << "," << r.name << "," << (r.pass ? 1 : 0) << "\n";
    write_text(run, csv.str());
}

// ---------------------------------------------------------------------------

// Binds a flag to a config field; applied only when the flag was given.
struct Overrides {
    std::vector<std::function<void(ExperimentConfig&)>> apply;

    template <class T, class Set>
    void bind(CLI::App* app, const std::string& flag, const std::string& help, Set set) {
        auto val = std::make_shared<T>();
        auto* opt = app->add_option(flag, *val, help);
        apply.push_back([opt, val, set](ExperimentConfig& c) {
            if (opt->count() > 0) set(c, *val);
        });
    }
};

void add_common(CLI::App* sub, Overrides& ov, std::string& config_path, bool& json_flag) {
    sub->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_flag("--json", json_flag, "structured JSON on stdout");
    ov.bind<int>(sub, "--n", "spacetime dimension", [](ExperimentConfig& c, int v) { c.params.n = v; });
    ov.bind<Real>(sub, "--lambda", "Klein-Gordon parameter", [](ExperimentConfig& c, Real v) { c.params.lambda = v; });
    ov.bind<std::string>(sub, "--out", "artifact path (relative to $DSLAB_OUT_DIR)",
                         [](ExperimentConfig& c, const std::string& v) { c.params.out = v; });
    ov.bind<std::uint64_t>(sub, "--seed", "seed for randomized checks",
                           [](ExperimentConfig& c, std::uint64_t v) { c.seed = v; });
    ov.bind<std::string>(sub, "--model", "de_sitter | normal_form | warped",
                         [](ExperimentConfig& c, const std::string& v) { c.params.model.family = v; });
    ov.bind<Real>(sub, "--epsilon", "warp size", [](ExperimentConfig& c, Real v) { c.params.model.epsilon = v; });
    ov.bind<std::string>(sub, "--profile", "cos_tau | one_minus_t2",
                         [](ExperimentConfig& c, const std::string& v) { c.params.model.profile = v; });
    ov.bind<std::vector<std::string>>(sub, "--tol", "tolerance name=value (repeatable)",
                                      [](ExperimentConfig& c, const std::vector<std::string>& v) {
                                          for (const auto& s : v) {
                                              const auto eq = s.find('=');
                                              if (eq == std::string::npos)
                                                  throw ConfigError("--tol: expected name=value, got '" + s + "'");
                                              c.params.tolerances[s.substr(0, eq)] = std::stod(s.substr(eq + 1));
                                          }
                                      });
}

int check_tolerances(const Run& run) {
    int bad = 0;
    for (const auto& [name, tol] : run.cfg.params.tolerances) {
        auto it = run.metrics.find(name);
        if (it == run.metrics.end())
            throw ConfigError("params.tolerances." + name + ": subcommand '" + run.cfg.subcommand +
                              "' produces no such metric");
        if (!(it->second <= tol)) {
            std::cerr << "assertion failed: " << name << " = " << it->second << " > " << tol << "\n";
            ++bad;
        }
    }
    return bad;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dslab: scattering experiments on asymptotically de Sitter model spaces"};
    app.require_subcommand(1);

    struct Sub {
        CLI::App* app;
        Overrides ov;
        std::string config;
        bool json = false;
    };
    std::map<std::string, Sub> subs;
    const std::map<std::string, std::string> help{
        {"roots", "indicial roots, regime and symbol ratio"},
        {"flow", "null bicharacteristics and the classical scattering map"},
        {"expand", "formal power/log expansion at the boundary"},
        {"poisson", "model Poisson kernel constants and leading-coefficient recovery"},
        {"psigma-check", "model-operator identities and quadratic form"},
        {"scatter", "mode-by-mode connection matrices"},
        {"evolve", "Cauchy evolution and asymptotic fits"},
        {"verify", "run the acceptance suite"},
    };
    for (const auto& name : subcommand_names()) {
        auto& s = subs[name];
        s.app = app.add_subcommand(name, help.at(name));
        add_common(s.app, s.ov, s.config, s.json);
    }
    auto bind_int = [&](const std::string& sub, const std::string& flag, const std::string& h, int ParamBlock::*f) {
        subs[sub].ov.bind<int>(subs[sub].app, flag, h, [f](ExperimentConfig& c, int v) { c.params.*f = v; });
    };
    auto bind_real = [&](const std::string& sub, const std::string& flag, const std::string& h, Real ParamBlock::*f) {
        subs[sub].ov.bind<Real>(subs[sub].app, flag, h, [f](ExperimentConfig& c, Real v) { c.params.*f = v; });
    };
    bind_int("flow", "--samples", "boundary sample points", &ParamBlock::samples);
    bind_int("expand", "--k", "Fourier mode", &ParamBlock::k);
    bind_int("expand", "--order", "expansion order N", &ParamBlock::order);
    bind_real("expand", "--g-plus", "leading data g_+", &ParamBlock::g_plus);
    bind_real("expand", "--g-minus", "leading data g_-", &ParamBlock::g_minus);
    bind_real("poisson", "--s", "kernel exponent", &ParamBlock::s);
    bind_real("poisson", "--x", "evaluation height", &ParamBlock::x);
    bind_int("poisson", "--samples", "sample points in y", &ParamBlock::samples);
    bind_real("psigma-check", "--sigma", "spectral parameter sigma", &ParamBlock::sigma);
    bind_int("psigma-check", "--order", "polynomial degree", &ParamBlock::order);
    bind_int("psigma-check", "--samples", "random bumps", &ParamBlock::samples);
    bind_int("scatter", "--kmax", "largest mode", &ParamBlock::kmax);
    bind_int("evolve", "--k", "Fourier mode", &ParamBlock::k);
    bind_real("evolve", "--g-plus", "leading data g_+", &ParamBlock::g_plus);
    bind_real("evolve", "--g-minus", "leading data g_-", &ParamBlock::g_minus);
    subs["evolve"].ov.bind<int>(subs["evolve"].app, "--M", "angular grid points",
                                [](ExperimentConfig& c, int v) { c.params.grid.M = v; });
    subs["evolve"].ov.bind<Real>(subs["evolve"].app, "--cfl", "CFL factor",
                                 [](ExperimentConfig& c, Real v) { c.params.grid.cfl = v; });
    subs["verify"].ov.bind<std::string>(subs["verify"].app, "--suite", "suite name",
                                        [](ExperimentConfig& c, const std::string& v) { c.params.suite = v; });
    int criterion = 0;
    subs["verify"].app->add_option("--criterion", criterion, "run a single criterion (1-10)")->check(CLI::Range(0, 10));

    CLI11_PARSE(app, argc, argv);

    Run run;
    std::string name;
    try {
        for (auto& [n, s] : subs) {
            if (!s.app->parsed()) continue;
            name = n;
            run.cfg = s.config.empty() ? ExperimentConfig{} : load_config(s.config);
            if (!run.cfg.subcommand.empty() && run.cfg.subcommand != n)
                throw ConfigError("subcommand: config is for '" + run.cfg.subcommand + "', not '" + n + "'");
            run.cfg.subcommand = n;
            for (auto& f : s.ov.apply) f(run.cfg);
            validate(run.cfg);
            run.json_out = s.json;
        }
        if (name == "roots") cmd_roots(run);
        else if (name == "flow") cmd_flow(run);
        else if (name == "expand") cmd_expand(run);
        else if (name == "poisson") cmd_poisson(run);
        else if (name == "psigma-check") cmd_psigma(run);
        else if (name == "scatter") cmd_scatter(run);
        else if (name == "evolve") cmd_evolve(run);
        else if (name == "verify") cmd_verify(run, criterion);
        const int bad = check_tolerances(run);
        if (run.json_out) {
            json out = {{"schema_version", kSchemaVersion},
                        {"subcommand", name},
                        {"config", to_json(run.cfg)},
                        {"result", run.result},
                        {"ok", bad == 0 && !run.failed}};
            std::cout << out.dump(2) << "\n";
        }
        return (bad == 0 && !run.failed) ? 0 : 1;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const InvalidArgument& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 3;
    }
}
