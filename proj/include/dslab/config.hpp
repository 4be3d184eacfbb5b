#pragma once

// Declarative experiment configs for the CLI: one JSON document per run.
// Parsing is strict; unknown keys and non-positive tolerances are errors.

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dslab/core.hpp"
#include "dslab/metric.hpp"

namespace dslab {

inline constexpr int kSchemaVersion = 1;

struct ModelConfig {
    std::string family = "de_sitter";  // de_sitter | normal_form | warped
    Real epsilon = 0.0;
    std::string profile = "cos_tau";   // cos_tau | one_minus_t2
    bool angular_sin = false;
    bool operator==(const ModelConfig&) const = default;
};

struct GridConfig {
    int M = 256;
    Real cfl = 0.5;
    Real delta = 1e-3;
    bool operator==(const GridConfig&) const = default;
};

struct ParamBlock {
    int n = 2;
    Real lambda = 0.0;
    int k = 0;
    int kmax = 8;
    int order = 4;
    Real sigma = 0.7;
    Real s = 0.0;     // poisson kernel exponent
    Real x = 1e-2;    // poisson evaluation height
    Real g_plus = 0.0;
    Real g_minus = 1.0;
    int samples = 16;
    ModelConfig model;
    GridConfig grid;
    std::map<std::string, Real> tolerances;
    std::string out;
    std::vector<Real> offsets{0.04, 0.02, 0.01, 0.005};
    std::string suite = "acceptance";
    bool operator==(const ParamBlock&) const = default;
};

struct ExperimentConfig {
    int schema_version = kSchemaVersion;
    std::string subcommand;
    std::uint64_t seed = 1;
    ParamBlock params;
    bool operator==(const ExperimentConfig&) const = default;
};

inline const std::vector<std::string>& subcommand_names() {
    static const std::vector<std::string> names{"roots",   "flow",    "expand", "poisson",
                                                "psigma-check", "scatter", "evolve", "verify"};
    return names;
}

inline MetricModel make_model(const ModelConfig& m, int n) {
    if (m.family == "de_sitter") return MetricModel::de_sitter(n);
    if (m.family == "normal_form") return MetricModel::normal_form(n);
    if (m.family == "warped") {
        WarpProfile p;
        if (m.profile == "cos_tau")
            p = WarpProfile::CosTau;
        else if (m.profile == "one_minus_t2")
            p = WarpProfile::OneMinusT2;
        else
            throw ConfigError("params.model.profile: unknown profile '" + m.profile + "'");
        return MetricModel::warped(n, m.epsilon, p, m.angular_sin);
    }
    throw ConfigError("params.model.family: unknown family '" + m.family + "'");
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const ExperimentConfig& c) {
    const auto& p = c.params;
    return nlohmann::json{
        {"schema_version", c.schema_version},
        {"subcommand", c.subcommand},
        {"seed", c.seed},
        {"params",
         {{"n", p.n},
          {"lambda", p.lambda},
          {"k", p.k},
          {"kmax", p.kmax},
          {"order", p.order},
          {"sigma", p.sigma},
          {"s", p.s},
          {"x", p.x},
          {"g_plus", p.g_plus},
          {"g_minus", p.g_minus},
          {"samples", p.samples},
          {"model",
           {{"family", p.model.family},
            {"epsilon", p.model.epsilon},
            {"profile", p.model.profile},
            {"angular_sin", p.model.angular_sin}}},
          {"grid", {{"M", p.grid.M}, {"cfl", p.grid.cfl}, {"delta", p.grid.delta}}},
          {"tolerances", p.tolerances},
          {"out", p.out},
          {"offsets", p.offsets},
          {"suite", p.suite}}},
    };
}

namespace detail {

class Reader {
public:
    Reader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + "expected an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.push_back(key);
        auto it = j_.find(key);
        if (it == j_.end()) return;
        try {
            out = it->template get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(field(key) + ": wrong type (" + it->type_name() + ")");
        }
    }

    // integers given as 3.0 are a type error, not a silent truncation
    void get_int(const char* key, int& out) {
        seen_.push_back(key);
        auto it = j_.find(key);
        if (it == j_.end()) return;
        if (!it->is_number_integer()) throw ConfigError(field(key) + ": expected an integer");
        out = it->get<int>();
    }

    const nlohmann::json* child(const char* key) {
        seen_.push_back(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            bool known = false;
            for (const auto& s : seen_) known = known || s == it.key();
            if (!known) throw ConfigError(field(it.key()) + ": unknown key");
        }
    }

private:
    std::string where() const { return path_.empty() ? "" : path_ + ": "; }
    const nlohmann::json& j_;
    std::string path_;
    std::vector<std::string> seen_;
};

inline void check_positive(Real v, const std::string& name) {
    if (!(v > 0.0)) throw ConfigError(name + ": must be positive, got " + std::to_string(v));
}

// 1-based line/column of a byte offset
inline std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace detail

inline void validate(const ExperimentConfig& c) {
    if (c.schema_version != kSchemaVersion)
        throw ConfigError("schema_version: unsupported version " + std::to_string(c.schema_version));
    if (!c.subcommand.empty()) {
        bool ok = false;
        for (const auto& s : subcommand_names()) ok = ok || s == c.subcommand;
        if (!ok) throw ConfigError("subcommand: unknown subcommand '" + c.subcommand + "'");
    }
    const auto& p = c.params;
    if (p.n < 2) throw ConfigError("params.n: must be >= 2");
    if (p.kmax < 0) throw ConfigError("params.kmax: must be >= 0");
    if (p.order < 0) throw ConfigError("params.order: must be >= 0");
    if (p.samples < 1) throw ConfigError("params.samples: must be >= 1");
    if (p.grid.M < 8) throw ConfigError("params.grid.M: must be >= 8");
    detail::check_positive(p.grid.cfl, "params.grid.cfl");
    detail::check_positive(p.grid.delta, "params.grid.delta");
    detail::check_positive(p.x, "params.x");
    for (const auto& [k, v] : p.tolerances) detail::check_positive(v, "params.tolerances." + k);
    for (Real o : p.offsets) detail::check_positive(o, "params.offsets");
    (void)make_model(p.model, p.n);
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    detail::Reader top(j, "");
    top.get_int("schema_version", c.schema_version);
    top.get("subcommand", c.subcommand);
    top.get("seed", c.seed);
    if (const auto* pj = top.child("params")) {
        auto& p = c.params;
        detail::Reader r(*pj, "params");
        r.get_int("n", p.n);
        r.get("lambda", p.lambda);
        r.get_int("k", p.k);
        r.get_int("kmax", p.kmax);
        r.get_int("order", p.order);
        r.get("sigma", p.sigma);
        r.get("s", p.s);
        r.get("x", p.x);
        r.get("g_plus", p.g_plus);
        r.get("g_minus", p.g_minus);
        r.get_int("samples", p.samples);
        r.get("tolerances", p.tolerances);
        r.get("out", p.out);
        r.get("offsets", p.offsets);
        r.get("suite", p.suite);
        if (const auto* mj = r.child("model")) {
            detail::Reader m(*mj, "params.model");
            m.get("family", p.model.family);
            m.get("epsilon", p.model.epsilon);
            m.get("profile", p.model.profile);
            m.get("angular_sin", p.model.angular_sin);
            m.finish();
        }
        if (const auto* gj = r.child("grid")) {
            detail::Reader g(*gj, "params.grid");
            g.get_int("M", p.grid.M);
            g.get("cfl", p.grid.cfl);
            g.get("delta", p.grid.delta);
            g.finish();
        }
        r.finish();
    }
    top.finish();
    validate(c);
    return c;
}

inline ExperimentConfig parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto [line, col] = detail::line_col(text, e.byte == 0 ? 0 : e.byte - 1);
        throw ConfigError("parse error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                          e.what());
    }
    return config_from_json(j);
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        throw ConfigError(path + ": " + msg.substr(e.kind().size() + 2));
    }
}

inline std::string dump_config(const ExperimentConfig& c) { return to_json(c).dump(2); }

}  // namespace dslab
