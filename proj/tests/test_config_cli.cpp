#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dslab/config.hpp"

using namespace dslab;

namespace {

struct Proc {
    int status;
    std::string out;
};

Proc run(const std::string& args) {
    const std::string cmd = std::string(DSLAB_CLI) + " " + args + " 2>/dev/null";
    Proc r{0, ""};
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {-1, ""};
    std::array<char, 4096> buf;
    while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe)) r.out.append(buf.data(), n);
    const int st = pclose(pipe);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::filesystem::path scratch_dir() {
    auto d = std::filesystem::temp_directory_path() / "dslab_cli_test";
    std::filesystem::create_directories(d);
    return d;
}

}  // namespace

TEST(Config, RoundTrip) {
    ExperimentConfig c;
    c.subcommand = "scatter";
    c.seed = 42;
    c.params.lambda = 0.1875;
    c.params.kmax = 12;
    c.params.tolerances = {{"determinant_defect", 1e-8}};
    c.params.model.family = "warped";
    c.params.model.epsilon = 0.05;
    c.params.offsets = {0.1, 1.0 / 3.0};
    const auto back = parse_config(dump_config(c));
    EXPECT_EQ(back, c);
    EXPECT_EQ(dump_config(back), dump_config(c));
}

TEST(Config, UnknownKeyRejectedWithPath) {
    try {
        parse_config(R"({"params": {"grid": {"M": 64, "dt": 0.1}}})");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("params.grid.dt"), std::string::npos) << e.what();
    }
    EXPECT_THROW(parse_config(R"({"colour": 1})"), ConfigError);
}

TEST(Config, ParseErrorHasLineAndColumn) {
    try {
        parse_config("{\n  \"seed\": 1,\n  \"params\": {\"n\": }\n}");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
}

TEST(Config, TolerancesMustBePositive) {
    EXPECT_THROW(parse_config(R"({"params": {"tolerances": {"x": 0}}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"params": {"tolerances": {"x": -1e-3}}})"), ConfigError);
    EXPECT_NO_THROW(parse_config(R"({"params": {"tolerances": {"x": 1e-3}}})"));
}

TEST(Config, TypeErrors) {
    EXPECT_THROW(parse_config(R"({"params": {"n": 2.5}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"params": {"lambda": "big"}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"subcommand": "plot"})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"schema_version": 2})"), ConfigError);
}

TEST(Config, SampleConfigsLoad) {
    for (const auto& e : std::filesystem::directory_iterator(DSLAB_CONFIG_DIR)) {
        if (e.path().extension() != ".json") continue;
        EXPECT_NO_THROW(load_config(e.path().string())) << e.path();
    }
}

// ---------------------------------------------------------------------------
// CLI
// ---------------------------------------------------------------------------

TEST(Cli, RootsJson) {
    const auto r = run("roots --n 2 --lambda 0 --json");
    ASSERT_EQ(r.status, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["schema_version"], 1);
    EXPECT_EQ(j["result"]["s_plus"], 1.0);
    EXPECT_EQ(j["result"]["s_minus"], 0.0);
    EXPECT_EQ(j["result"]["l_lambda"], 0.5);
    EXPECT_EQ(j["result"]["regime"], "IntegerGap");
}

TEST(Cli, ScatterCsvRowsAndReproducible) {
    const auto dir = scratch_dir();
    const std::string env = "DSLAB_OUT_DIR=" + dir.string() + " ";
    const std::string args = "scatter --n 2 --lambda 0.1875 --kmax 8 --out s.csv";
    ASSERT_EQ(std::system((env + DSLAB_CLI + " " + args + " > /dev/null").c_str()), 0);
    const auto first = slurp(dir / "s.csv");
    ASSERT_EQ(std::system((env + DSLAB_CLI + " " + args + " > /dev/null").c_str()), 0);
    EXPECT_EQ(slurp(dir / "s.csv"), first);
    int lines = 0;
    for (char c : first) lines += c == '\n';
    EXPECT_EQ(lines, 1 + 9);  // header + kmax + 1 modes
}

TEST(Cli, ConfigAndFlagOverride) {
    const auto path = scratch_dir() / "roots.json";
    std::ofstream(path) << R"({"schema_version": 1, "subcommand": "roots", "params": {"n": 3, "lambda": 1.0}})";
    auto j = nlohmann::json::parse(run("roots --json --config " + path.string()).out);
    EXPECT_EQ(j["result"]["regime"], "Threshold");
    j = nlohmann::json::parse(run("roots --json --lambda 0 --config " + path.string()).out);
    EXPECT_EQ(j["result"]["regime"], "IntegerGap");
}

TEST(Cli, BadConfigExitsTwo) {
    const auto path = scratch_dir() / "bad.json";
    std::ofstream(path) << R"({"params": {"n": 2, "typo": 1}})";
    EXPECT_EQ(run("roots --config " + path.string()).status, 2);
    EXPECT_EQ(run("roots --tol nonsense=1").status, 2);
}

TEST(Cli, ToleranceAssertionDecidesExit) {
    EXPECT_EQ(run("roots --n 2 --lambda 0.3 --tol sum_error=1e-12").status, 0);
    EXPECT_EQ(run("psigma-check --n 2 --lambda 0.1875 --sigma 0.5 --samples 4 --tol intertwining_float=1e-30").status, 1);
}

TEST(Cli, EverySubcommandRuns) {
    EXPECT_EQ(run("flow --samples 4").status, 0);
    EXPECT_EQ(run("flow --n 3 --samples 3").status, 0);
    EXPECT_EQ(run("expand --lambda 0.1875 --k 1 --model normal_form").status, 0);
    EXPECT_EQ(run("poisson --n 3 --s 0.5 --samples 4").status, 0);
    EXPECT_EQ(run("psigma-check --n 3 --lambda 0.1875 --sigma 0.5 --samples 4").status, 0);
    EXPECT_EQ(run("evolve --lambda 0.1875 --k 1 --g-plus 1 --g-minus 0 --M 64").status, 0);
    EXPECT_EQ(run("verify --criterion 1").status, 0);
}
