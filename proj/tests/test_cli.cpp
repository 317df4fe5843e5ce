#include "cli.hpp"

#include "ftparity/analytics.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using namespace ftparity;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "ftparity-run");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "ftparity_cli_test";
    fs::create_directories(dir);
    const fs::path p = dir / name;
    fs::remove(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST(Cli, MissingParamsFileExitsTwoWithoutOutput) {
    const fs::path out = scratch("missing.json");
    const auto r = invoke({"prep-cat", "--params", "/nonexistent/params.json", "--out", out.string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_FALSE(fs::exists(out));
    EXPECT_NE(r.err.find("parameter file"), std::string::npos);
}

TEST(Cli, BadArgumentsExitTwo) {
    EXPECT_EQ(invoke({"no-such-experiment"}).code, 2);
    EXPECT_EQ(invoke({"prep-cat", "--format", "xml"}).code, 2);
    EXPECT_EQ(invoke({"prep-cat", "--trajectories", "0"}).code, 2);
    EXPECT_EQ(invoke({}).code, 2);
    EXPECT_EQ(invoke({"error-budget", "--protocol", "ge"}).code, 2);
    EXPECT_EQ(invoke({"parity-decay", "--protocol", "ft", "--drive", "off"}).code, 2);
    EXPECT_EQ(invoke({"error-budget", "--trajectories", "10"}).code, 2);
}

TEST(Cli, UnknownParamsKeyExitsTwo) {
    const fs::path params = scratch("bad_params.json");
    std::ofstream(params) << R"({"chi_e": -93e3, "not_a_field": 1})";
    EXPECT_EQ(invoke({"prep-cat", "--params", params.string()}).code, 2);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(invoke({"--help"}).code, 0); }

TEST(Cli, JsonEmbedsResolvedParameters) {
    const fs::path params = scratch("params.json");
    std::ofstream(params) << R"({"n_th": 0.03})";
    const fs::path out = scratch("budget.json");
    const auto r = invoke({"error-budget", "--protocol", "gf", "--params", params.string(), "--trajectories", "1000",
                           "--n-max", "10", "--seed", "7", "--out", out.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = nlohmann::json::parse(slurp(out));
    EXPECT_EQ(doc["meta"]["experiment"], "error-budget");
    EXPECT_EQ(doc["meta"]["seed"], 7);
    EXPECT_EQ(doc["meta"]["version"], cli::kVersion);
    EXPECT_EQ(doc["meta"]["params"]["n_th"], 0.03);
    EXPECT_EQ(doc["meta"]["params"]["T1_eg"], 25e-6);
    const auto& ev = doc["data"]["events"];
    for (const char* col : {"label", "probability", "delta_chi_hz", "t0_s", "t1_s", "dephasing"})
        EXPECT_TRUE(ev.contains(col)) << col;
    EXPECT_EQ(doc["data"]["curve"]["N"].size(), 10u);

    SystemParams p;
    p.n_th = 0.03;
    const double total = total_dephasing_probability(error_event_table(p, ProtocolKind::pi_gf));
    EXPECT_NEAR(doc["data"]["totals"]["total_dephasing_probability"][0].get<double>(), total, 1e-15);
}

TEST(Cli, CsvHasMetaHeaderAndTables) {
    const auto r = invoke({"prep-cat", "--format", "csv", "--trajectories", "100"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("# meta: {", 0), 0u);
    EXPECT_NE(r.out.find("# table: rounds\nround,pass_probability,cumulative_success\n"), std::string::npos);
    EXPECT_NE(r.out.find("# table: summary\n"), std::string::npos);
}

TEST(Cli, ByteIdenticalReruns) {
    for (const char* fmt : {"csv", "json"}) {
        const fs::path a = scratch(std::string("run_a.") + fmt), b = scratch(std::string("run_b.") + fmt);
        const std::vector<std::string> base{"parity-decay", "--protocol", "gf", "--trajectories", "40",
                                            "--n-max",      "6",          "--seed", "3", "--format", fmt};
        auto args = base;
        args.insert(args.end(), {"--out", a.string()});
        ASSERT_EQ(invoke(args).code, 0);
        args = base;
        args.insert(args.end(), {"--out", b.string()});
        ASSERT_EQ(invoke(args).code, 0);
        EXPECT_EQ(slurp(a), slurp(b));
    }
}

TEST(Cli, SeedChangesStochasticOutput) {
    const auto a = invoke({"parity-decay", "--protocol", "gf", "--trajectories", "40", "--n-max", "6", "--seed", "1"});
    const auto b = invoke({"parity-decay", "--protocol", "gf", "--trajectories", "40", "--n-max", "6", "--seed", "2"});
    ASSERT_EQ(a.code, 0);
    ASSERT_EQ(b.code, 0);
    EXPECT_NE(nlohmann::json::parse(a.out)["data"], nlohmann::json::parse(b.out)["data"]);
}

TEST(Cli, T2SweepPeak) {
    const auto r = invoke({"t2-sweep"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = nlohmann::json::parse(r.out);
    const double peak = doc["data"]["summary"]["peak_t2_s"][0];
    EXPECT_NEAR(peak, 1.9e-3, 0.15 * 1.9e-3);
    const double bg = doc["data"]["summary"]["no_drive_t2_s"][0];
    EXPECT_NEAR(bg, 0.7e-3, 0.15 * 0.7e-3);
}
