// test_cli.cpp — config round trip, presets, command outputs and exit codes
#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "zenoscope/commands.hpp"

using namespace zenoscope;
namespace fs = std::filesystem;
using config::RunConfig;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// data rows of a CSV, skipping '#' metadata and the header
std::vector<std::vector<std::string>> rows(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::vector<std::string>> out;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (header) {
            header = false;
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
        out.push_back(cells);
    }
    return out;
}

std::string header(const fs::path& p) {
    std::ifstream in(p);
    for (std::string line; std::getline(in, line);)
        if (!line.empty() && line[0] != '#') return line;
    return {};
}

int run_cli(const std::string& args) {
    int status = std::system((std::string(ZENOSCOPE_CLI_PATH) + " " + args + " 2>/dev/null").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("zenoscope_test_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }
    std::string path(const std::string& name) const { return (dir / name).string(); }
    fs::path dir;
    std::ostringstream log;
};

RunConfig small_curve() {
    RunConfig c;
    c.command = "curve";
    c.grid = {0.1, 4.0, 12};
    return c;
}

} // namespace

TEST(Config, RoundTripIsLossless) {
    RunConfig c = config::preset("fig6");
    c.model.temp = bath::Temperature::inverse(3.25);
    c.model.quad.nodes_2d = 96;
    c.theta = 0.123456789012345678;
    c.G_list = {0.1, 1.0 / 3.0};
    c.mode_list = {"modified"};
    c.oracle.deltas = {0.04, 0.02};
    const auto j = config::to_json(c);
    const auto back = config::from_json(config::json::parse(j.dump()));
    EXPECT_EQ(config::to_json(back).dump(), j.dump());
    EXPECT_EQ(back.theta, c.theta);
    EXPECT_EQ(back.G_list[1], 1.0 / 3.0);

    RunConfig d;
    d.model.bath = bath::SpectralDensity::discrete({{1.25, {0.1, -0.2}}, {2.0, {0.3, 0.0}}});
    auto back2 = config::from_json(config::to_json(d));
    ASSERT_EQ(back2.model.bath.modes.size(), 2u);
    EXPECT_EQ(back2.model.bath.modes[0].g, std::complex<double>(0.1, -0.2));
    EXPECT_TRUE(back2.model.temp.is_zero());
}

TEST(Config, MalformedInputIsInvalid) {
    EXPECT_THROW(config::from_json(config::json::parse(R"({"model": {"eps": "x"}})")), InvalidParameters);
    EXPECT_THROW(config::from_json(config::json::parse(R"({"model": {"bath": {"kind": "foo"}}})")), InvalidParameters);
    EXPECT_THROW(config::preset("fig9"), InvalidParameters);
}

TEST(Config, PresetsHardCodePaperParameters) {
    for (const auto& name : config::preset_names()) {
        auto c = config::preset(name);
        EXPECT_EQ(c.model.eps, 1.0);
        EXPECT_EQ(c.model.delta, 0.05);
        EXPECT_EQ(c.model.bath.s, 2.0);
        EXPECT_EQ(c.model.bath.omega_c, 1.0);
        EXPECT_TRUE(c.model.temp.is_zero());
        EXPECT_NO_THROW(c.validate());
    }
    EXPECT_EQ(config::preset("fig1b").theta, std::numbers::pi / 2);
    EXPECT_EQ(config::preset("fig5a").mode, "modified");
    EXPECT_EQ(config::preset("fig2a").theta_list.size(), 4u);
}

TEST_F(CliTest, CurveWritesMetadataAndValues) {
    auto c = small_curve();
    c.output = path("c.csv");
    ASSERT_EQ(commands::dispatch(c, log), 0);
    const std::string text = slurp(c.output);
    EXPECT_NE(text.find("# zenoscope "), std::string::npos);
    EXPECT_NE(text.find("\"nodes_2d\":128"), std::string::npos);
    EXPECT_EQ(header(c.output), "tau,gamma");
    auto r = rows(c.output);
    ASSERT_EQ(r.size(), 12u);
    rates::RateEvaluator ev(state::make_state(0, 0), c.model, rates::RateMode::Effective);
    EXPECT_EQ(std::stod(r[5][1]), ev(std::stod(r[5][0])).gamma);  // 17 digits round-trip exactly
}

TEST_F(CliTest, HeaderReconstructsRun) {
    auto c = small_curve();
    c.theta = 0.7;
    c.output = path("c.csv");
    ASSERT_EQ(commands::dispatch(c, log), 0);
    std::ifstream in(c.output);
    std::string line, cfgline;
    while (std::getline(in, line))
        if (line.rfind("# config: ", 0) == 0) cfgline = line.substr(10);
    auto back = config::from_json(config::json::parse(cfgline));
    back.output = path("again.csv");
    ASSERT_EQ(commands::dispatch(back, log), 0);
    EXPECT_EQ(rows(c.output), rows(back.output));
}

TEST_F(CliTest, BothModesAndDeterminism) {
    auto c = small_curve();
    c.mode = "both";
    c.theta = 1.0;
    c.output = path("a.csv");
    ASSERT_EQ(commands::dispatch(c, log), 0);
    EXPECT_EQ(header(c.output), "tau,gamma_effective,gamma_modified");
    c.output = path("b.csv");
    ASSERT_EQ(commands::dispatch(c, log), 0);
    auto a = slurp(path("a.csv")), b = slurp(path("b.csv"));
    // identical apart from the recorded output path
    auto strip = [](std::string s, const std::string& p) { return s.replace(s.find(p), p.size(), ""); };
    EXPECT_EQ(strip(a, path("a.csv")), strip(b, path("b.csv")));
}

TEST_F(CliTest, ZeroTunnelingGivesZeroColumn) {
    auto c = small_curve();
    c.model.delta = 0.0;
    c.output = path("z.csv");
    ASSERT_EQ(commands::dispatch(c, log), 0);
    for (const auto& r : rows(c.output)) EXPECT_EQ(std::stod(r[1]), 0.0);
}

TEST_F(CliTest, MultipleCouplingsWriteOneFileEach) {
    auto c = small_curve();
    c.G_list = {1.0, 2.0};
    c.output = path("m.csv");
    ASSERT_EQ(commands::dispatch(c, log), 0);
    EXPECT_TRUE(fs::exists(path("m_G1.csv")));
    EXPECT_TRUE(fs::exists(path("m_G2.csv")));
}

TEST_F(CliTest, JsonFormat) {
    auto c = small_curve();
    c.format = "json";
    c.output = path("c.json");
    ASSERT_EQ(commands::dispatch(c, log), 0);
    auto j = config::json::parse(slurp(c.output));
    EXPECT_EQ(j["columns"][1], "gamma");
    EXPECT_EQ(j["rows"].size(), 12u);
    EXPECT_EQ(j["tool"]["version"], ZENOSCOPE_VERSION);
}

TEST_F(CliTest, SingleCellSweepEqualsCurve) {
    auto c = small_curve();
    c.theta = 0.4;
    c.mode = "modified";
    c.output = path("c.csv");
    ASSERT_EQ(commands::dispatch(c, log), 0);
    auto s = c;
    s.command = "sweep";
    s.G_list = {1.0};
    s.theta_list = {0.4};
    s.mode_list = {"modified"};
    s.output = path("s.csv");
    ASSERT_EQ(commands::dispatch(s, log), 0);
    EXPECT_EQ(header(s.output), "G,theta,phi,mode,tau,gamma");
    auto a = rows(c.output), b = rows(s.output);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i][0], b[i][4]);
        EXPECT_EQ(a[i][1], b[i][5]);
    }
}

TEST_F(CliTest, SweepOrderingIsLexicographic) {
    RunConfig s;
    s.command = "sweep";
    s.grid = {0.5, 2.0, 3};
    s.G_list = {2.0, 1.0};
    s.theta_list = {0.5, 0.1};
    s.mode_list = {"modified", "effective"};
    s.output = path("s.csv");
    ASSERT_EQ(commands::dispatch(s, log), 0);
    auto r = rows(s.output);
    ASSERT_EQ(r.size(), 2u * 2 * 2 * 3);
    EXPECT_EQ(r[0][0], "1");
    EXPECT_EQ(r[0][3], "effective");
    EXPECT_EQ(r[3][3], "modified");
    EXPECT_EQ(std::stod(r[6][1]), 0.5);
    EXPECT_EQ(r.back()[0], "2");
}

TEST_F(CliTest, EmptySweepListIsInvalid) {
    RunConfig s;
    s.command = "sweep";
    s.G_list = {};
    s.theta_list = {0.1};
    s.output = path("s.csv");
    EXPECT_EQ(commands::dispatch(s, log), 2);
}

TEST_F(CliTest, PhasesTable) {
    RunConfig p;
    p.command = "phases";
    p.model.bath.G = 1.5;
    p.output = path("p.csv");
    ASSERT_EQ(commands::dispatch(p, log), 0);
    EXPECT_EQ(header(p.output), "t,phi_R,phi_I,phi_R1,phi_R2,abs_C,phi_R_quad,phi_I_quad,phi_R1_quad,phi_R2_quad");
    auto r = rows(p.output);
    ASSERT_EQ(r.size(), 51u);
    EXPECT_EQ(std::stod(r[0][0]), 0.0);
    EXPECT_EQ(std::stod(r[0][1]), 0.0);
    EXPECT_EQ(std::stod(r[0][2]), 0.0);
    EXPECT_NEAR(std::stod(r[0][3]), 6.0, 1e-14);
    EXPECT_NEAR(std::stod(r[0][4]), 6.0, 1e-14);
    EXPECT_EQ(std::stod(r[0][5]), 1.0);
    EXPECT_NEAR(std::stod(r.back()[1]), 6.0, 1e-5);  // t = 1e3
    for (const auto& row : r)
        for (int k = 1; k <= 4; ++k) {
            double a = std::stod(row[k]), b = std::stod(row[k + 5]);
            EXPECT_LE(std::abs(a - b), 1e-8 * std::max(std::abs(a), 1e-300)) << row[0] << " col " << k;
        }
}

TEST_F(CliTest, CriticalAngleNoCrossing) {
    RunConfig c;
    c.command = "critical-angle";
    c.critical.G1 = c.critical.G2 = 2.0;
    c.grid = {0.05, 5.0, 20};
    c.output = path("k.json");
    EXPECT_EQ(commands::dispatch(c, log), 4);
    auto j = config::json::parse(slurp(c.output));
    EXPECT_EQ(j["difference_at_lo"], 0.0);
    EXPECT_EQ(j["difference_at_hi"], 0.0);
}

TEST_F(CliTest, OracleReport) {
    RunConfig o;
    o.command = "oracle";
    o.output = path("o.csv");
    ASSERT_EQ(commands::dispatch(o, log), 0);
    EXPECT_EQ(header(o.output), "delta,measurement,s_exact,s_perturbative,deviation,s_isolated_qubit");
    const std::string text = slurp(o.output);
    auto pos = text.find("# fitted_delta_exponent: ");
    ASSERT_NE(pos, std::string::npos);
    EXPECT_GE(std::stod(text.substr(pos + 25)), 2.5);
    pos = text.find("# polaron_identity_residual: ");
    ASSERT_NE(pos, std::string::npos);
    EXPECT_LE(std::stod(text.substr(pos + 29)), 1e-8);
}

TEST_F(CliTest, OracleWithoutCouplingMatchesIsolatedQubit) {
    RunConfig o;
    o.command = "oracle";
    o.oracle.G = 0.0;
    o.oracle.theta = std::numbers::pi / 2;
    o.oracle.modes = 1;
    o.output = path("o.csv");
    ASSERT_EQ(commands::dispatch(o, log), 0);
    for (const auto& r : rows(o.output)) EXPECT_NEAR(std::stod(r[2]), std::stod(r[5]), 1e-10);
}

TEST_F(CliTest, OracleLeakageExitCode) {
    RunConfig o;
    o.command = "oracle";
    o.oracle.G = 3.0;
    o.oracle.modes = 2;
    o.oracle.n_max = 2;
    o.output = path("o.csv");
    EXPECT_EQ(commands::dispatch(o, log), 3);
    EXPECT_NE(log.str().find("leakage"), std::string::npos);
}

TEST_F(CliTest, BinaryExitCodes) {
    EXPECT_EQ(run_cli("curve --count 3 --tau-min 0.5 --tau-max 1 -o " + path("a.csv")), 0);
    EXPECT_EQ(run_cli("curve --theta 4 -o " + path("b.csv")), 2);
    EXPECT_EQ(run_cli("curve --no-such-flag"), 2);
    EXPECT_EQ(run_cli("curve --config " + path("missing.json")), 2);
    std::ofstream(path("bad.json")) << "{ not json";
    EXPECT_EQ(run_cli("curve --config " + path("bad.json")), 2);
    EXPECT_EQ(run_cli("oracle --oracle-G 3 --modes 2 --n-max 2 -o " + path("o.csv")), 3);
    EXPECT_EQ(run_cli("critical-angle --G1 2 --G2 2 --count 10 -o " + path("k.json")), 4);
    EXPECT_EQ(run_cli("sweep --preset fig1a"), 2);
}

TEST_F(CliTest, BinaryConfigFileAndOverrides) {
    RunConfig c = small_curve();
    c.theta = 0.9;
    c.output = path("from_file.csv");
    config::save_config(c, path("run.json"));
    ASSERT_EQ(run_cli("curve --config " + path("run.json")), 0);
    ASSERT_EQ(run_cli("curve --config " + path("run.json") + " --theta 0.9 -o " + path("flags.csv")), 0);
    EXPECT_EQ(rows(path("from_file.csv")), rows(path("flags.csv")));
    ASSERT_EQ(run_cli("curve --config " + path("run.json") + " --delta 0 --theta 0 -o " + path("zero.csv")), 0);
    for (const auto& r : rows(path("zero.csv"))) EXPECT_EQ(std::stod(r[1]), 0.0);
}
