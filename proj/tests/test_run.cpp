#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "wva/run.hpp"

using namespace wva;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("wva_test_run_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Rows of a numeric CSV, header dropped; non-numeric cells become nan.
std::vector<std::vector<double>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                row.push_back(NAN);
            }
        }
        rows.push_back(row);
    }
    return rows;
}

int probe(const std::string& args) {
    const std::string cmd = std::string(WVA_PROBE_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

RunConfig small(Command c, const fs::path& out) {
    RunConfig cfg = default_config(c);
    cfg.out = out.string();
    cfg.grid_points = 41;
    return cfg;
}

}  // namespace

TEST(RangeParse, Spacings) {
    const auto lin = Range::parse("0:1:5").values();
    ASSERT_EQ(lin.size(), 5u);
    EXPECT_EQ(lin[2], 0.5);
    const auto lg = Range::parse("0.001:1:4:log").values();
    EXPECT_NEAR(lg[1], 0.01, 1e-15);
    EXPECT_EQ(lg.back(), 1.0);
    const auto sym = Range::parse("0.01:1:3:symlog").values();
    ASSERT_EQ(sym.size(), 7u);
    EXPECT_EQ(sym[3], 0.0);
    for (std::size_t i = 0; i < sym.size(); ++i) EXPECT_EQ(sym[i], -sym[sym.size() - 1 - i]);
    EXPECT_EQ(Range::parse("1e-6:1:61:log").str(), "9.9999999999999995e-07:1:61:log");
}

TEST(RangeParse, Errors) {
    EXPECT_THROW(Range::parse("0:1"), ConfigError);
    EXPECT_THROW(Range::parse("a:1:3"), ConfigError);
    EXPECT_THROW(Range::parse("0:1:3:cubic"), ConfigError);
    EXPECT_THROW(Range::parse("0:1:3:log"), ConfigError);
    EXPECT_THROW(Range::parse("1:0:3"), ConfigError);
    EXPECT_THROW(parse_list("0.1,x"), ConfigError);
}

TEST(Config, JsonRoundTrip) {
    RunConfig c = default_config(Command::fig4);
    c.delta = 0.02;
    c.gamma_noise = 0.3;
    c.seed = 123456789012345ULL;
    c.inset_delta_es = {0.02, 0.2};
    RunConfig d;
    apply_json(d, to_json(c));
    EXPECT_EQ(to_json(d), to_json(c));
    nlohmann::json extra = to_json(c);
    extra["software_version"] = "x";
    extra["diag_anything"] = 3;
    EXPECT_NO_THROW(apply_json(d, extra));
    extra["trials"] = "many";
    EXPECT_THROW(apply_json(d, extra), ConfigError);
}

TEST(Config, ValidationMapsToConfigError) {
    RunConfig c = default_config(Command::shift);
    c.gamma = -1.0;
    EXPECT_THROW(validate(c), ConfigError);
    c = default_config(Command::fig1c);
    c.grid_points = 40;
    EXPECT_THROW(validate(c), ConfigError);
    c = default_config(Command::fig3);
    c.rate_range = Range::parse("0.1:2:3");
    EXPECT_THROW(validate(c), ConfigError);
}

TEST(RunFig1c, EndpointsAntisymmetryDeterminism) {
    const fs::path dir = scratch("fig1c");
    RunConfig c = small(Command::fig1c, dir);
    c.delta_range = Range::parse("0.01:1:5:symlog");
    run(c);
    const auto shifts = read_csv(dir / "fig1c_shifts.csv");
    ASSERT_EQ(shifts.size(), 11u);
    EXPECT_EQ(shifts.front()[0], -1.0);
    EXPECT_NEAR(shifts.front()[1], -0.05, 1e-8);
    EXPECT_NEAR(shifts.back()[1], 0.05, 1e-8);
    for (std::size_t i = 0; i < shifts.size(); ++i)
        EXPECT_NEAR(shifts[i][1], -shifts[shifts.size() - 1 - i][1], 1e-8);

    const auto spectra = read_csv(dir / "fig1c_spectra.csv");
    ASSERT_EQ(spectra.size(), 11u * 41u);
    for (const auto& r : spectra) {
        if (r[0] == 1.0) {
            EXPECT_NEAR(r[2], lineshape_intensity(r[1], 0.05, 1.0), 1e-9);
        }
        if (r[0] == -1.0) {
            EXPECT_NEAR(r[2], lineshape_intensity(r[1], -0.05, 1.0), 1e-9);
        }
    }

    const std::string first = slurp(dir / "fig1c_shifts.csv") + slurp(dir / "fig1c_spectra.csv");
    run(c);
    EXPECT_EQ(first, slurp(dir / "fig1c_shifts.csv") + slurp(dir / "fig1c_spectra.csv"));

    const auto meta = nlohmann::json::parse(slurp(dir / "meta.json"));
    EXPECT_EQ(meta["software_version"], kSoftwareVersion);
    EXPECT_EQ(meta["defaults_version"], kDefaultsVersion);
    EXPECT_LT(meta["diag_fig1c_max_normalization_error"].get<double>(), 1e-6);
    EXPECT_EQ(meta["command"], "fig1c");
}

TEST(RunFig1c, DegenerateRowFlagged) {
    const fs::path dir = scratch("fig1c_degenerate");
    RunConfig c = small(Command::fig1c, dir);
    c.delta_e = 0.0;
    c.delta_range = Range::parse("0.1:1:2:symlog");
    run(c);
    const auto shifts = read_csv(dir / "fig1c_shifts.csv");
    ASSERT_EQ(shifts.size(), 5u);
    EXPECT_TRUE(std::isnan(shifts[2][1]));
    EXPECT_EQ(shifts[2][4], 1.0);
    EXPECT_EQ(read_csv(dir / "fig1c_spectra.csv").size(), 4u * 41u);
}

TEST(RunFig2, ZeroRowAndArgmax) {
    const fs::path dir = scratch("fig2");
    RunConfig c = small(Command::fig2, dir);
    c.delta_range = Range::parse("0.001:1:61:log");
    c.delta_e_range = Range::parse("0:0.2:5");
    run(c);
    const auto rows = read_csv(dir / "fig2_matrix.csv");
    ASSERT_EQ(rows.size(), 61u * 5u);
    std::map<double, std::pair<double, double>> best;  // delta_e -> (shift, delta)
    for (const auto& r : rows) {
        if (r[1] == 0.0) {
            EXPECT_NEAR(r[2], 0.0, 1e-14);
            EXPECT_TRUE(std::isnan(r[3]));
            continue;
        }
        auto& b = best[r[1]];
        if (r[2] > b.first) b = {r[2], r[0]};
    }
    ASSERT_EQ(best.size(), 4u);
    for (const auto& [de, b] : best) {
        EXPECT_GT(b.second, 0.5 * de / std::numbers::sqrt2);
        EXPECT_LT(b.second, 2.0 * de / std::numbers::sqrt2);
    }
}

TEST(RunFig3, EnvelopeAndInset) {
    const fs::path dir = scratch("fig3");
    RunConfig c = small(Command::fig3, dir);
    c.rate_range = Range::parse("1e-4:0.5:13:log");
    c.svg = true;
    run(c);
    const auto rows = read_csv(dir / "fig3_snr.csv");
    ASSERT_EQ(rows.size(), 13u);
    for (const auto& r : rows) EXPECT_GE(r[1], r[2]);
    const auto inset = read_csv(dir / "fig3_inset.csv");
    std::size_t arg = 0;
    for (std::size_t i = 0; i < inset.size(); ++i)
        if (inset[i][1] > inset[arg][1]) arg = i;
    EXPECT_GT(arg, 0u);
    EXPECT_LT(arg, inset.size() - 1);
    EXPECT_TRUE(fs::exists(dir / "fig3.svg"));

    RunConfig d = small(Command::fig3, scratch("fig3_double"));
    d.rate_range = Range::parse("0.001:0.002:2");
    run(d);
    const auto two = read_csv(fs::path(d.out) / "fig3_snr.csv");
    EXPECT_NEAR(two[1][1] / two[0][1], std::numbers::sqrt2, 0.01 * std::numbers::sqrt2);
}

TEST(RunFig4, ZeroGammaColumnMatchesFig2) {
    const fs::path dir4 = scratch("fig4");
    RunConfig c = small(Command::fig4, dir4);
    c.delta_range = Range::parse("0.01:1:7:log");
    c.gamma_range = Range::parse("0:0.2:3");
    c.ratio_range = Range::parse("0:2:3");
    c.inset_delta_es = {0.05, 0.1};
    run(c);
    const fs::path dir2 = scratch("fig4_vs_fig2");
    RunConfig f2 = small(Command::fig2, dir2);
    f2.delta_range = c.delta_range;
    f2.delta_e_range = Range::parse("0.1:0.1:1");
    run(f2);
    const auto map = read_csv(dir4 / "fig4_map.csv");
    const auto ref = read_csv(dir2 / "fig2_matrix.csv");
    ASSERT_EQ(map.size(), 3u * 7u);
    for (std::size_t j = 0; j < 7; ++j) {
        EXPECT_EQ(map[j][0], 0.0);
        EXPECT_EQ(map[j][2], ref[j][2]);
    }
    const auto opt = read_csv(dir4 / "fig4_optcurve.csv");
    for (std::size_t i = 1; i < opt.size(); ++i) {
        EXPECT_GE(opt[i][1], opt[i - 1][1]);
        EXPECT_LE(opt[i][2], opt[i - 1][2]);
    }
    const auto inset = read_csv(dir4 / "fig4_inset.csv");
    ASSERT_EQ(inset.size(), 6u);
    for (std::size_t i = 1; i < inset.size(); ++i)
        if (inset[i][0] == inset[i - 1][0]) {
            EXPECT_LT(inset[i][2], inset[i - 1][2]);
        }
}

TEST(RunShift, SingleRow) {
    const fs::path dir = scratch("shift");
    RunConfig c = small(Command::shift, dir);
    c.delta = 0.1;
    run(c);
    const auto rows = read_csv(dir / "shift.csv");
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_NEAR(rows[0][3], 0.33554817275747508306, 1e-10);
    EXPECT_NEAR(rows[0][4], 0.5, 1e-15);
}

TEST(Cli, ExitCodes) {
    const fs::path dir = scratch("cli_codes");
    EXPECT_EQ(probe("shift --delta 0.1 --out " + dir.string()), 0);
    EXPECT_EQ(probe("bogus"), 2);
    EXPECT_EQ(probe("shift --no-such-flag 1"), 2);
    EXPECT_EQ(probe("shift --gamma -1 --out " + dir.string()), 2);
    EXPECT_EQ(probe("shift --delta 2 --out " + dir.string()), 2);
    EXPECT_EQ(probe("fig3 --rate-range 0.1:3:3 --out " + dir.string()), 2);
    EXPECT_EQ(probe("shift --delta-e 0 --delta 0 --out " + dir.string()), 3);
    const fs::path blocker = dir / "blocker";
    std::ofstream(blocker) << "x";
    EXPECT_EQ(probe("shift --delta 0.1 --out " + (blocker / "sub").string()), 4);
    EXPECT_EQ(probe("shift --config " + (dir / "missing.json").string()), 2);
}

TEST(Cli, RepeatIsByteIdentical) {
    const fs::path a = scratch("cli_repeat_a");
    const fs::path b = scratch("cli_repeat_b");
    const std::string args = "snr --method monte_carlo --trials 50 --total-time 2000 --tau-c 20 --seed 7 --delta 0.07";
    ASSERT_EQ(probe(args + " --out " + a.string()), 0);
    ASSERT_EQ(probe(args + " --out " + b.string()), 0);
    EXPECT_EQ(slurp(a / "snr.csv"), slurp(b / "snr.csv"));
}

TEST(Cli, MetaReplayReproduces) {
    const fs::path a = scratch("cli_replay_a");
    const fs::path b = scratch("cli_replay_b");
    ASSERT_EQ(probe("fig1c --delta-e 0.2 --delta-range 0.05:1:3:symlog --grid-points 21 --out " + a.string()), 0);
    ASSERT_EQ(probe("fig1c --config " + (a / "meta.json").string() + " --out " + b.string()), 0);
    EXPECT_EQ(slurp(a / "fig1c_shifts.csv"), slurp(b / "fig1c_shifts.csv"));
    EXPECT_EQ(slurp(a / "fig1c_spectra.csv"), slurp(b / "fig1c_spectra.csv"));
    const auto meta = nlohmann::json::parse(slurp(b / "meta.json"));
    EXPECT_EQ(meta["delta_e"].get<double>(), 0.2);
    EXPECT_EQ(meta["grid_points"].get<int>(), 21);
}

TEST(Cli, FlagsOverrideConfigFile) {
    const fs::path dir = scratch("cli_precedence");
    fs::create_directories(dir);
    std::ofstream(dir / "cfg.json") << R"({"delta_e": 0.3, "delta": 0.2, "unknown_key": 1})";
    ASSERT_EQ(probe("shift --config " + (dir / "cfg.json").string() + " --delta 0.5 --out " + dir.string()), 0);
    const auto rows = read_csv(dir / "shift.csv");
    EXPECT_EQ(rows[0][0], 0.5);
    EXPECT_EQ(rows[0][1], 0.3);
}
