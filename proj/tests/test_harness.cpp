#include "fracsplit/error.hpp"
#include "fracsplit/harness.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fracsplit;

namespace {

std::string data(const std::string& name) { return std::string(FRACSPLIT_TEST_DATA) + "/" + name; }

std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string tmp(const std::string& name) { return (std::filesystem::temp_directory_path() / name).string(); }

const char* kTiny = R"(
[problem]
alpha = 0.6
m = 1
initial = { kind = "sine", mode = [1, 2] }

[discretization]
r = 1
k = 2
tau_ref = 0.25

[study]
kind = "space"
ladder = [0.25, 0.125, 0.0625]

[output]
include_timing = false
)";

} // namespace

TEST(Config, ParsesShippedConfigs)
{
    for (const auto& e : std::filesystem::directory_iterator(FRACSPLIT_CONFIG_DIR)) {
        if (e.path().extension() != ".toml")
            continue;
        EXPECT_NO_THROW(load_config(e.path().string())) << e.path();
    }
    const auto c = parse_config(kTiny);
    EXPECT_DOUBLE_EQ(c.alpha, 0.6);
    EXPECT_EQ(c.m, 1);
    EXPECT_EQ(c.initial.kind, "sine");
    EXPECT_EQ(c.initial.mode[1], 2);
    EXPECT_EQ(c.ladder.size(), 3u);
    EXPECT_FALSE(c.include_timing);
    EXPECT_EQ(c.strategy, "plain");
}

TEST(Config, Errors)
{
    EXPECT_THROW(parse_config("[problem]\nalpah = 0.5\n"), ConfigError);
    EXPECT_THROW(parse_config("[extra]\nx = 1\n"), ConfigError);
    EXPECT_THROW(parse_config("[problem]\nalpha = 1.5\n"), ConfigError);
    EXPECT_THROW(parse_config("[problem]\nm = \"one\"\n"), ConfigError);
    EXPECT_THROW(parse_config("[discretization]\nstrategy = \"magic\"\n"), Error);
    EXPECT_THROW(parse_config("[problem]\ninitial = { kind = \"blob\" }\n"), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/config.toml"), ConfigError);
    try {
        parse_config("[problem]\nalpha = 0.5\nm = = 2\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3);
    }
}

TEST(Report, ObservedOrdersExactOnPowerLaws)
{
    for (int p = 1; p <= 4; ++p) {
        std::vector<double> e;
        for (int j = 0; j < 5; ++j)
            e.push_back(3.0 * std::pow(0.5, p * j));
        const auto o = observed_orders(e);
        EXPECT_TRUE(std::isnan(o[0]));
        for (int j = 1; j < 5; ++j)
            EXPECT_NEAR(o[j], p, 1e-12);
    }
    const auto z = observed_orders({1.0, 0.0, 1.0});
    EXPECT_TRUE(std::isnan(z[1]));
    EXPECT_TRUE(std::isnan(z[2]));
}

TEST(Report, EmptyReportHasHeaderOnly)
{
    ConvergenceReport rep;
    rep.columns.push_back({"recombined", {}, 2.0});
    const auto csv = format_report(rep, Format::csv, false);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
    EXPECT_NE(csv.find("level,E_recombined,order_recombined,floor\n"), std::string::npos);
    const auto md = format_report(rep, Format::markdown, false);
    EXPECT_NE(md.find("| h_j | E recombined | conv. |"), std::string::npos);
}

TEST(Study, TinySpaceStudyGoldenAndRoundTrip)
{
    const auto cfg = parse_config(kTiny);
    const auto rep = run_space_study(cfg);
    ASSERT_EQ(rep.levels.size(), 2u);
    EXPECT_EQ(format_report(rep, Format::markdown, false), read_file(data("tiny_space.md")));

    // deterministic output without timing columns
    const auto again = run_space_study(cfg);
    EXPECT_EQ(format_report(again, Format::csv, false), format_report(rep, Format::csv, false));

    const auto path = tmp("fracsplit_tiny.csv");
    emit(rep, Format::csv, path, true);
    const auto back = read_report_csv(path);
    std::filesystem::remove(path);
    EXPECT_EQ(back.kind, rep.kind);
    EXPECT_EQ(back.m, rep.m);
    EXPECT_EQ(back.r, rep.r);
    EXPECT_EQ(back.strategy, rep.strategy);
    ASSERT_EQ(back.columns.size(), rep.columns.size());
    ASSERT_EQ(back.levels.size(), rep.levels.size());
    for (std::size_t c = 0; c < rep.columns.size(); ++c) {
        EXPECT_EQ(back.columns[c].name, rep.columns[c].name);
        EXPECT_EQ(back.columns[c].theoretical, rep.columns[c].theoretical);
        for (std::size_t i = 0; i < rep.levels.size(); ++i)
            EXPECT_EQ(back.columns[c].error[i], rep.columns[c].error[i]);
    }
    EXPECT_EQ(format_report(back, Format::csv, false), format_report(rep, Format::csv, false));
}

TEST(Study, RecombinedErrorObeysTriangleInequality)
{
    const auto cfg = parse_config(kTiny);
    const auto rep = run_space_study(cfg);
    // the singular column already carries its time coefficient
    const auto& reg = rep.column("regular").error;
    const auto& sing = rep.column("singular").error;
    const auto& rec = rep.column("recombined").error;
    for (std::size_t i = 0; i < rep.levels.size(); ++i)
        EXPECT_LE(rec[i], (reg[i] + sing[i]) * (1 + 1e-12));
    EXPECT_THROW(rep.column("nope"), DomainError);
}

TEST(Study, TimeStudyObservedOrder)
{
    auto cfg = parse_config(kTiny);
    cfg.kind = "time";
    cfg.m = 0;
    cfg.initial.mode = {1, 1};
    cfg.k = 2;
    cfg.h_ref = 0.125;
    cfg.ladder = {1.0 / 16, 1.0 / 32, 1.0 / 64};
    const auto rep = run_time_study(cfg);
    const auto o = observed_orders(rep.column("recombined").error);
    EXPECT_NEAR(o.back(), 2.0, 0.15);
}
