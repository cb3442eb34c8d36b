// Copyright 2026 The HaarForge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <filesystem>

#include "haarforge/cli.hpp"

using namespace haarforge;
using namespace haarforge::cli;

namespace {

struct Captured {
    int code = 0;
    std::string out;
};

Captured run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "haarforge");
    std::vector<const char *> argv;
    for (const auto &a : args) argv.push_back(a.c_str());
    std::stringstream out, err;
    auto *old_out = std::cout.rdbuf(out.rdbuf());
    auto *old_err = std::cerr.rdbuf(err.rdbuf());
    Captured c;
    c.code = run((int)argv.size(), argv.data());
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    c.out = out.str();
    return c;
}

std::vector<json> lines(const std::string &s) {
    std::vector<json> out;
    std::stringstream ss(s);
    std::string line;
    while (std::getline(ss, line)) {
        if (!line.empty()) out.push_back(json::parse(line));
    }
    return out;
}

std::string read_file(const std::string &p) {
    std::ifstream f(p);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::string temp_dir(const std::string &name) {
    auto p = std::filesystem::temp_directory_path() / ("haarforge_test_" + name);
    std::filesystem::remove_all(p);
    return p.string();
}

}  // namespace

TEST(Config, Defaults) {
    RunConfig rc = config_from_json(json::object());
    EXPECT_EQ(rc.ensemble.N, 16);
    EXPECT_EQ(rc.ensemble.m, 2);
    EXPECT_EQ(rc.ensemble.ell, 4);
    EXPECT_EQ(rc.ensemble.k, 2);
    EXPECT_EQ(rc.ensemble.seed, 0u);
    EXPECT_FALSE(rc.ensemble.theta.has_value());
    EXPECT_NEAR(rc.ensemble.resolved_theta(), find_theta(2), 0);
}

TEST(Config, ThetaOverride) {
    RunConfig rc = config_from_json({{"theta", 1.25}});
    EXPECT_EQ(rc.ensemble.resolved_theta(), 1.25);
}

TEST(Config, UnknownKeysListed) {
    try {
        config_from_json({{"N", 4}, {"bogus", 1}, {"also", 2}});
        FAIL();
    } catch (const ConfigError &e) {
        std::string msg = e.what();
        EXPECT_NE(msg.find("bogus"), std::string::npos);
        EXPECT_NE(msg.find("also"), std::string::npos);
    }
    EXPECT_THROW(config_from_json({{"N", "four"}}), ConfigError);
    EXPECT_THROW(config_from_json(json::array()), ConfigError);
}

TEST(Config, StableRange) {
    EXPECT_THROW(config_from_json({{"N", 3}, {"k", 2}, {"suite", "partition"}}), ConfigError);
    EXPECT_NO_THROW(config_from_json({{"N", 3}, {"k", 2}}));
}

TEST(Grid, ParseAndCells) {
    Grid g = parse_grid("N=8,16,32;ell=1,2", {"N", "ell"});
    ASSERT_EQ(g.size(), 2u);
    EXPECT_EQ(g[0].second, (std::vector<int64_t>{8, 16, 32}));
    auto cells = grid_cells(g);
    ASSERT_EQ(cells.size(), 6u);
    EXPECT_EQ(cells[1].at("N"), 8);
    EXPECT_EQ(cells[1].at("ell"), 2);
    EXPECT_THROW(parse_grid("N=8,x", {"N"}), ConfigError);
    EXPECT_THROW(parse_grid("Q=1", {"N"}), ConfigError);
    EXPECT_THROW(parse_grid("N=1;N=2", {"N"}), ConfigError);
}

TEST(Run, Theta) {
    Captured c = run_cli({"theta", "--m", "2"});
    EXPECT_EQ(c.code, 0);
    auto recs = lines(c.out);
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_NEAR(recs[0]["theta"].get<double>(), 1.7004684594, 1e-6);
    EXPECT_LE(recs[0]["abs_v"].get<double>(), 1e-9);
    EXPECT_TRUE(recs[0].contains("config_hash"));
    EXPECT_TRUE(recs[0].contains("seed"));
}

TEST(Run, DiagramRank) {
    Captured c = run_cli({"diagram", "--k", "2", "--check", "rank"});
    EXPECT_EQ(c.code, 0);
    auto recs = lines(c.out);
    ASSERT_EQ(recs.size(), 1u);
    EXPECT_EQ(recs[0]["rank"], 15);
    EXPECT_EQ(recs[0]["N"], 5);
}

TEST(Run, ExpandWords) {
    Captured c = run_cli({"expand-words", "--m", "2", "--degree", "4"});
    EXPECT_EQ(c.code, 0);
    auto recs = lines(c.out);
    ASSERT_EQ(recs.size(), 1u);
    for (const char *k : {"identity_coeff", "sum_sq", "max_abs", "n_words"}) EXPECT_TRUE(recs[0].contains(k)) << k;
}

TEST(Run, Selftest) {
    Captured c = run_cli({"selftest"});
    EXPECT_EQ(c.code, 0);
    for (const auto &r : lines(c.out)) EXPECT_TRUE(r["pass"].get<bool>()) << r.dump();
}

TEST(Run, UsageErrors) {
    EXPECT_EQ(run_cli({"nonsense"}).code, 2);
    EXPECT_EQ(run_cli({"theta", "--m", "2", "--unknown"}).code, 2);
    EXPECT_EQ(run_cli({}).code, 2);
    EXPECT_EQ(run_cli({"diagram", "--check", "nope"}).code, 2);
    EXPECT_EQ(run_cli({"theta", "--m", "2", "--grid", "N=4"}).code, 2);
}

TEST(Run, ConfigErrors) {
    std::string dir = temp_dir("cfg");
    std::filesystem::create_directories(dir);
    std::ofstream(dir + "/bad.json") << R"({"N": 3, "suite": "partition"})";
    std::ofstream(dir + "/unknown.json") << R"({"colour": 1})";
    EXPECT_EQ(run_cli({"diagram", "--check", "rank", "--config", dir + "/bad.json"}).code, 2);
    EXPECT_EQ(run_cli({"selftest", "--config", dir + "/unknown.json"}).code, 2);
}

TEST(Run, NumericFailureRecord) {
    // Resource cap surfaces as exit 1 with a diagnostic record.
    Captured c = run_cli({"moments", "--ensemble", "haar", "--N", "8", "--k", "2", "--samples", "10"});
    EXPECT_EQ(c.code, 1);
    auto recs = lines(c.out);
    ASSERT_FALSE(recs.empty());
    EXPECT_EQ(recs.back()["kind"], "numeric");
}

TEST(Run, OutputsAndDeterminism) {
    std::string a = temp_dir("a"), b = temp_dir("b");
    std::vector<std::string> base{"freeness", "--grid", "N=16,32", "--samples", "2000", "--seed", "17"};
    auto args_a = base, args_b = base;
    args_a.insert(args_a.end(), {"--out", a});
    args_b.insert(args_b.end(), {"--out", b});
    EXPECT_EQ(run_cli(args_a).code, 0);
    EXPECT_EQ(run_cli(args_b).code, 0);
    EXPECT_TRUE(std::filesystem::exists(a + "/summary.csv"));
    EXPECT_TRUE(std::filesystem::exists(a + "/manifest.json"));
    std::string ra = read_file(a + "/results.jsonl");
    EXPECT_FALSE(ra.empty());
    EXPECT_EQ(ra, read_file(b + "/results.jsonl"));
    json ma = json::parse(read_file(a + "/manifest.json"));
    json mb = json::parse(read_file(b + "/manifest.json"));
    EXPECT_EQ(ma["config_hash"], mb["config_hash"]);
    EXPECT_EQ(ma["seed"], 17);
    std::string csv = read_file(a + "/summary.csv");
    EXPECT_NE(csv.find("config_hash"), std::string::npos);
}

TEST(Run, SeedChangesResults) {
    auto r1 = run_cli({"frame-potential", "--ensemble", "haar", "--N", "4", "--samples", "200", "--seed", "1"});
    auto r2 = run_cli({"frame-potential", "--ensemble", "haar", "--N", "4", "--samples", "200", "--seed", "2"});
    EXPECT_NE(lines(r1.out)[0]["value"], lines(r2.out)[0]["value"]);
}

TEST(Run, FormatFlag) {
    std::string d = temp_dir("fmt");
    EXPECT_EQ(run_cli({"theta", "--m", "3", "--out", d, "--format", "csv"}).code, 0);
    EXPECT_TRUE(std::filesystem::exists(d + "/summary.csv"));
    EXPECT_FALSE(std::filesystem::exists(d + "/results.jsonl"));
}
