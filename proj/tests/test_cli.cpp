// Copyright 2026 The onlasso Authors
// SPDX-License-Identifier: Apache-2.0

// Runs the onlasso executable and checks outputs and exit codes.

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "onlasso/ingest.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = ONLASSO_CLI_PATH;
const std::string kFixture = std::string(ONLASSO_TEST_DATA_DIR) + "/monthly_fixture.csv";
const std::string kSmall = " --k 3 --p 3 --s 3 --T 90 --grid-size 10";

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("onlasso_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Exit status of the CLI; stdout and stderr go to files in the temp dir.
  int run(const std::string& args) const {
    const std::string cmd =
        kCli + " " + args + " >" + path("stdout.txt") + " 2>" + path("stderr.txt");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string slurp(const std::string& name) const {
    std::ifstream in(path(name));
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  nlohmann::json json(const std::string& name) const { return nlohmann::json::parse(slurp(name)); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, SimulateWritesLoadableCsv) {
  ASSERT_EQ(run("simulate --k 2 --p 2 --s 2 --T 40 --seed 5 -o " + path("sim.csv") +
                " --truth " + path("truth.json")),
            0);
  const onlasso::SeriesSet s = onlasso::load_csv(path("sim.csv"));
  EXPECT_EQ(s.length(), 40);
  EXPECT_EQ(s.exogenous(), 2);
  const auto truth = json("truth.json");
  EXPECT_EQ(truth["phi"].size(), 2u + 2u * 2u);
  EXPECT_LE(truth["spectral_radius"].get<double>(), 0.95);
}

TEST_F(Cli, EvaluateIsReproducible) {
  ASSERT_EQ(run("evaluate --seed 7" + kSmall + " --json " + path("a.json")), 0);
  ASSERT_EQ(run("evaluate --seed 7" + kSmall + " --json " + path("b.json")), 0);
  EXPECT_EQ(slurp("a.json"), slurp("b.json"));
  const auto j = json("a.json");
  EXPECT_EQ(j["summary"].size(), 8u);
  EXPECT_EQ(j["summary"][0]["method"], "static");
  EXPECT_EQ(j["summary"][0]["relative_msfe"], 1.0);
  EXPECT_TRUE(j["ordering_ok"].get<bool>());
  EXPECT_TRUE(j["positivity_ok"].get<bool>());
}

TEST_F(Cli, EvaluateRuleAndCsv) {
  ASSERT_EQ(run("evaluate --seed 7 --reps 2 --rule newton" + kSmall + " --csv " + path("r.csv")),
            0);
  const std::string csv = slurp("r.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);  // header, static, newton
  EXPECT_NE(csv.find("\nnewton,"), std::string::npos);
  EXPECT_NE(slurp("stdout.txt").find("reps=2"), std::string::npos);
}

TEST_F(Cli, TuneOnFixture) {
  ASSERT_EQ(run("tune --input " + kFixture + " --aggregate 3 --p 2 --s 2 --grid-size 8 --json " +
                path("t.json")),
            0);
  const auto j = json("t.json");
  EXPECT_EQ(j["lambda"].size(), 8u);
  EXPECT_EQ(j["msfe"].size(), 8u);
  EXPECT_EQ(j["features"], 2 + 2 * 2);
  EXPECT_GT(j["lambda_hat"].get<double>(), 0.0);
}

TEST_F(Cli, EvaluateOnFixtureWithTransformOverride) {
  ASSERT_EQ(run("evaluate --input " + kFixture +
                " --target unrate --ignore indpro --transform spread=2 --p 3 --s 3"
                " --grid-size 8 --methods static,gradient,bic --json " + path("e.json")),
            0);
  const auto j = json("e.json");
  EXPECT_EQ(j["summary"].size(), 3u);
  EXPECT_EQ(j["replications"][0]["features"], 3 + 3);
}

TEST_F(Cli, BenchReportsTimings) {
  ASSERT_EQ(run("bench --k 3 --p 3 --s 3 --T 150 --grid-size 10 --iterations 3 --json " +
                path("b.json")),
            0);
  const auto j = json("b.json");
  EXPECT_EQ(j["T2"].get<int>() - j["T1"].get<int>(), 76);
  EXPECT_EQ(j["rolling"]["samples"], 3);
  EXPECT_TRUE(j["ordering_ok"].get<bool>());
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("evaluate --bogus"), 1);
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("evaluate --methods foo"), 1);
  EXPECT_EQ(run("evaluate --rule mean"), 1);
  EXPECT_EQ(run("evaluate --rule newton --methods static"), 1);
  EXPECT_EQ(run("evaluate --train-frac 1.5" + kSmall), 1);
  EXPECT_EQ(run("tune --input " + kFixture + " --transform spread"), 1);
  EXPECT_EQ(run("tune --input " + kFixture + " --target gdp"), 2);
  EXPECT_NE(slurp("stderr.txt").find("MissingColumn"), std::string::npos);

  std::ofstream(path("bad.csv")) << "t,a,b\n1,2,x\n";
  EXPECT_EQ(run("tune --input " + path("bad.csv")), 2);
  EXPECT_NE(slurp("stderr.txt").find("line 2, column 'b'"), std::string::npos);

  std::ofstream(path("neg.csv")) << "t,a\ntcode,5\n1,1\n2,-1\n";
  EXPECT_EQ(run("tune --input " + path("neg.csv")), 2);

  // Zero response everywhere: lambda_max is zero.
  std::ofstream(path("zero.csv")) << "t,a,b\n1,0,1\n2,0,2\n3,0,1\n4,0,3\n5,0,1\n6,0,2\n7,0,5\n"
                                     "8,0,1\n9,0,2\n";
  EXPECT_EQ(run("tune --raw --p 1 --s 1 --input " + path("zero.csv")), 3);
  EXPECT_NE(slurp("stderr.txt").find("DegenerateDesign"), std::string::npos);
}
