//
// Copyright 2026 The dpbudget Authors
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
//

#include "dpbudget/cli.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dpbudget/workload.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "json.hpp"

namespace dpbudget {
namespace {

using ::testing::HasSubstr;

const std::string kData = DPBUDGET_TEST_DATA_DIR;
const std::string kWorkload = kData + "/example4.json";
const std::string kUniform = kData + "/uniform.json";
const std::string kTuned = kData + "/tuned.json";
const std::string kSumHigh = kData + "/sum_high.json";

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun Invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "dpbudget");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code =
      RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string TempPath(const std::string& name) {
  return (std::filesystem::path(::testing::TempDir()) / name).string();
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

TEST(CliValidateTest, GoodDocuments) {
  const CliRun r =
      Invoke({"validate", "--workload", kWorkload, "--allocation", kUniform});
  EXPECT_EQ(r.code, kExitOk) << r.out << r.err;
}

TEST(CliValidateTest, SumHighNamesTheViolation) {
  const CliRun r =
      Invoke({"validate", "--workload", kWorkload, "--allocation", kSumHigh});
  EXPECT_EQ(r.code, kExitValidationFailure);
  EXPECT_THAT(r.out + r.err, HasSubstr("BudgetSumMismatch"));
}

TEST(CliValidateTest, JsonReport) {
  const CliRun r = Invoke({"validate", "--workload", kWorkload, "--allocation",
                        kSumHigh, "--format", "json"});
  EXPECT_EQ(r.code, kExitValidationFailure);
  const nlohmann::json report = nlohmann::json::parse(r.out);
  EXPECT_EQ(report["valid"], false);
  ASSERT_EQ(report["errors"].size(), 1u);
  EXPECT_EQ(report["errors"][0]["kind"], "BudgetSumMismatch");
}

TEST(CliValidateTest, BrokenWorkloadIsValidationFailure) {
  const std::string path = TempPath("broken.json");
  std::ofstream(path) << R"({"epsilon": 0, "statistics": []})";
  EXPECT_EQ(Invoke({"validate", "--workload", path}).code,
            kExitValidationFailure);
}

TEST(CliScoreTest, JsonKeys) {
  const CliRun r = Invoke({"score", "--workload", kWorkload, "--allocation",
                        kUniform, "--format", "json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const nlohmann::json report = nlohmann::json::parse(r.out);
  EXPECT_NEAR(report["metric"].get<double>(), 33.6016553076346, 1e-9);
  std::vector<std::string> us, ue;
  for (const auto& [k, v] : report["us_terms"].items()) us.push_back(k);
  for (const auto& [k, v] : report["ue_terms"].items()) ue.push_back(k);
  EXPECT_THAT(us, ::testing::ElementsAre("s1", "s2", "s3", "s4"));
  EXPECT_THAT(ue, ::testing::ElementsAre("eq1", "eq2"));
  EXPECT_EQ(report["ue_terms"]["eq1"], 4.0);
  EXPECT_TRUE(report.contains("options"));
}

TEST(CliScoreTest, MonteCarloNeedsSeed) {
  EXPECT_EQ(Invoke({"score", "--workload", kWorkload, "--allocation", kUniform,
                    "--estimator", "montecarlo"})
                .code,
            kExitUsage);
  const CliRun r = Invoke({"score", "--workload", kWorkload, "--allocation",
                        kUniform, "--estimator", "montecarlo", "--mc-samples",
                        "5000", "--seed", "0x2a"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out)["options"]["estimator"],
            "montecarlo");
}

TEST(CliScoreTest, InvalidAllocationIsValidationFailure) {
  EXPECT_EQ(Invoke({"score", "--workload", kWorkload, "--allocation", kSumHigh})
                .code,
            kExitValidationFailure);
}

TEST(CliCompareTest, RanksLowerMetricFirst) {
  const CliRun r = Invoke({"compare", "--workload", kWorkload, kTuned, kUniform});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const nlohmann::json ranking = nlohmann::json::parse(r.out);
  ASSERT_EQ(ranking.size(), 2u);
  EXPECT_EQ(ranking[0]["name"], "uniform");
  EXPECT_EQ(ranking[0]["rank"], 1);
  EXPECT_EQ(ranking[1]["name"], "tuned");
  EXPECT_LT(ranking[0]["metric"].get<double>(),
            ranking[1]["metric"].get<double>());
}

TEST(CliCompareTest, RepeatedAllocationFlag) {
  const CliRun r = Invoke({"compare", "--workload", kWorkload, "--allocation",
                        kUniform, "--allocation", kTuned});
  EXPECT_EQ(r.code, kExitOk) << r.err;
}

TEST(CliCompareTest, NeedsTwoAllocations) {
  EXPECT_EQ(Invoke({"compare", "--workload", kWorkload, kUniform}).code,
            kExitUsage);
}

TEST(CliOptimizeTest, OutputRoundTripsThroughValidate) {
  for (const char* method : {"descent", "grid"}) {
    const std::string out = TempPath(std::string("opt_") + method + ".json");
    const CliRun r = Invoke({"optimize", "--workload", kWorkload, "--method",
                          method, "--grid-resolution", "40", "--out", out});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const nlohmann::json report = nlohmann::json::parse(r.out);
    EXPECT_EQ(report["method"], method);
    EXPECT_EQ(Invoke({"validate", "--workload", kWorkload, "--allocation", out})
                  .code,
              kExitOk);
    EXPECT_EQ(nlohmann::json::parse(ReadFile(out))["budgets"],
              report["budgets"]);
  }
}

TEST(CliOptimizeTest, SqrtRuleRefusesCoupledWorkload) {
  EXPECT_EQ(
      Invoke({"optimize", "--workload", kWorkload, "--method", "sqrt"}).code,
      kExitComputation);
}

TEST(CliOptimizeTest, NonConvergence) {
  EXPECT_EQ(
      Invoke({"optimize", "--workload", kWorkload, "--max-iters", "2"}).code,
      kExitComputation);
  EXPECT_EQ(Invoke({"optimize", "--workload", kWorkload, "--max-iters", "2",
                    "--allow-nonconverged"})
                .code,
            kExitOk);
}

TEST(CliOptimizeTest, RejectsMonteCarloEstimator) {
  EXPECT_EQ(Invoke({"optimize", "--workload", kWorkload, "--estimator",
                    "montecarlo", "--seed", "1"})
                .code,
            kExitUsage);
}

TEST(CliSimulateTest, RequiresSeed) {
  const CliRun r =
      Invoke({"simulate", "--workload", kWorkload, "--allocation", kUniform});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_THAT(r.err, HasSubstr("--seed"));
}

TEST(CliSimulateTest, CsvAndTrialDump) {
  const std::string dump = TempPath("trials.csv");
  const CliRun r = Invoke({"simulate", "--workload", kWorkload, "--allocation",
                        kUniform, "--seed", "5", "--trials", "1000",
                        "--format", "csv", "--trial-dump", dump});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_THAT(r.out, ::testing::StartsWith(
                         "kind,id,empirical_rmse,trimmed_rmse,bias,"
                         "predicted_rmse,excluded\n"));
  const std::string trials = ReadFile(dump);
  EXPECT_EQ(std::count(trials.begin(), trials.end(), '\n'), 1001);
}

TEST(CliUsageTest, UsageErrors) {
  EXPECT_EQ(Invoke({}).code, kExitUsage);
  EXPECT_EQ(Invoke({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(Invoke({"score", "--workload", kWorkload, "--allocation", kUniform,
                    "--bogus"})
                .code,
            kExitUsage);
  EXPECT_EQ(Invoke({"score", "--workload", kData + "/missing.json",
                    "--allocation", kUniform})
                .code,
            kExitUsage);
  EXPECT_EQ(Invoke({"score", "--workload", kWorkload, "--allocation", kUniform,
                    "--format", "yaml"})
                .code,
            kExitUsage);
}

TEST(CliDeterminismTest, RepeatedRunsAreByteIdentical) {
  const std::vector<std::vector<std::string>> commands = {
      {"score", "--workload", kWorkload, "--allocation", kTuned, "--estimator",
       "montecarlo", "--mc-samples", "20000", "--seed", "9", "--threads", "3"},
      {"compare", "--workload", kWorkload, kUniform, kTuned},
      {"optimize", "--workload", kWorkload},
      {"simulate", "--workload", kWorkload, "--allocation", kUniform, "--seed",
       "12", "--trials", "3000", "--threads", "2"},
  };
  for (const auto& command : commands) {
    const CliRun first = Invoke(command);
    const CliRun second = Invoke(command);
    EXPECT_EQ(first.code, kExitOk) << command[0] << first.err;
    EXPECT_EQ(first.out, second.out) << command[0];
  }
}

}  // namespace
}  // namespace dpbudget
