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

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/statusor.h"
#include "absl/strings/match.h"
#include "dpbudget/allocator.h"
#include "dpbudget/metric.h"
#include "dpbudget/parallel.h"
#include "dpbudget/report.h"
#include "dpbudget/simulation.h"
#include "dpbudget/status.h"
#include "dpbudget/workload.h"

namespace dpbudget {
namespace {

struct Flags {
  std::string workload_path;
  std::vector<std::string> allocation_paths;
  std::vector<std::string> positional_allocations;
  std::string out_path;
  std::string format;
  std::string seed;
  std::int64_t trials = 100000;
  std::string estimator;
  std::int64_t mc_samples = 0;
  std::string method = "descent";
  int grid_resolution = 100;
  int max_iters = DescentParams{}.max_iters;
  double tol = DescentParams{}.tol;
  bool allow_nonconverged = false;
  int threads = DefaultThreadCount();
  std::string trial_dump_path;
};

struct UsageError {
  std::string message;
};

std::optional<std::uint64_t> ParseSeed(absl::string_view text) {
  int base = 10;
  if (absl::StartsWith(text, "0x") || absl::StartsWith(text, "0X")) {
    text.remove_prefix(2);
    base = 16;
  }
  if (text.empty()) return std::nullopt;
  std::uint64_t value = 0;
  const char* last = text.data() + text.size();
  const std::from_chars_result r =
      std::from_chars(text.data(), last, value, base);
  if (r.ec != std::errc() || r.ptr != last) return std::nullopt;
  return value;
}

std::optional<std::string> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

class Command {
 public:
  Command(const Flags& flags, absl::string_view name, std::ostream& out,
          std::ostream& err)
      : flags_(flags), name_(name), out_(out), err_(err) {}

  int Run() {
    format_ = *ParseOutputFormat(
        flags_.format.empty() ? (name_ == "validate" ? "text" : "json")
                              : flags_.format);
    if (!flags_.seed.empty()) {
      seed_ = ParseSeed(flags_.seed);
      if (!seed_.has_value()) {
        return Usage("--seed must be a decimal or 0x-prefixed hex 64-bit "
                     "integer");
      }
    }
    std::optional<std::string> text = ReadFile(flags_.workload_path);
    if (!text.has_value()) {
      return Usage("cannot read workload file '" + flags_.workload_path + "'");
    }
    Validated<Workload> workload = LoadWorkload(*text);
    if (name_ == "validate") return Validate(workload);
    if (!workload.ok()) {
      err_ << RenderValidation(workload.errors(), OutputFormat::kText);
      return kExitValidationFailure;
    }
    Validated<Workload> overridden = ApplyOverrides(*workload);
    if (!overridden.ok()) {
      err_ << RenderValidation(overridden.errors(), OutputFormat::kText);
      return kExitUsage;
    }
    const Workload& w = *overridden;
    if (name_ == "score") return Score(w);
    if (name_ == "compare") return Compare(w);
    if (name_ == "optimize") return Optimize(w);
    return Simulate(w);
  }

 private:
  int Usage(absl::string_view message) {
    err_ << "error: " << message << "\n";
    return kExitUsage;
  }

  int Failure(const absl::Status& status) {
    err_ << "error: " << status.message() << "\n";
    return kExitComputation;
  }

  Validated<Workload> ApplyOverrides(const Workload& workload) {
    MetricOptions options = workload.options();
    if (!flags_.estimator.empty()) {
      options.estimator = *ParseEstimator(flags_.estimator);
    }
    if (flags_.mc_samples > 0) options.mc_samples = flags_.mc_samples;
    return workload.WithOptions(options);
  }

  // Loads an allocation document; prints violations and returns nullopt on
  // failure, with `exit_code` set.
  std::optional<BudgetAllocation> LoadChecked(const Workload& workload,
                                              const std::string& path,
                                              int* exit_code) {
    std::optional<std::string> text = ReadFile(path);
    if (!text.has_value()) {
      *exit_code = Usage("cannot read allocation file '" + path + "'");
      return std::nullopt;
    }
    Validated<ValueMap> raw = LoadAllocation(*text);
    Validated<BudgetAllocation> allocation =
        raw.ok() ? ValidateAllocation(workload, *raw)
                 : Validated<BudgetAllocation>(raw.errors());
    if (!allocation.ok()) {
      err_ << path << ":\n"
           << RenderValidation(allocation.errors(), OutputFormat::kText);
      *exit_code = kExitValidationFailure;
      return std::nullopt;
    }
    return *std::move(allocation);
  }

  EvaluationContext Context() const { return {seed_, flags_.threads}; }

  bool NeedsSeed(const Workload& workload) const {
    return workload.options().estimator == Estimator::kMonteCarlo &&
           !seed_.has_value();
  }

  int Validate(const Validated<Workload>& workload) {
    ValidationErrors errors = workload.errors();
    if (flags_.allocation_paths.size() > 1) {
      return Usage("validate takes at most one --allocation");
    }
    if (!flags_.allocation_paths.empty()) {
      const std::string& path = flags_.allocation_paths.front();
      std::optional<std::string> text = ReadFile(path);
      if (!text.has_value()) {
        return Usage("cannot read allocation file '" + path + "'");
      }
      Validated<ValueMap> raw = LoadAllocation(*text);
      if (!raw.ok()) {
        errors.insert(errors.end(), raw.errors().begin(), raw.errors().end());
      } else if (workload.ok()) {
        Validated<BudgetAllocation> allocation =
            ValidateAllocation(*workload, *raw);
        errors.insert(errors.end(), allocation.errors().begin(),
                      allocation.errors().end());
      }
    }
    out_ << RenderValidation(errors, format_);
    return errors.empty() ? kExitOk : kExitValidationFailure;
  }

  int Score(const Workload& workload) {
    if (flags_.allocation_paths.size() != 1) {
      return Usage("score needs exactly one --allocation");
    }
    if (NeedsSeed(workload)) {
      return Usage("the montecarlo estimator requires --seed");
    }
    int code = kExitOk;
    std::optional<BudgetAllocation> allocation =
        LoadChecked(workload, flags_.allocation_paths.front(), &code);
    if (!allocation.has_value()) return code;
    absl::StatusOr<UtilityReport> report =
        ComputeMetric(workload, *allocation, Context());
    if (!report.ok()) return Failure(report.status());
    out_ << RenderUtilityReport(*report, format_);
    return kExitOk;
  }

  int Compare(const Workload& workload) {
    std::vector<std::string> paths = flags_.allocation_paths;
    paths.insert(paths.end(), flags_.positional_allocations.begin(),
                 flags_.positional_allocations.end());
    if (paths.size() < 2) {
      return Usage("compare needs at least two allocation files");
    }
    if (NeedsSeed(workload)) {
      return Usage("the montecarlo estimator requires --seed");
    }
    std::map<std::string, int> stem_count;
    for (const std::string& p : paths) {
      ++stem_count[std::filesystem::path(p).stem().string()];
    }
    std::vector<NamedAllocation> candidates;
    for (const std::string& p : paths) {
      int code = kExitOk;
      std::optional<BudgetAllocation> allocation =
          LoadChecked(workload, p, &code);
      if (!allocation.has_value()) return code;
      std::string stem = std::filesystem::path(p).stem().string();
      candidates.push_back(
          {stem_count[stem] > 1 ? p : stem, *std::move(allocation)});
    }
    absl::StatusOr<std::vector<RankedAllocation>> ranking = CompareAllocations(
        workload, candidates, workload.options(), Context());
    if (!ranking.ok()) return Failure(ranking.status());
    out_ << RenderRanking(*ranking, format_);
    return kExitOk;
  }

  int Optimize(const Workload& workload) {
    if (!flags_.estimator.empty() && flags_.estimator != "analytic") {
      return Usage("optimize uses the analytic metric; --estimator must be "
                   "analytic");
    }
    absl::StatusOr<OptimizationResult> result;
    if (flags_.method == "sqrt") {
      result = SqrtRuleAllocation(workload);
    } else if (flags_.method == "grid") {
      result = GridSearch(workload, flags_.grid_resolution, flags_.threads);
    } else {
      result = OptimizeDescent(
          workload,
          DescentParams{flags_.max_iters, DescentParams{}.step, flags_.tol});
    }
    if (!result.ok()) return Failure(result.status());
    if (!result->converged && !flags_.allow_nonconverged) {
      err_ << "error: "
           << ErrorKindName(ErrorKind::kNotConverged) << ": descent stopped "
           << "after " << result->iterations
           << " iterations; pass --allow-nonconverged to keep the result\n";
      return kExitComputation;
    }
    if (!flags_.out_path.empty()) {
      std::ofstream file(flags_.out_path, std::ios::binary | std::ios::trunc);
      file << AllocationToJson(result->allocation);
      if (!file) {
        return Usage("cannot write '" + flags_.out_path + "'");
      }
    }
    out_ << RenderOptimization(*result, format_);
    return kExitOk;
  }

  int Simulate(const Workload& workload) {
    if (flags_.allocation_paths.size() != 1) {
      return Usage("simulate needs exactly one --allocation");
    }
    if (!seed_.has_value()) return Usage("simulate requires --seed");
    int code = kExitOk;
    std::optional<BudgetAllocation> allocation =
        LoadChecked(workload, flags_.allocation_paths.front(), &code);
    if (!allocation.has_value()) return code;
    TrialErrors trial_errors;
    absl::StatusOr<SimulationReport> report = SimulatePipeline(
        workload, *allocation, flags_.trials, *seed_, flags_.threads,
        flags_.trial_dump_path.empty() ? nullptr : &trial_errors);
    if (!report.ok()) return Failure(report.status());
    if (!flags_.trial_dump_path.empty()) {
      std::ofstream file(flags_.trial_dump_path,
                         std::ios::binary | std::ios::trunc);
      file << RenderTrialErrorsCsv(trial_errors);
      if (!file) {
        return Usage("cannot write '" + flags_.trial_dump_path + "'");
      }
    }
    out_ << RenderSimulation(*report, format_);
    return kExitOk;
  }

  const Flags& flags_;
  std::string name_;
  std::ostream& out_;
  std::ostream& err_;
  OutputFormat format_ = OutputFormat::kJson;
  std::optional<std::uint64_t> seed_;
};

void AddCommon(CLI::App* cmd, Flags& flags) {
  cmd->add_option("--workload", flags.workload_path, "Workload JSON document")
      ->required();
  cmd->add_option("--format", flags.format, "Output format")
      ->check(CLI::IsMember({"json", "csv", "text"}));
  cmd->add_option("--threads", flags.threads, "Worker threads")
      ->check(CLI::PositiveNumber);
}

void AddEstimator(CLI::App* cmd, Flags& flags) {
  cmd->add_option("--estimator", flags.estimator, "Override the estimator")
      ->check(CLI::IsMember({"analytic", "montecarlo"}));
  cmd->add_option("--mc-samples", flags.mc_samples,
                  "Override the Monte Carlo sample count")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", flags.seed, "Seed (decimal or 0x hex)");
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  Flags flags;
  CLI::App app{"Privacy budget allocation for differentially private "
               "summary statistics"};
  app.name("dpbudget");
  app.require_subcommand(1, 1);

  CLI::App* validate =
      app.add_subcommand("validate", "Check a workload and an allocation");
  AddCommon(validate, flags);
  validate->add_option("--allocation", flags.allocation_paths,
                       "Allocation JSON document");

  CLI::App* score = app.add_subcommand("score", "Score one allocation");
  AddCommon(score, flags);
  AddEstimator(score, flags);
  score->add_option("--allocation", flags.allocation_paths,
                    "Allocation JSON document");

  CLI::App* compare = app.add_subcommand("compare", "Rank allocations");
  AddCommon(compare, flags);
  AddEstimator(compare, flags);
  compare->add_option("--allocation", flags.allocation_paths,
                      "Allocation JSON document (repeatable)");
  compare->add_option("allocations", flags.positional_allocations,
                      "Allocation JSON documents");

  CLI::App* optimize =
      app.add_subcommand("optimize", "Search for a low-metric allocation");
  AddCommon(optimize, flags);
  optimize->add_option("--estimator", flags.estimator,
                       "Must be analytic if given")
      ->check(CLI::IsMember({"analytic", "montecarlo"}));
  optimize->add_option("--method", flags.method, "Search method")
      ->check(CLI::IsMember({"sqrt", "grid", "descent"}));
  optimize->add_option("--grid-resolution", flags.grid_resolution,
                       "Grid parts per epsilon");
  optimize->add_option("--max-iters", flags.max_iters, "Descent iterations")
      ->check(CLI::PositiveNumber);
  optimize->add_option("--tol", flags.tol, "Relative metric change to stop")
      ->check(CLI::NonNegativeNumber);
  optimize->add_option("--out", flags.out_path,
                       "Write the allocation document here");
  optimize->add_flag("--allow-nonconverged", flags.allow_nonconverged,
                     "Accept a descent run that hit --max-iters");

  CLI::App* simulate =
      app.add_subcommand("simulate", "Replay releases and measure errors");
  AddCommon(simulate, flags);
  simulate->add_option("--allocation", flags.allocation_paths,
                       "Allocation JSON document");
  simulate->add_option("--trials", flags.trials, "Number of releases")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--seed", flags.seed, "Seed (decimal or 0x hex)");
  simulate->add_option("--trial-dump", flags.trial_dump_path,
                       "Write per-trial errors as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  std::string name;
  for (const CLI::App* sub : app.get_subcommands()) name = sub->get_name();
  return Command(flags, name, out, err).Run();
}

}  // namespace dpbudget
