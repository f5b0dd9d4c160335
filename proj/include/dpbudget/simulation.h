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

// End-to-end replay of a release: the curator adds Laplace noise to every
// statistic, the analyst evaluates the predicted equations on the released
// values, and the observed errors are compared with the analytic
// predictions.

#ifndef DPBUDGET_SIMULATION_H_
#define DPBUDGET_SIMULATION_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dpbudget/workload.h"

namespace dpbudget {

// Reports with fewer trials carry rmse values flagged as unreliable.
inline constexpr std::int64_t kMinReliableTrials = 1000;

struct StatisticSimulation {
  std::string id;
  double empirical_rmse = 0.0;
  double bias = 0.0;
  double predicted_rmse = 0.0;
};

struct EquationSimulation {
  std::string id;
  double empirical_rmse = 0.0;
  double trimmed_rmse = 0.0;
  double bias = 0.0;
  double predicted_rmse = 0.0;
  std::int64_t excluded = 0;
};

struct SimulationReport {
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
  bool reliable = false;
  std::vector<StatisticSimulation> per_statistic;
  std::vector<EquationSimulation> per_equation;
};

// Per-trial errors, row-major: trials x columns. Columns are the statistic
// ids followed by the equation ids. Excluded equation trials hold NaN.
struct TrialErrors {
  std::vector<std::string> columns;
  std::vector<double> values;

  double at(std::size_t trial, std::size_t column) const {
    return values[trial * columns.size() + column];
  }
};

// Error is (value on released statistics) - (value on reference values).
// Trial t uses noise streams (seed, i, t). Errors: kInvalidArgument,
// kDivisionNearZero at the reference point, kHeavyTailWarning.
absl::StatusOr<SimulationReport> SimulatePipeline(
    const Workload& workload, const BudgetAllocation& allocation,
    std::int64_t trials, std::uint64_t seed, int threads = 1,
    TrialErrors* trial_errors = nullptr);

}  // namespace dpbudget

#endif  // DPBUDGET_SIMULATION_H_
