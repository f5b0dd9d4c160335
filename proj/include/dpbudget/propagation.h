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

// Predicts how much noise an equation inherits from the noisy statistics it
// combines. The analytic route is the first-order delta method; the Monte
// Carlo route samples the joint noise and serves as its oracle.

#ifndef DPBUDGET_PROPAGATION_H_
#define DPBUDGET_PROPAGATION_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "absl/status/statusor.h"
#include "dpbudget/expression.h"
#include "dpbudget/workload.h"

namespace dpbudget {

// Monte Carlo runs need at least this many samples.
inline constexpr std::int64_t kMinMonteCarloSamples = 1000;
// Fraction trimmed from each tail for the trimmed rmse.
inline constexpr double kTrimFractionPerTail = 0.0005;
// Samples hitting a near-zero denominator beyond this fraction abort the run.
inline constexpr double kMaxExcludedFraction = 0.001;

struct MonteCarloDetail {
  std::int64_t samples = 0;
  // Samples dropped because a denominator fell below kDivisionThreshold.
  std::int64_t excluded = 0;
  double bias_estimate = 0.0;
  double trimmed_rmse = 0.0;

  friend bool operator==(const MonteCarloDetail&,
                         const MonteCarloDetail&) = default;
};

struct PropagationResult {
  double variance = 0.0;
  double rmse = 0.0;
  Estimator method = Estimator::kAnalytic;
  std::optional<MonteCarloDetail> mc_detail;

  friend bool operator==(const PropagationResult&,
                         const PropagationResult&) = default;
};

// Exact partial derivatives of `expr` at `refs`, one entry per free
// statistic. Errors: kMissingValue, kDivisionNearZero.
absl::StatusOr<ValueMap> GradientAtReference(const Expression& expr,
                                             const ValueMap& refs);

// Gradient at the workload's reference values, dense in workload statistic
// order (zero for statistics the expression does not use).
absl::StatusOr<std::vector<double>> DenseGradientAtReference(
    const Expression& expr, const Workload& workload);

// variance = sum_i g_i^2 * 2 (sen_i / bud_i)^2 with g at the reference
// values. Exact when the expression is linear in the statistics.
absl::StatusOr<PropagationResult> PropagateVarianceAnalytic(
    const Expression& expr, const Workload& workload,
    const BudgetAllocation& allocation);

// Empirical error distribution of expr(reference + noise) - expr(reference)
// over `samples` joint draws. Sample t uses streams (seed, i, t), so the same
// seed reproduces the same noise as a simulation of the same trial.
// Errors: kInvalidArgument (samples too few), kDivisionNearZero at the
// reference point, kHeavyTailWarning.
absl::StatusOr<PropagationResult> PropagateVarianceMonteCarlo(
    const Expression& expr, const Workload& workload,
    const BudgetAllocation& allocation, std::int64_t samples,
    std::uint64_t seed, int threads = 1);

// Summary statistics of an error sample, shared with the simulation harness.
struct ErrorSummary {
  double mean = 0.0;
  double variance = 0.0;  // unbiased; 0 for a single sample
  double rmse = 0.0;
  double trimmed_rmse = 0.0;
};

// Reduces in index order, so the result is independent of how `errors` was
// produced.
ErrorSummary SummarizeErrors(std::vector<double> errors);

}  // namespace dpbudget

#endif  // DPBUDGET_PROPAGATION_H_
