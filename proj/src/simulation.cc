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

#include "dpbudget/simulation.h"

#include <cmath>
#include <limits>
#include <numbers>

#include "absl/strings/str_cat.h"
#include "dpbudget/expression.h"
#include "dpbudget/noise.h"
#include "dpbudget/parallel.h"
#include "dpbudget/propagation.h"
#include "dpbudget/status.h"

namespace dpbudget {

absl::StatusOr<SimulationReport> SimulatePipeline(
    const Workload& workload, const BudgetAllocation& allocation,
    std::int64_t trials, std::uint64_t seed, int threads,
    TrialErrors* trial_errors) {
  if (absl::Status s = CheckAllocationMatches(workload, allocation); !s.ok()) {
    return s;
  }
  if (trials < 1) {
    return MakeError(ErrorKind::kInvalidArgument,
                     absl::StrCat("trials must be >= 1, got ", trials));
  }
  const std::size_t nsta = workload.num_statistics();
  const std::size_t neq = workload.num_equations();

  std::vector<double> refs(nsta);
  for (std::size_t i = 0; i < nsta; ++i) {
    refs[i] = workload.statistics()[i].reference_value;
  }
  std::vector<CompiledExpression> compiled;
  std::vector<double> equation_refs;
  for (const EquationSpec& e : workload.equations()) {
    absl::StatusOr<CompiledExpression> c = CompiledExpression::Compile(
        e.expression,
        [&](absl::string_view id) { return workload.StatisticIndex(id); });
    if (!c.ok()) return c.status();
    const CompiledExpression::Result at_ref = c->Evaluate(refs);
    if (at_ref.division_near_zero) {
      return MakeError(ErrorKind::kDivisionNearZero,
                       absl::StrCat("equation '", e.id,
                                    "' divides by a near-zero value at the "
                                    "reference point"));
    }
    compiled.push_back(*std::move(c));
    equation_refs.push_back(at_ref.value);
  }

  const std::size_t columns = nsta + neq;
  const auto n = static_cast<std::size_t>(trials);
  constexpr double kExcluded = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> errors(n * columns);
  ParallelFor(n, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> released(nsta);
    for (std::size_t t = begin; t < end; ++t) {
      double* row = &errors[t * columns];
      for (std::size_t i = 0; i < nsta; ++i) {
        released[i] = ReleasedValue(workload, allocation, seed, i, t);
        row[i] = released[i] - refs[i];
      }
      for (std::size_t j = 0; j < neq; ++j) {
        const CompiledExpression::Result r = compiled[j].Evaluate(released);
        row[nsta + j] =
            r.division_near_zero ? kExcluded : r.value - equation_refs[j];
      }
    }
  });

  SimulationReport report;
  report.trials = trials;
  report.seed = seed;
  report.reliable = trials >= kMinReliableTrials;

  std::vector<double> column(n);
  for (std::size_t i = 0; i < nsta; ++i) {
    for (std::size_t t = 0; t < n; ++t) column[t] = errors[t * columns + i];
    const ErrorSummary summary = SummarizeErrors(column);
    const StatisticSpec& s = workload.statistics()[i];
    report.per_statistic.push_back(
        {s.id, summary.rmse, summary.mean,
         std::numbers::sqrt2 * s.sensitivity / allocation.budgets()[i]});
  }
  for (std::size_t j = 0; j < neq; ++j) {
    const EquationSpec& e = workload.equations()[j];
    std::vector<double> kept;
    kept.reserve(n);
    for (std::size_t t = 0; t < n; ++t) {
      const double v = errors[t * columns + nsta + j];
      if (!std::isnan(v)) kept.push_back(v);
    }
    const auto excluded = static_cast<std::int64_t>(n - kept.size());
    if (static_cast<double>(excluded) >
        kMaxExcludedFraction * static_cast<double>(trials)) {
      return MakeError(ErrorKind::kHeavyTailWarning,
                       absl::StrCat(excluded, " of ", trials, " trials of '",
                                    e.id, "' hit a near-zero denominator"));
    }
    absl::StatusOr<PropagationResult> predicted =
        PropagateVarianceAnalytic(e.expression, workload, allocation);
    if (!predicted.ok()) return predicted.status();
    const ErrorSummary summary = SummarizeErrors(std::move(kept));
    report.per_equation.push_back({e.id, summary.rmse, summary.trimmed_rmse,
                                   summary.mean, predicted->rmse, excluded});
  }

  if (trial_errors != nullptr) {
    trial_errors->columns.clear();
    for (const StatisticSpec& s : workload.statistics()) {
      trial_errors->columns.push_back(s.id);
    }
    for (const EquationSpec& e : workload.equations()) {
      trial_errors->columns.push_back(e.id);
    }
    trial_errors->values = std::move(errors);
  }
  return report;
}

}  // namespace dpbudget
