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

#include "dpbudget/metric.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "absl/strings/str_cat.h"
#include "dpbudget/propagation.h"
#include "dpbudget/status.h"

namespace dpbudget {

absl::StatusOr<double> StatisticUtilityLoss(const Tuple& tuple,
                                            const MetricOptions& options) {
  if (!(tuple.sen > 0.0)) {
    return MakeError(ErrorKind::kNonPositiveSensitivity,
                     absl::StrCat("sensitivity must be > 0, got ", tuple.sen));
  }
  if (!(tuple.bud > 0.0)) {
    return MakeError(ErrorKind::kNonPositiveBudget,
                     absl::StrCat("budget must be > 0, got ", tuple.bud));
  }
  const double numerator = options.normalize_by_sensitivity ? 1.0 : tuple.sen;
  return std::numbers::sqrt2 * numerator / tuple.bud;
}

absl::StatusOr<double> EquationUtilityLoss(const EquationSpec& equation,
                                           const Workload& workload,
                                           const BudgetAllocation& allocation,
                                           const MetricOptions& options,
                                           const EvaluationContext& context) {
  absl::StatusOr<PropagationResult> propagated;
  if (options.estimator == Estimator::kAnalytic) {
    propagated =
        PropagateVarianceAnalytic(equation.expression, workload, allocation);
  } else {
    if (!context.seed.has_value()) {
      return MakeError(ErrorKind::kInvalidArgument,
                       "the montecarlo estimator requires a seed");
    }
    propagated = PropagateVarianceMonteCarlo(
        equation.expression, workload, allocation, options.mc_samples,
        *context.seed, context.threads);
  }
  if (!propagated.ok()) return propagated.status();
  const double rmse = propagated->rmse;
  return options.normalize_by_sensitivity ? rmse / equation.sensitivity : rmse;
}

absl::StatusOr<UtilityReport> ComputeMetric(const Workload& workload,
                                            const BudgetAllocation& allocation,
                                            const MetricOptions& options,
                                            const EvaluationContext& context) {
  absl::StatusOr<std::vector<Tuple>> tuples =
      Consolidate(workload, allocation, workload.ReferenceValues());
  if (!tuples.ok()) return tuples.status();

  UtilityReport report;
  report.options = options;
  double us_sum = 0.0;
  for (std::size_t i = 0; i < tuples->size(); ++i) {
    absl::StatusOr<double> us = StatisticUtilityLoss((*tuples)[i], options);
    if (!us.ok()) return us.status();
    report.us_terms.push_back({workload.statistics()[i].id, *us});
    us_sum += *us;
  }
  double ue_sum = 0.0;
  for (const EquationSpec& equation : workload.equations()) {
    absl::StatusOr<double> ue =
        EquationUtilityLoss(equation, workload, allocation, options, context);
    if (!ue.ok()) return ue.status();
    report.ue_terms.push_back({equation.id, *ue});
    ue_sum += *ue;
  }
  report.metric = us_sum + ue_sum;
  return report;
}

absl::StatusOr<UtilityReport> ComputeMetric(const Workload& workload,
                                            const BudgetAllocation& allocation,
                                            const EvaluationContext& context) {
  return ComputeMetric(workload, allocation, workload.options(), context);
}

absl::StatusOr<std::vector<RankedAllocation>> CompareAllocations(
    const Workload& workload, const std::vector<NamedAllocation>& allocations,
    const MetricOptions& options, const EvaluationContext& context) {
  if (allocations.size() < 2) {
    return MakeError(ErrorKind::kInvalidArgument,
                     "comparison needs at least two allocations");
  }
  std::vector<RankedAllocation> ranked;
  ranked.reserve(allocations.size());
  for (const NamedAllocation& candidate : allocations) {
    absl::StatusOr<UtilityReport> report =
        ComputeMetric(workload, candidate.allocation, options, context);
    if (!report.ok()) {
      return MakeError(ErrorKindOf(report.status()),
                       absl::StrCat("allocation '", candidate.name,
                                    "': ", report.status().message()));
    }
    ranked.push_back({candidate.name, 0, *std::move(report)});
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedAllocation& a, const RankedAllocation& b) {
                     return a.report.metric < b.report.metric;
                   });
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    ranked[i].rank = static_cast<int>(i) + 1;
  }
  return ranked;
}

}  // namespace dpbudget
