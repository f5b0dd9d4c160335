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

// Utility-loss scoring of a budget allocation. Each released statistic and
// each predicted equation contributes the rmse of the noise it carries
// (optionally divided by its sensitivity); the metric is the sum of those
// terms, and lower is better.

#ifndef DPBUDGET_METRIC_H_
#define DPBUDGET_METRIC_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dpbudget/workload.h"

namespace dpbudget {

struct NamedValue {
  std::string id;
  double value = 0.0;

  friend bool operator==(const NamedValue&, const NamedValue&) = default;
};

struct UtilityReport {
  double metric = 0.0;
  std::vector<NamedValue> us_terms;  // workload statistic order
  std::vector<NamedValue> ue_terms;  // workload equation order
  MetricOptions options;

  friend bool operator==(const UtilityReport&, const UtilityReport&) = default;
};

// Randomness and parallelism for Monte Carlo scoring. The seed is required
// with the montecarlo estimator; every equation uses the same seed.
struct EvaluationContext {
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

// Noise rmse of one statistic: sqrt(2) / bud when normalized, else
// sqrt(2) * sen / bud.
absl::StatusOr<double> StatisticUtilityLoss(const Tuple& tuple,
                                            const MetricOptions& options);

// Propagated noise rmse of one equation, divided by the equation's
// sensitivity when normalized.
absl::StatusOr<double> EquationUtilityLoss(const EquationSpec& equation,
                                           const Workload& workload,
                                           const BudgetAllocation& allocation,
                                           const MetricOptions& options,
                                           const EvaluationContext& context = {});

absl::StatusOr<UtilityReport> ComputeMetric(const Workload& workload,
                                            const BudgetAllocation& allocation,
                                            const MetricOptions& options,
                                            const EvaluationContext& context = {});

// Uses the workload's own options.
absl::StatusOr<UtilityReport> ComputeMetric(const Workload& workload,
                                            const BudgetAllocation& allocation,
                                            const EvaluationContext& context = {});

struct NamedAllocation {
  std::string name;
  BudgetAllocation allocation;
};

struct RankedAllocation {
  std::string name;
  int rank = 0;  // 1 is best
  UtilityReport report;
};

// Ascending by metric; equal metrics keep input order. Needs at least two
// allocations.
absl::StatusOr<std::vector<RankedAllocation>> CompareAllocations(
    const Workload& workload, const std::vector<NamedAllocation>& allocations,
    const MetricOptions& options, const EvaluationContext& context = {});

}  // namespace dpbudget

#endif  // DPBUDGET_METRIC_H_
