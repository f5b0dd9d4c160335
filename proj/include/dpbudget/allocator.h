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

// Budget allocation search over the scaled simplex
// {bud_i >= min_budget, sum bud_i = epsilon}.
//
// All methods minimize the analytic metric. Its unknowns enter through
// 1 / bud_i only (equation gradients are taken at the reference values), so
// with a_i = sqrt(2) n_i and w_ji = 2 g_ji^2 sen_i^2 / norm_j^2
//
//   metric(bud) = sum_i a_i / bud_i + sum_j sqrt(sum_i w_ji / bud_i^2),
//
// which is convex on the positive orthant.

#ifndef DPBUDGET_ALLOCATOR_H_
#define DPBUDGET_ALLOCATOR_H_

#include <cstdint>
#include <span>
#include "absl/strings/string_view.h"
#include <vector>

#include "absl/status/statusor.h"
#include "dpbudget/workload.h"

namespace dpbudget {

inline constexpr std::size_t kMaxGridStatistics = 5;
inline constexpr int kMinGridResolution = 10;

enum class AllocationMethod { kUniform, kSqrtRule, kGrid, kDescent };

absl::string_view AllocationMethodName(AllocationMethod method);

struct OptimizationResult {
  BudgetAllocation allocation;
  double metric = 0.0;
  std::int64_t iterations = 0;
  bool converged = false;
  AllocationMethod method = AllocationMethod::kUniform;
};

// Closed-form analytic metric with precomputed coefficients. Uses the
// workload's normalization option; the estimator option is ignored.
class AnalyticObjective {
 public:
  static absl::StatusOr<AnalyticObjective> Create(const Workload& workload);

  std::size_t dimension() const { return statistic_weight_.size(); }

  double Value(std::span<const double> budgets) const;
  void Gradient(std::span<const double> budgets,
                std::span<double> gradient) const;

  // True when no equation couples two or more statistics.
  bool IsSeparable() const;

 private:
  struct Weight {
    std::size_t index;
    double weight;
  };

  std::vector<double> statistic_weight_;           // a_i
  std::vector<std::vector<Weight>> equation_weights_;  // w_ji, nonzero only
};

BudgetAllocation UniformAllocation(const Workload& workload);

// Exact minimizer for separable workloads: bud_i proportional to sqrt(c_i)
// where metric = sum_i c_i / bud_i, with the floor applied by water-filling.
// Errors: kNotSeparable.
absl::StatusOr<OptimizationResult> SqrtRuleAllocation(const Workload& workload);

// Exhaustive search over bud = epsilon * parts / resolution for every
// composition of `resolution` into positive parts. The first minimum in
// lexicographic order of the budget vector wins.
// Errors: kTooManyStatistics, kResolutionTooCoarse.
absl::StatusOr<OptimizationResult> GridSearch(const Workload& workload,
                                              int resolution, int threads = 1);

struct DescentParams {
  int max_iters = 5000;
  double step = 0.1;
  // Stop once an accepted step improves the metric by less than this,
  // relative to the metric.
  double tol = 1e-10;
};

// Multiplicative-weights (mirror) descent from the uniform allocation. Steps
// that would increase the metric are rejected and the step size halved;
// accepted steps grow it by kStepGrowth. A run that exhausts max_iters comes
// back with converged == false and the best allocation seen.
inline constexpr double kStepGrowth = 1.25;

absl::StatusOr<OptimizationResult> OptimizeDescent(
    const Workload& workload, const DescentParams& params = {});

// d metric / d bud_i for every statistic, in the allocation's own
// (unconstrained) coordinates.
absl::StatusOr<ValueMap> ObjectiveGradient(const Workload& workload,
                                           const BudgetAllocation& allocation);

// Clamps entries below `floor` to it and rescales the rest so the total is
// `total`, repeating until no entry is below the floor. Requires
// floor * size < total and non-negative input.
void ApplyBudgetFloor(std::vector<double>& budgets, double total, double floor);

}  // namespace dpbudget

#endif  // DPBUDGET_ALLOCATOR_H_
