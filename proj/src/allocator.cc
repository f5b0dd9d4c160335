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

#include "dpbudget/allocator.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "absl/strings/str_cat.h"
#include "dpbudget/parallel.h"
#include "dpbudget/propagation.h"
#include "dpbudget/status.h"

namespace dpbudget {
namespace {

absl::StatusOr<OptimizationResult> Finish(const Workload& workload,
                                          const AnalyticObjective& objective,
                                          const std::vector<double>& budgets,
                                          AllocationMethod method,
                                          std::int64_t iterations,
                                          bool converged) {
  Validated<BudgetAllocation> allocation =
      ValidateAllocation(workload, budgets);
  if (!allocation.ok()) return allocation.status();
  OptimizationResult result;
  result.allocation = *std::move(allocation);
  result.metric = objective.Value(budgets);
  result.iterations = iterations;
  result.converged = converged;
  result.method = method;
  return result;
}

std::uint64_t Binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) result = result * (n - k + i) / i;
  return result;
}

struct GridBest {
  double metric = std::numeric_limits<double>::infinity();
  std::vector<int> parts;
};

// Enumerates compositions with parts[0] fixed, in lexicographic order.
void SearchCompositions(const AnalyticObjective& objective, double epsilon,
                        int resolution, int min_part, std::vector<int>& parts,
                        std::size_t position, int remaining,
                        std::vector<double>& budgets, GridBest& best) {
  const std::size_t n = parts.size();
  if (position + 1 == n) {
    if (remaining < min_part) return;
    parts[position] = remaining;
    for (std::size_t i = 0; i < n; ++i) {
      budgets[i] = epsilon * parts[i] / resolution;
    }
    const double metric = objective.Value(budgets);
    if (metric < best.metric) {
      best.metric = metric;
      best.parts = parts;
    }
    return;
  }
  const int cells_after = static_cast<int>(n - position - 1);
  for (int p = min_part; p <= remaining - cells_after * min_part; ++p) {
    parts[position] = p;
    SearchCompositions(objective, epsilon, resolution, min_part, parts,
                       position + 1, remaining - p, budgets, best);
  }
}

}  // namespace

absl::string_view AllocationMethodName(AllocationMethod method) {
  switch (method) {
    case AllocationMethod::kUniform:
      return "uniform";
    case AllocationMethod::kSqrtRule:
      return "sqrt";
    case AllocationMethod::kGrid:
      return "grid";
    case AllocationMethod::kDescent:
      return "descent";
  }
  return "unknown";
}

absl::StatusOr<AnalyticObjective> AnalyticObjective::Create(
    const Workload& workload) {
  const bool normalize = workload.options().normalize_by_sensitivity;
  AnalyticObjective objective;
  for (const StatisticSpec& s : workload.statistics()) {
    objective.statistic_weight_.push_back(
        std::numbers::sqrt2 * (normalize ? 1.0 : s.sensitivity));
  }
  for (const EquationSpec& e : workload.equations()) {
    absl::StatusOr<std::vector<double>> grad =
        DenseGradientAtReference(e.expression, workload);
    if (!grad.ok()) {
      return MakeError(ErrorKindOf(grad.status()),
                       absl::StrCat("equation '", e.id,
                                    "': ", grad.status().message()));
    }
    const double norm = normalize ? e.sensitivity : 1.0;
    std::vector<Weight> weights;
    for (std::size_t i = 0; i < grad->size(); ++i) {
      const double g = (*grad)[i];
      if (g == 0.0) continue;
      const double sen = workload.statistics()[i].sensitivity;
      weights.push_back({i, 2.0 * g * g * sen * sen / (norm * norm)});
    }
    objective.equation_weights_.push_back(std::move(weights));
  }
  return objective;
}

double AnalyticObjective::Value(std::span<const double> budgets) const {
  double us = 0.0;
  for (std::size_t i = 0; i < statistic_weight_.size(); ++i) {
    us += statistic_weight_[i] / budgets[i];
  }
  double ue = 0.0;
  for (const std::vector<Weight>& weights : equation_weights_) {
    double variance = 0.0;
    for (const Weight& w : weights) {
      variance += w.weight / (budgets[w.index] * budgets[w.index]);
    }
    ue += std::sqrt(variance);
  }
  return us + ue;
}

void AnalyticObjective::Gradient(std::span<const double> budgets,
                                 std::span<double> gradient) const {
  for (std::size_t i = 0; i < statistic_weight_.size(); ++i) {
    gradient[i] = -statistic_weight_[i] / (budgets[i] * budgets[i]);
  }
  for (const std::vector<Weight>& weights : equation_weights_) {
    double variance = 0.0;
    for (const Weight& w : weights) {
      variance += w.weight / (budgets[w.index] * budgets[w.index]);
    }
    if (variance <= 0.0) continue;
    const double ue = std::sqrt(variance);
    for (const Weight& w : weights) {
      const double b = budgets[w.index];
      gradient[w.index] -= w.weight / (b * b * b * ue);
    }
  }
}

bool AnalyticObjective::IsSeparable() const {
  return std::all_of(
      equation_weights_.begin(), equation_weights_.end(),
      [](const std::vector<Weight>& weights) { return weights.size() <= 1; });
}

void ApplyBudgetFloor(std::vector<double>& budgets, double total,
                      double floor) {
  const std::size_t n = budgets.size();
  std::vector<bool> clamped(n, false);
  std::size_t num_clamped = 0;
  for (;;) {
    double free_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!clamped[i]) free_sum += budgets[i];
    }
    const double free_mass = total - floor * static_cast<double>(num_clamped);
    const std::size_t num_free = n - num_clamped;
    for (std::size_t i = 0; i < n; ++i) {
      if (clamped[i]) continue;
      budgets[i] = free_sum > 0.0
                       ? budgets[i] * (free_mass / free_sum)
                       : free_mass / static_cast<double>(num_free);
    }
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!clamped[i] && budgets[i] < floor) {
        clamped[i] = true;
        budgets[i] = floor;
        ++num_clamped;
        changed = true;
      }
    }
    if (!changed) return;
  }
}

BudgetAllocation UniformAllocation(const Workload& workload) {
  const std::vector<double> budgets(
      workload.num_statistics(),
      workload.epsilon() / static_cast<double>(workload.num_statistics()));
  // Always valid: the sum is epsilon up to rounding.
  return *ValidateAllocation(workload, budgets);
}

absl::StatusOr<OptimizationResult> SqrtRuleAllocation(
    const Workload& workload) {
  absl::StatusOr<AnalyticObjective> objective =
      AnalyticObjective::Create(workload);
  if (!objective.ok()) return objective.status();
  if (!objective->IsSeparable()) {
    return MakeError(ErrorKind::kNotSeparable,
                     "an equation couples two or more statistics; the "
                     "closed-form rule does not apply");
  }
  // Separable: metric = sum_i c_i / bud_i. The gradient at bud = 1 is -c.
  const std::size_t n = workload.num_statistics();
  std::vector<double> ones(n, 1.0);
  std::vector<double> neg_c(n, 0.0);
  objective->Gradient(ones, neg_c);
  std::vector<double> budgets(n);
  for (std::size_t i = 0; i < n; ++i) budgets[i] = std::sqrt(-neg_c[i]);
  ApplyBudgetFloor(budgets, workload.epsilon(), workload.MinBudget());
  return Finish(workload, *objective, budgets, AllocationMethod::kSqrtRule, 0,
                true);
}

absl::StatusOr<OptimizationResult> GridSearch(const Workload& workload,
                                              int resolution, int threads) {
  const std::size_t n = workload.num_statistics();
  if (n > kMaxGridStatistics) {
    return MakeError(ErrorKind::kTooManyStatistics,
                     absl::StrCat("grid search supports at most ",
                                  kMaxGridStatistics, " statistics, got ", n));
  }
  if (resolution < kMinGridResolution) {
    return MakeError(ErrorKind::kResolutionTooCoarse,
                     absl::StrCat("grid resolution must be at least ",
                                  kMinGridResolution, ", got ", resolution));
  }
  if (static_cast<std::size_t>(resolution) < n) {
    return MakeError(ErrorKind::kResolutionTooCoarse,
                     "grid resolution is below the number of statistics");
  }
  absl::StatusOr<AnalyticObjective> objective =
      AnalyticObjective::Create(workload);
  if (!objective.ok()) return objective.status();

  // Cells must respect the budget floor.
  const int min_part = std::max(
      1, static_cast<int>(std::ceil(workload.options().min_budget_fraction *
                                    resolution)));
  if (static_cast<std::size_t>(min_part) * n > static_cast<std::size_t>(resolution)) {
    return MakeError(ErrorKind::kInvalidArgument,
                     "no grid cell satisfies the budget floor");
  }

  const double epsilon = workload.epsilon();
  // One slot per value of the first part, merged in order afterwards so the
  // winner does not depend on the thread count.
  const int first_max = resolution - static_cast<int>(n - 1) * min_part;
  const std::size_t first_count =
      static_cast<std::size_t>(first_max - min_part + 1);
  std::vector<GridBest> bests(first_count);
  ParallelFor(first_count, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<int> parts(n);
    std::vector<double> budgets(n);
    for (std::size_t k = begin; k < end; ++k) {
      const int first = min_part + static_cast<int>(k);
      parts[0] = first;
      if (n == 1) {
        if (first != resolution) continue;
        budgets[0] = epsilon;
        bests[k].metric = objective->Value(budgets);
        bests[k].parts = parts;
        continue;
      }
      SearchCompositions(*objective, epsilon, resolution, min_part, parts, 1,
                         resolution - first, budgets, bests[k]);
    }
  });
  GridBest best;
  for (const GridBest& candidate : bests) {
    if (candidate.metric < best.metric) best = candidate;
  }
  std::vector<double> budgets(n);
  for (std::size_t i = 0; i < n; ++i) {
    budgets[i] = epsilon * best.parts[i] / resolution;
  }
  const std::uint64_t cells =
      Binomial(static_cast<std::uint64_t>(resolution - 1), n - 1);
  return Finish(workload, *objective, budgets, AllocationMethod::kGrid,
                static_cast<std::int64_t>(cells), true);
}

absl::StatusOr<OptimizationResult> OptimizeDescent(
    const Workload& workload, const DescentParams& params) {
  if (params.max_iters < 1 || !(params.step > 0.0) || !(params.tol >= 0.0)) {
    return MakeError(ErrorKind::kInvalidArgument,
                     "descent needs max_iters >= 1, step > 0 and tol >= 0");
  }
  absl::StatusOr<AnalyticObjective> objective =
      AnalyticObjective::Create(workload);
  if (!objective.ok()) return objective.status();

  const std::size_t n = workload.num_statistics();
  const double epsilon = workload.epsilon();
  const double floor = workload.MinBudget();

  std::vector<double> budgets(n, epsilon / static_cast<double>(n));
  double metric = objective->Value(budgets);
  std::vector<double> gradient(n);
  std::vector<double> candidate(n);
  std::vector<double> log_candidate(n);
  double step = params.step;
  bool converged = false;
  int iteration = 0;

  while (iteration < params.max_iters) {
    ++iteration;
    objective->Gradient(budgets, gradient);
    double max_log = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      log_candidate[i] = std::log(budgets[i]) - step * gradient[i];
      max_log = std::max(max_log, log_candidate[i]);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      candidate[i] = std::exp(log_candidate[i] - max_log);
      sum += candidate[i];
    }
    for (double& c : candidate) c *= epsilon / sum;
    ApplyBudgetFloor(candidate, epsilon, floor);

    const double candidate_metric = objective->Value(candidate);
    if (candidate_metric <= metric) {
      const double improvement = (metric - candidate_metric) / metric;
      budgets.swap(candidate);
      metric = candidate_metric;
      step *= kStepGrowth;
      if (improvement <= params.tol) {
        converged = true;
        break;
      }
    } else {
      step *= 0.5;
      // No step size improves the metric: a numerical stationary point.
      if (step < std::numeric_limits<double>::min()) {
        converged = true;
        break;
      }
    }
  }
  return Finish(workload, *objective, budgets, AllocationMethod::kDescent,
                iteration, converged);
}

absl::StatusOr<ValueMap> ObjectiveGradient(const Workload& workload,
                                           const BudgetAllocation& allocation) {
  if (absl::Status s = CheckAllocationMatches(workload, allocation); !s.ok()) {
    return s;
  }
  absl::StatusOr<AnalyticObjective> objective =
      AnalyticObjective::Create(workload);
  if (!objective.ok()) return objective.status();
  std::vector<double> gradient(workload.num_statistics());
  objective->Gradient(allocation.budgets(), gradient);
  ValueMap out;
  for (std::size_t i = 0; i < gradient.size(); ++i) {
    out[workload.statistics()[i].id] = gradient[i];
  }
  return out;
}

}  // namespace dpbudget
