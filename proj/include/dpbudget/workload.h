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

// Problem instance for budget planning: the statistics a developer will
// release, their sensitivities, the equations an analyst is expected to
// compute from them, the total privacy budget, and candidate allocations.

#ifndef DPBUDGET_WORKLOAD_H_
#define DPBUDGET_WORKLOAD_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include "absl/strings/string_view.h"
#include <utility>
#include <variant>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpbudget/expression.h"
#include "dpbudget/status.h"

namespace dpbudget {

// Relative tolerance on the allocation sum constraint.
inline constexpr double kBudgetSumRelativeTolerance = 1e-9;

struct ValidationError {
  ErrorKind kind;
  // Offending id, or empty for document-level problems.
  std::string subject;
  std::string message;

  std::string ToString() const;
};

using ValidationErrors = std::vector<ValidationError>;

// Either a value whose invariants hold, or every violation found while
// building it.
template <typename T>
class Validated {
 public:
  Validated(T value) : state_(std::move(value)) {}  // NOLINT
  Validated(ValidationErrors errors) : state_(std::move(errors)) {}  // NOLINT

  bool ok() const { return std::holds_alternative<T>(state_); }

  const T& value() const& { return std::get<T>(state_); }
  T&& value() && { return std::get<T>(std::move(state_)); }
  const T& operator*() const& { return value(); }
  const T* operator->() const { return &value(); }

  const ValidationErrors& errors() const {
    static const ValidationErrors kNone;
    return ok() ? kNone : std::get<ValidationErrors>(state_);
  }

  bool HasError(ErrorKind kind) const {
    for (const ValidationError& e : errors()) {
      if (e.kind == kind) return true;
    }
    return false;
  }

  // OK, or an error of the first violation's kind listing all of them.
  absl::Status status() const;

 private:
  std::variant<T, ValidationErrors> state_;
};

absl::Status ErrorsToStatus(const ValidationErrors& errors);

template <typename T>
absl::Status Validated<T>::status() const {
  return ok() ? absl::OkStatus() : ErrorsToStatus(errors());
}

struct StatisticSpec {
  std::string id;
  std::string label;
  double sensitivity = 1.0;
  // Planning-time estimate of the true answer. Linearization point for
  // noise propagation and ground truth for simulation.
  double reference_value = 0.0;

  friend bool operator==(const StatisticSpec&, const StatisticSpec&) = default;
};

struct EquationSpec {
  std::string id;
  Expression expression;
  // Sensitivity of a hypothetical direct query returning the equation's
  // value. Only used to normalize the equation's utility loss.
  double sensitivity = 1.0;

  friend bool operator==(const EquationSpec&, const EquationSpec&) = default;
};

enum class Estimator { kAnalytic, kMonteCarlo };

absl::string_view EstimatorName(Estimator estimator);
std::optional<Estimator> ParseEstimator(absl::string_view name);

struct MetricOptions {
  bool normalize_by_sensitivity = true;
  Estimator estimator = Estimator::kAnalytic;
  std::int64_t mc_samples = 100000;
  // Every budget must be at least min_budget_fraction * epsilon.
  double min_budget_fraction = 1e-6;

  friend bool operator==(const MetricOptions&, const MetricOptions&) = default;
};

class Workload {
 public:
  // Checks every invariant and reports all violations.
  static Validated<Workload> Create(double epsilon,
                                    std::vector<StatisticSpec> statistics,
                                    std::vector<EquationSpec> equations,
                                    MetricOptions options = {});

  double epsilon() const { return epsilon_; }
  const std::vector<StatisticSpec>& statistics() const { return statistics_; }
  const std::vector<EquationSpec>& equations() const { return equations_; }
  const MetricOptions& options() const { return options_; }
  std::size_t num_statistics() const { return statistics_.size(); }
  std::size_t num_equations() const { return equations_.size(); }

  std::optional<std::size_t> StatisticIndex(absl::string_view id) const;
  const StatisticSpec* FindStatistic(absl::string_view id) const;
  ValueMap ReferenceValues() const;
  double MinBudget() const { return options_.min_budget_fraction * epsilon_; }

  Validated<Workload> WithOptions(MetricOptions options) const;
  Validated<Workload> WithEpsilon(double epsilon) const;

  friend bool operator==(const Workload&, const Workload&) = default;

 private:
  Workload() = default;

  double epsilon_ = 1.0;
  std::vector<StatisticSpec> statistics_;
  std::vector<EquationSpec> equations_;
  MetricOptions options_;
};

// Parses and validates a workload JSON document.
Validated<Workload> LoadWorkload(absl::string_view document);

std::string WorkloadToJson(const Workload& workload);

// Per-statistic budgets, stored in the order of the owning workload's
// statistics.
class BudgetAllocation {
 public:
  const std::vector<std::string>& ids() const { return ids_; }
  std::span<const double> budgets() const { return budgets_; }
  std::size_t size() const { return budgets_.size(); }
  // Budget of `id`; the id must belong to the allocation.
  double budget(absl::string_view id) const;
  ValueMap ToMap() const;

  // True if the allocation was validated against a workload with the same
  // statistic ids in the same order.
  bool MatchesWorkload(const Workload& workload) const;

  friend bool operator==(const BudgetAllocation&,
                         const BudgetAllocation&) = default;

 private:
  friend Validated<BudgetAllocation> ValidateAllocation(const Workload&,
                                                        const ValueMap&);

  std::vector<std::string> ids_;
  std::vector<double> budgets_;
};

// Checks the raw map against the sum and positivity constraints and the
// workload's id set.
Validated<BudgetAllocation> ValidateAllocation(const Workload& workload,
                                               const ValueMap& budgets);

// Same, for budgets given in workload statistic order.
Validated<BudgetAllocation> ValidateAllocation(
    const Workload& workload, std::span<const double> ordered_budgets);

// Parses an allocation document into a raw budget map (no constraint
// checks beyond the document shape).
Validated<ValueMap> LoadAllocation(absl::string_view document);

std::string AllocationToJson(const BudgetAllocation& allocation);

// One (statistic value, sensitivity, budget) triple.
struct Tuple {
  double sta = 0.0;
  double sen = 1.0;
  double bud = 1.0;

  friend bool operator==(const Tuple&, const Tuple&) = default;
};

inline double StatisticOf(const Tuple& tuple) { return tuple.sta; }

// Tuples in workload order, taking statistic values from `values`.
// Errors: kMissingValue.
absl::StatusOr<std::vector<Tuple>> Consolidate(const Workload& workload,
                                               const BudgetAllocation& allocation,
                                               const ValueMap& values);

absl::Status CheckAllocationMatches(const Workload& workload,
                                    const BudgetAllocation& allocation);

}  // namespace dpbudget

#endif  // DPBUDGET_WORKLOAD_H_
