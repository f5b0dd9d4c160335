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

#include "dpbudget/propagation.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/strings/str_cat.h"
#include "dpbudget/noise.h"
#include "dpbudget/parallel.h"
#include "dpbudget/status.h"

namespace dpbudget {
namespace {

struct Dual {
  double value = 0.0;
  ValueMap grad;
};

absl::StatusOr<Dual> Differentiate(const Expression& expr,
                                   const ValueMap& refs) {
  switch (expr.kind()) {
    case Expression::Kind::kConstant:
      return Dual{expr.constant(), {}};
    case Expression::Kind::kStatRef: {
      auto it = refs.find(expr.stat_id());
      if (it == refs.end()) {
        return MakeError(ErrorKind::kMissingValue,
                         absl::StrCat("no reference value for '",
                                      expr.stat_id(), "'"));
      }
      return Dual{it->second, {{expr.stat_id(), 1.0}}};
    }
    case Expression::Kind::kNegate: {
      absl::StatusOr<Dual> d = Differentiate(expr.operand(), refs);
      if (!d.ok()) return d;
      d->value = -d->value;
      for (auto& [id, g] : d->grad) g = -g;
      return d;
    }
    case Expression::Kind::kBinary:
      break;
  }
  absl::StatusOr<Dual> a = Differentiate(expr.lhs(), refs);
  if (!a.ok()) return a;
  absl::StatusOr<Dual> b = Differentiate(expr.rhs(), refs);
  if (!b.ok()) return b;

  // d(op(a, b)) = da_coef * da + db_coef * db.
  double value = 0.0;
  double da_coef = 1.0;
  double db_coef = 1.0;
  switch (expr.op()) {
    case BinaryOp::kAdd:
      value = a->value + b->value;
      break;
    case BinaryOp::kSub:
      value = a->value - b->value;
      db_coef = -1.0;
      break;
    case BinaryOp::kMul:
      value = a->value * b->value;
      da_coef = b->value;
      db_coef = a->value;
      break;
    case BinaryOp::kDiv:
      if (std::abs(b->value) < kDivisionThreshold) {
        return MakeError(ErrorKind::kDivisionNearZero,
                         absl::StrCat("denominator ", b->value, " in '",
                                      FormatExpression(expr),
                                      "' at reference values"));
      }
      value = a->value / b->value;
      da_coef = 1.0 / b->value;
      db_coef = -a->value / (b->value * b->value);
      break;
  }
  Dual out{value, {}};
  for (const auto& [id, g] : a->grad) out.grad[id] += da_coef * g;
  for (const auto& [id, g] : b->grad) out.grad[id] += db_coef * g;
  return out;
}

}  // namespace

absl::StatusOr<ValueMap> GradientAtReference(const Expression& expr,
                                             const ValueMap& refs) {
  absl::StatusOr<Dual> d = Differentiate(expr, refs);
  if (!d.ok()) return d.status();
  return std::move(d->grad);
}

absl::StatusOr<std::vector<double>> DenseGradientAtReference(
    const Expression& expr, const Workload& workload) {
  absl::StatusOr<ValueMap> grad =
      GradientAtReference(expr, workload.ReferenceValues());
  if (!grad.ok()) return grad.status();
  std::vector<double> dense(workload.num_statistics(), 0.0);
  for (const auto& [id, g] : *grad) {
    std::optional<std::size_t> index = workload.StatisticIndex(id);
    if (!index.has_value()) {
      return MakeError(ErrorKind::kUnknownStatisticRef,
                       absl::StrCat("unknown statistic '", id, "'"));
    }
    dense[*index] = g;
  }
  return dense;
}

absl::StatusOr<PropagationResult> PropagateVarianceAnalytic(
    const Expression& expr, const Workload& workload,
    const BudgetAllocation& allocation) {
  if (absl::Status s = CheckAllocationMatches(workload, allocation); !s.ok()) {
    return s;
  }
  absl::StatusOr<std::vector<double>> grad =
      DenseGradientAtReference(expr, workload);
  if (!grad.ok()) return grad.status();
  double variance = 0.0;
  for (std::size_t i = 0; i < grad->size(); ++i) {
    const double g = (*grad)[i];
    if (g == 0.0) continue;
    const double scale =
        workload.statistics()[i].sensitivity / allocation.budgets()[i];
    variance += g * g * 2.0 * scale * scale;
  }
  return PropagationResult{variance, std::sqrt(variance), Estimator::kAnalytic,
                           std::nullopt};
}

ErrorSummary SummarizeErrors(std::vector<double> errors) {
  ErrorSummary summary;
  const std::size_t n = errors.size();
  if (n == 0) return summary;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double e : errors) {
    sum += e;
    sum_sq += e * e;
  }
  summary.mean = sum / static_cast<double>(n);
  summary.rmse = std::sqrt(sum_sq / static_cast<double>(n));
  if (n > 1) {
    double centered = 0.0;
    for (double e : errors) centered += (e - summary.mean) * (e - summary.mean);
    summary.variance = centered / static_cast<double>(n - 1);
  }
  std::sort(errors.begin(), errors.end());
  const auto trim = static_cast<std::size_t>(
      std::floor(kTrimFractionPerTail * static_cast<double>(n)));
  double trimmed_sq = 0.0;
  for (std::size_t i = trim; i < n - trim; ++i) {
    trimmed_sq += errors[i] * errors[i];
  }
  summary.trimmed_rmse =
      std::sqrt(trimmed_sq / static_cast<double>(n - 2 * trim));
  return summary;
}

absl::StatusOr<PropagationResult> PropagateVarianceMonteCarlo(
    const Expression& expr, const Workload& workload,
    const BudgetAllocation& allocation, std::int64_t samples,
    std::uint64_t seed, int threads) {
  if (absl::Status s = CheckAllocationMatches(workload, allocation); !s.ok()) {
    return s;
  }
  if (samples < kMinMonteCarloSamples) {
    return MakeError(ErrorKind::kInvalidArgument,
                     absl::StrCat("Monte Carlo needs at least ",
                                  kMinMonteCarloSamples, " samples, got ",
                                  samples));
  }
  absl::StatusOr<CompiledExpression> compiled = CompiledExpression::Compile(
      expr, [&](absl::string_view id) { return workload.StatisticIndex(id); });
  if (!compiled.ok()) return compiled.status();

  std::vector<double> refs(workload.num_statistics());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    refs[i] = workload.statistics()[i].reference_value;
  }
  const CompiledExpression::Result at_ref = compiled->Evaluate(refs);
  if (at_ref.division_near_zero) {
    return MakeError(ErrorKind::kDivisionNearZero,
                     absl::StrCat("'", FormatExpression(expr),
                                  "' divides by a near-zero value at the "
                                  "reference point"));
  }

  std::vector<std::size_t> used;
  for (const std::string& id : FreeStatistics(expr)) {
    used.push_back(*workload.StatisticIndex(id));
  }

  const auto n = static_cast<std::size_t>(samples);
  constexpr double kExcluded = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> errors(n);
  ParallelFor(n, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> values = refs;
    for (std::size_t t = begin; t < end; ++t) {
      for (std::size_t i : used) {
        values[i] = ReleasedValue(workload, allocation, seed, i, t);
      }
      const CompiledExpression::Result r = compiled->Evaluate(values);
      errors[t] = r.division_near_zero ? kExcluded : r.value - at_ref.value;
    }
  });

  std::vector<double> kept;
  kept.reserve(n);
  for (double e : errors) {
    if (!std::isnan(e)) kept.push_back(e);
  }
  const std::int64_t excluded = samples - static_cast<std::int64_t>(kept.size());
  if (static_cast<double>(excluded) >
      kMaxExcludedFraction * static_cast<double>(samples)) {
    return MakeError(ErrorKind::kHeavyTailWarning,
                     absl::StrCat(excluded, " of ", samples,
                                  " samples of '", FormatExpression(expr),
                                  "' hit a near-zero denominator"));
  }
  const ErrorSummary summary = SummarizeErrors(std::move(kept));
  return PropagationResult{
      summary.variance, summary.rmse, Estimator::kMonteCarlo,
      MonteCarloDetail{samples, excluded, summary.mean, summary.trimmed_rmse}};
}

}  // namespace dpbudget
