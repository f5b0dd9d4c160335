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

// Shared fixtures and generators for the dpbudget tests.

#ifndef DPBUDGET_TESTS_TEST_UTIL_H_
#define DPBUDGET_TESTS_TEST_UTIL_H_

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dpbudget/expression.h"
#include "dpbudget/workload.h"

namespace dpbudget::testing {

inline Expression Parse(absl::string_view text) {
  absl::StatusOr<Expression> expr = ParseExpression(text);
  if (!expr.ok()) std::abort();
  return *std::move(expr);
}

inline StatisticSpec Stat(std::string id, double sensitivity,
                          double reference) {
  return StatisticSpec{std::move(id), "", sensitivity, reference};
}

inline EquationSpec Eq(std::string id, absl::string_view text,
                       double sensitivity) {
  return EquationSpec{std::move(id), Parse(text), sensitivity};
}

inline Workload MakeWorkload(double epsilon, std::vector<StatisticSpec> stats,
                             std::vector<EquationSpec> eqs = {},
                             MetricOptions options = {}) {
  Validated<Workload> w =
      Workload::Create(epsilon, std::move(stats), std::move(eqs), options);
  if (!w.ok()) std::abort();
  return *std::move(w);
}

inline BudgetAllocation MakeAllocation(const Workload& w,
                                       std::vector<double> budgets) {
  Validated<BudgetAllocation> a = ValidateAllocation(w, budgets);
  if (!a.ok()) std::abort();
  return *std::move(a);
}

// The four-statistic example: eq1 = s2 + s3, eq2 = (s1 + s2) / s4.
inline Workload ExampleWorkload(MetricOptions options = {},
                              std::vector<double> refs = {10, 20, 15, 5}) {
  return MakeWorkload(1.0,
                      {Stat("s1", 1, refs[0]), Stat("s2", 1, refs[1]),
                       Stat("s3", 1, refs[2]), Stat("s4", 1, refs[3])},
                      {Eq("eq1", "s2 + s3", 2.0),
                       Eq("eq2", "(s1 + s2) / s4", 1.0)},
                      options);
}

// Random expression over `ids`. Constants are non-negative.
class ExpressionGenerator {
 public:
  ExpressionGenerator(std::uint64_t seed, std::vector<std::string> ids)
      : rng_(seed), ids_(std::move(ids)) {}

  Expression Generate(int max_depth) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (max_depth == 0 || coin(rng_) < 0.25) return Leaf();
    if (coin(rng_) < 0.15) return Expression::Negate(Generate(max_depth - 1));
    std::uniform_int_distribution<int> op(0, 3);
    return Expression::Binary(static_cast<BinaryOp>(op(rng_)),
                              Generate(max_depth - 1),
                              Generate(max_depth - 1));
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  Expression Leaf() {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng_) < 0.7) {
      std::uniform_int_distribution<std::size_t> pick(0, ids_.size() - 1);
      return Expression::StatRef(ids_[pick(rng_)]);
    }
    if (coin(rng_) < 0.5) {
      std::uniform_int_distribution<int> small(0, 9);
      return Expression::Constant(small(rng_));
    }
    std::uniform_real_distribution<double> value(0.0, 10.0);
    return Expression::Constant(value(rng_));
  }

  std::mt19937_64 rng_;
  std::vector<std::string> ids_;
};

inline std::vector<std::string> StatisticIds(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("s" + std::to_string(i + 1));
  return ids;
}

// nsta statistics with positive references and one to three equations that
// each couple at least two statistics.
inline Workload RandomCoupledWorkload(std::mt19937_64& rng, std::size_t nsta,
                                      bool normalize) {
  std::uniform_real_distribution<double> sen(0.5, 3.0), ref(1.0, 20.0),
      eps(0.5, 2.0);
  const std::vector<std::string> ids = StatisticIds(nsta);
  std::vector<StatisticSpec> stats;
  for (const std::string& id : ids) stats.push_back(Stat(id, sen(rng), ref(rng)));
  ExpressionGenerator gen(rng(), ids);
  std::vector<EquationSpec> eqs;
  std::uniform_int_distribution<int> count(1, 3);
  const int neq = count(rng);
  while (static_cast<int>(eqs.size()) < neq) {
    Expression expr = gen.Generate(3);
    if (FreeStatistics(expr).size() < 2) continue;
    EquationSpec eq{"e" + std::to_string(eqs.size() + 1), std::move(expr),
                    sen(rng)};
    Validated<Workload> probe =
        Workload::Create(1.0, stats, {eq}, MetricOptions{});
    if (!probe.ok()) continue;
    // Skip equations whose reference point sits near a pole.
    absl::StatusOr<double> at_ref = Evaluate(eq.expression, probe->ReferenceValues());
    if (!at_ref.ok() || !std::isfinite(*at_ref) || std::abs(*at_ref) > 1e6) {
      continue;
    }
    eqs.push_back(std::move(eq));
  }
  MetricOptions options;
  options.normalize_by_sensitivity = normalize;
  return MakeWorkload(eps(rng), std::move(stats), std::move(eqs), options);
}

// Workload whose equations each reference a single statistic.
inline Workload RandomSeparableWorkload(std::mt19937_64& rng,
                                        std::size_t nsta, bool normalize) {
  std::uniform_real_distribution<double> sen(0.2, 5.0), ref(1.0, 20.0),
      eps(0.5, 2.0);
  const std::vector<std::string> ids = StatisticIds(nsta);
  std::vector<StatisticSpec> stats;
  for (const std::string& id : ids) stats.push_back(Stat(id, sen(rng), ref(rng)));
  std::vector<EquationSpec> eqs;
  const char* forms[] = {"3 * {}", "{} * {} + 1", "10 / {}", "{}"};
  std::uniform_int_distribution<std::size_t> pick_stat(0, nsta - 1);
  std::uniform_int_distribution<int> pick_form(0, 3), count(0, 3);
  const int neq = count(rng);
  for (int j = 0; j < neq; ++j) {
    const std::string& id = ids[pick_stat(rng)];
    std::string text = forms[pick_form(rng)];
    for (std::size_t at; (at = text.find("{}")) != std::string::npos;) {
      text.replace(at, 2, id);
    }
    eqs.push_back(Eq("e" + std::to_string(j + 1), text, sen(rng)));
  }
  MetricOptions options;
  options.normalize_by_sensitivity = normalize;
  return MakeWorkload(eps(rng), std::move(stats), std::move(eqs), options);
}

}  // namespace dpbudget::testing

#endif  // DPBUDGET_TESTS_TEST_UTIL_H_
