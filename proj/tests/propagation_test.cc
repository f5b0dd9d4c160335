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

#include <cmath>
#include <random>
#include <vector>

#include "dpbudget/status.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace dpbudget {
namespace {

using ::dpbudget::testing::MakeAllocation;
using ::dpbudget::testing::MakeWorkload;
using ::dpbudget::testing::Parse;
using ::dpbudget::testing::Stat;
using ::testing::DoubleNear;
using ::testing::Pair;
using ::testing::UnorderedElementsAre;

TEST(GradientTest, LinearSum) {
  absl::StatusOr<ValueMap> g =
      GradientAtReference(Parse("s2 + s3"), {{"s2", 4}, {"s3", -9}});
  ASSERT_TRUE(g.ok());
  EXPECT_THAT(*g, UnorderedElementsAre(Pair("s2", 1.0), Pair("s3", 1.0)));
}

TEST(GradientTest, Quotient) {
  absl::StatusOr<ValueMap> g = GradientAtReference(
      Parse("(s1 + s2) / s4"), {{"s1", 10}, {"s2", 20}, {"s4", 5}});
  ASSERT_TRUE(g.ok());
  EXPECT_THAT(*g, UnorderedElementsAre(Pair("s1", DoubleNear(0.2, 1e-15)),
                                       Pair("s2", DoubleNear(0.2, 1e-15)),
                                       Pair("s4", DoubleNear(-1.2, 1e-15))));
}

TEST(GradientTest, RepeatedReferenceAccumulates) {
  absl::StatusOr<ValueMap> g =
      GradientAtReference(Parse("x * x - 3 * x"), {{"x", 2}});
  ASSERT_TRUE(g.ok());
  EXPECT_THAT(*g, UnorderedElementsAre(Pair("x", 1.0)));
}

TEST(GradientTest, Errors) {
  EXPECT_TRUE(HasErrorKind(
      GradientAtReference(Parse("a / b"), {{"a", 1}, {"b", 1e-13}}).status(),
      ErrorKind::kDivisionNearZero));
  EXPECT_TRUE(HasErrorKind(
      GradientAtReference(Parse("a / b"), {{"a", 1}}).status(),
      ErrorKind::kMissingValue));
}

TEST(GradientTest, AgreesWithCentralDifferences) {
  testing::ExpressionGenerator gen(2024, {"s1", "s2", "s3", "s4"});
  std::uniform_real_distribution<double> ref(-5.0, 5.0);
  int checked = 0;
  while (checked < 200) {
    const Expression expr = gen.Generate(4);
    const std::set<std::string> free = FreeStatistics(expr);
    if (free.empty()) continue;
    ValueMap refs;
    for (const char* id : {"s1", "s2", "s3", "s4"}) refs[id] = ref(gen.rng());
    absl::StatusOr<ValueMap> g = GradientAtReference(expr, refs);
    absl::StatusOr<double> f0 = Evaluate(expr, refs);
    if (!g.ok() || !f0.ok() || !std::isfinite(*f0)) continue;
    for (const std::string& id : free) {
      const double h = 1e-6 * std::max(1.0, std::abs(refs[id]));
      ValueMap up = refs, down = refs;
      up[id] += h;
      down[id] -= h;
      const double fd = (*Evaluate(expr, up) - *Evaluate(expr, down)) / (2 * h);
      const double exact = g->at(id);
      const double scale = std::max({std::abs(fd), std::abs(exact), 1.0});
      EXPECT_LE(std::abs(fd - exact), 1e-6 * scale)
          << FormatExpression(expr) << " d/d" << id;
    }
    ++checked;
  }
}

class ExamplePropagationTest : public ::testing::Test {
 protected:
  Workload w_ = testing::ExampleWorkload();
  BudgetAllocation quarter_ = MakeAllocation(w_, {0.25, 0.25, 0.25, 0.25});
};

TEST_F(ExamplePropagationTest, LinearAnalytic) {
  absl::StatusOr<PropagationResult> r =
      PropagateVarianceAnalytic(Parse("s2 + s3"), w_, quarter_);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->variance, 64.0);
  EXPECT_EQ(r->rmse, 8.0);
  EXPECT_EQ(r->method, Estimator::kAnalytic);
  EXPECT_FALSE(r->mc_detail.has_value());
}

TEST_F(ExamplePropagationTest, QuotientAnalytic) {
  const Workload w = MakeWorkload(
      4.0, {Stat("s1", 1, 10), Stat("s2", 1, 20), Stat("s3", 1, 15),
            Stat("s4", 1, 5)});
  const BudgetAllocation ones = MakeAllocation(w, {1, 1, 1, 1});
  absl::StatusOr<PropagationResult> r =
      PropagateVarianceAnalytic(Parse("(s1 + s2) / s4"), w, ones);
  ASSERT_TRUE(r.ok());
  EXPECT_NEAR(r->variance, 3.04, 1e-12);
}

TEST_F(ExamplePropagationTest, ConstantHasNoVariance) {
  absl::StatusOr<PropagationResult> r =
      PropagateVarianceAnalytic(Parse("3.5"), w_, quarter_);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->variance, 0.0);
  EXPECT_EQ(r->rmse, 0.0);
}

TEST_F(ExamplePropagationTest, LinearMonteCarloMatchesAnalytic) {
  absl::StatusOr<PropagationResult> r = PropagateVarianceMonteCarlo(
      Parse("s2 + s3"), w_, quarter_, 1000000, 31337);
  ASSERT_TRUE(r.ok()) << r.status();
  EXPECT_NEAR(r->rmse, 8.0, 0.08);
  EXPECT_EQ(r->method, Estimator::kMonteCarlo);
  ASSERT_TRUE(r->mc_detail.has_value());
  EXPECT_EQ(r->mc_detail->samples, 1000000);
  EXPECT_EQ(r->mc_detail->excluded, 0);
}

TEST_F(ExamplePropagationTest, MonteCarloIsDeterministic) {
  const Expression expr = Parse("(s1 + s2) / s4");
  absl::StatusOr<PropagationResult> a =
      PropagateVarianceMonteCarlo(expr, w_, quarter_, 20000, 5);
  absl::StatusOr<PropagationResult> b =
      PropagateVarianceMonteCarlo(expr, w_, quarter_, 20000, 5);
  ASSERT_TRUE(a.ok());
  EXPECT_EQ(*a, *b);
}

TEST_F(ExamplePropagationTest, MonteCarloIgnoresThreadCount) {
  const Expression expr = Parse("s1 * s2 - s3 / s4");
  absl::StatusOr<PropagationResult> one =
      PropagateVarianceMonteCarlo(expr, w_, quarter_, 30001, 9, 1);
  for (int threads : {2, 3, 8}) {
    absl::StatusOr<PropagationResult> many =
        PropagateVarianceMonteCarlo(expr, w_, quarter_, 30001, 9, threads);
    ASSERT_TRUE(many.ok());
    EXPECT_EQ(*many, *one) << threads;
  }
}

TEST_F(ExamplePropagationTest, MonteCarloNeedsEnoughSamples) {
  EXPECT_TRUE(HasErrorKind(
      PropagateVarianceMonteCarlo(Parse("s1"), w_, quarter_, 999, 1).status(),
      ErrorKind::kInvalidArgument));
}

TEST(PropagationGuardTest, NearZeroReferenceDenominator) {
  const Workload w = testing::ExampleWorkload({}, {10, 20, 15, 1e-13});
  const BudgetAllocation a = MakeAllocation(w, {0.25, 0.25, 0.25, 0.25});
  const Expression expr = Parse("(s1 + s2) / s4");
  EXPECT_TRUE(HasErrorKind(PropagateVarianceAnalytic(expr, w, a).status(),
                           ErrorKind::kDivisionNearZero));
  EXPECT_TRUE(HasErrorKind(
      PropagateVarianceMonteCarlo(expr, w, a, 1000, 1).status(),
      ErrorKind::kDivisionNearZero));
}

TEST(PropagationGuardTest, FrequentNearZeroDenominatorsAbort) {
  // The reference denominator is 2e-12, but noise of scale 1 pushes it
  // under the threshold on a large share of samples.
  const Workload w = MakeWorkload(1, {Stat("s1", 1, 1)});
  const BudgetAllocation a = MakeAllocation(w, {1});
  absl::StatusOr<PropagationResult> r = PropagateVarianceMonteCarlo(
      Parse("1 / (s1 * 0.000000000002)"), w, a, 10000, 3);
  EXPECT_TRUE(HasErrorKind(r.status(), ErrorKind::kHeavyTailWarning))
      << r.status();
}

TEST(PropagationPropertyTest, ScalingLaw) {
  testing::ExpressionGenerator gen(77, {"s1", "s2", "s3", "s4"});
  const Workload w = testing::ExampleWorkload();
  const BudgetAllocation a = MakeAllocation(w, {0.1, 0.2, 0.3, 0.4});
  for (double k : {2.0, 4.0, 0.5}) {
    Validated<Workload> wk = w.WithEpsilon(k);
    ASSERT_TRUE(wk.ok());
    const BudgetAllocation ak =
        MakeAllocation(*wk, {0.1 * k, 0.2 * k, 0.3 * k, 0.4 * k});
    for (int n = 0; n < 50; ++n) {
      const Expression expr = gen.Generate(3);
      absl::StatusOr<PropagationResult> base =
          PropagateVarianceAnalytic(expr, w, a);
      if (!base.ok()) continue;
      absl::StatusOr<PropagationResult> scaled =
          PropagateVarianceAnalytic(expr, *wk, ak);
      ASSERT_TRUE(scaled.ok());
      EXPECT_DOUBLE_EQ(scaled->rmse, base->rmse / k) << FormatExpression(expr);
    }
  }
}

TEST(PropagationPropertyTest, MoreBudgetNeverAddsVariance) {
  testing::ExpressionGenerator gen(78, {"s1", "s2", "s3", "s4"});
  const Workload w = testing::ExampleWorkload();
  const std::vector<double> base_budgets = {0.1, 0.2, 0.3, 0.4};
  const BudgetAllocation a = MakeAllocation(w, base_budgets);
  for (int n = 0; n < 100; ++n) {
    const Expression expr = gen.Generate(3);
    absl::StatusOr<PropagationResult> base =
        PropagateVarianceAnalytic(expr, w, a);
    if (!base.ok()) continue;
    for (std::size_t i = 0; i < 4; ++i) {
      std::vector<double> more = base_budgets;
      more[i] *= 1.5;
      double total = 0;
      for (double b : more) total += b;
      const Workload wider = *w.WithEpsilon(total);
      EXPECT_LE(
          PropagateVarianceAnalytic(expr, wider, MakeAllocation(wider, more))
              ->variance,
          base->variance)
          << FormatExpression(expr);
    }
  }
}

TEST(SummarizeErrorsTest, SmallSample) {
  const ErrorSummary s = SummarizeErrors({1, -1, 3, -3});
  EXPECT_EQ(s.mean, 0.0);
  EXPECT_DOUBLE_EQ(s.variance, 20.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.rmse, std::sqrt(5.0));
  EXPECT_EQ(SummarizeErrors({2}).variance, 0.0);
}

TEST(SummarizeErrorsTest, TrimDropsExtremeTails) {
  std::vector<double> errors(10000, 1.0);
  errors[0] = 1e6;
  errors[1] = -1e6;
  const ErrorSummary s = SummarizeErrors(errors);
  EXPECT_GT(s.rmse, 1000.0);
  EXPECT_DOUBLE_EQ(s.trimmed_rmse, 1.0);
}

}  // namespace
}  // namespace dpbudget
