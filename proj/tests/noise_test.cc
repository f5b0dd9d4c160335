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

#include "dpbudget/noise.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dpbudget/status.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace dpbudget {
namespace {

using ::dpbudget::testing::MakeAllocation;
using ::dpbudget::testing::MakeWorkload;
using ::dpbudget::testing::Stat;

double LaplaceCdf(double x) {
  return x < 0 ? 0.5 * std::exp(x) : 1.0 - 0.5 * std::exp(-x);
}

std::vector<double> Draws(std::uint64_t seed, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    NoiseStream stream(seed, 0, t);
    out[t] = SampleLaplace(1.0, stream);
  }
  return out;
}

TEST(LaplaceNoiseProfileTest, UnitScale) {
  absl::StatusOr<NoiseProfile> p = LaplaceNoiseProfile(1, 1);
  ASSERT_TRUE(p.ok());
  EXPECT_EQ(p->scale, 1.0);
  EXPECT_EQ(p->variance, 2.0);
  EXPECT_EQ(p->expected_abs, 1.0);
}

TEST(LaplaceNoiseProfileTest, ScaledCase) {
  absl::StatusOr<NoiseProfile> p = LaplaceNoiseProfile(2, 0.5);
  ASSERT_TRUE(p.ok());
  EXPECT_EQ(p->scale, 4.0);
  EXPECT_EQ(p->variance, 32.0);
  EXPECT_EQ(p->expected_abs, 4.0);
}

TEST(LaplaceNoiseProfileTest, RejectsNonPositiveInputs) {
  EXPECT_TRUE(HasErrorKind(LaplaceNoiseProfile(1, 0).status(),
                           ErrorKind::kNonPositiveBudget));
  EXPECT_TRUE(HasErrorKind(LaplaceNoiseProfile(1, -0.1).status(),
                           ErrorKind::kNonPositiveBudget));
  EXPECT_TRUE(HasErrorKind(LaplaceNoiseProfile(0, 1).status(),
                           ErrorKind::kNonPositiveSensitivity));
}

TEST(LaplaceNoiseProfileTest, Homogeneity) {
  for (double sen : {0.01, 1.0, 3.0, 250.0}) {
    for (double bud : {1e-4, 0.3, 1.0, 7.5}) {
      const NoiseProfile base = *LaplaceNoiseProfile(sen, bud);
      for (double k : {0.5, 2.0, 4.0, 1024.0}) {
        EXPECT_DOUBLE_EQ(LaplaceNoiseProfile(sen, k * bud)->scale,
                         base.scale / k);
      }
      // Powers of two keep both quotients exact.
      for (double k : {0.25, 2.0, 8.0}) {
        const NoiseProfile scaled = *LaplaceNoiseProfile(k * sen, k * bud);
        EXPECT_EQ(scaled.scale, base.scale);
        EXPECT_EQ(scaled.variance, base.variance);
      }
    }
  }
}

TEST(NoiseStreamTest, CenteredUniformStaysInsideOpenInterval) {
  NoiseStream stream(1, 2, 3);
  for (int k = 0; k < 100000; ++k) {
    const double u = stream.NextCenteredUniform();
    ASSERT_GT(u, -0.5);
    ASSERT_LT(u, 0.5);
    ASSERT_NE(u, 0.0);
  }
}

TEST(NoiseStreamTest, StreamsAreDeterministicAndDistinct) {
  NoiseStream a(42, 1, 7), b(42, 1, 7);
  NoiseStream other_stat(42, 2, 7), other_trial(42, 1, 8), other_seed(43, 1, 7);
  const std::uint64_t first = a.NextBits();
  EXPECT_EQ(first, b.NextBits());
  EXPECT_NE(first, other_stat.NextBits());
  EXPECT_NE(first, other_trial.NextBits());
  EXPECT_NE(first, other_seed.NextBits());
}

TEST(SampleLaplaceTest, MeanAndVarianceAtMillionDraws) {
  const std::vector<double> x = Draws(20260101, 1000000);
  double mean = 0;
  for (double v : x) mean += v;
  mean /= x.size();
  double var = 0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= (x.size() - 1);
  EXPECT_NEAR(mean, 0.0, 0.005);
  EXPECT_NEAR(var, 2.0, 0.02 * 2.0);
}

TEST(SampleLaplaceTest, KolmogorovSmirnov) {
  std::vector<double> x = Draws(7, 100000);
  std::sort(x.begin(), x.end());
  const double n = x.size();
  double d = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = LaplaceCdf(x[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  // Asymptotic critical value at alpha = 0.001.
  EXPECT_LT(d, 1.9495 / std::sqrt(n));
}

TEST(SampleLaplaceTest, ScaleIsLinear) {
  for (std::uint64_t t = 0; t < 1000; ++t) {
    NoiseStream a(5, 0, t), b(5, 0, t);
    EXPECT_DOUBLE_EQ(SampleLaplace(3.0, a), 3.0 * SampleLaplace(1.0, b));
  }
}

TEST(SampleLaplaceTest, BitIdenticalAcrossRuns) {
  const std::vector<double> x = Draws(11, 1000);
  const std::vector<double> y = Draws(11, 1000);
  EXPECT_EQ(x, y);
}

TEST(ReleaseStatisticsTest, DeterministicPerSeed) {
  const Workload w = testing::ExampleWorkload();
  const BudgetAllocation a = MakeAllocation(w, {0.25, 0.25, 0.25, 0.25});
  absl::StatusOr<ValueMap> first = ReleaseStatistics(w, a, 1234);
  absl::StatusOr<ValueMap> second = ReleaseStatistics(w, a, 1234);
  absl::StatusOr<ValueMap> other = ReleaseStatistics(w, a, 1235);
  ASSERT_TRUE(first.ok());
  EXPECT_EQ(first->size(), 4u);
  EXPECT_EQ(*first, *second);
  EXPECT_NE(*first, *other);
}

TEST(ReleaseStatisticsTest, UsesTrialZeroStream) {
  const Workload w = testing::ExampleWorkload();
  const BudgetAllocation a = MakeAllocation(w, {0.1, 0.2, 0.3, 0.4});
  const ValueMap released = *ReleaseStatistics(w, a, 77);
  for (std::size_t i = 0; i < w.num_statistics(); ++i) {
    EXPECT_EQ(released.at(w.statistics()[i].id), ReleasedValue(w, a, 77, i, 0));
  }
}

TEST(ReleaseStatisticsTest, LargeBudgetIsNearlyExact) {
  const Workload w = MakeWorkload(2e6, {Stat("a", 1, 10), Stat("b", 1, -3)});
  const BudgetAllocation a = MakeAllocation(w, {1e6, 1e6});
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const ValueMap released = *ReleaseStatistics(w, a, seed);
    EXPECT_NEAR(released.at("a"), 10, 1e-4);
    EXPECT_NEAR(released.at("b"), -3, 1e-4);
  }
}

TEST(ConsumedBudgetTest, Sums) {
  const Workload two = MakeWorkload(1, {Stat("s1", 1, 0), Stat("s2", 1, 0)});
  EXPECT_EQ(ConsumedBudget(MakeAllocation(two, {0.5, 0.5})), 1.0);
  const Workload three =
      MakeWorkload(1, {Stat("s1", 1, 0), Stat("s2", 1, 0), Stat("s3", 1, 0)});
  EXPECT_NEAR(ConsumedBudget(MakeAllocation(three, {0.2, 0.3, 0.5})), 1.0,
              1e-15);
}

}  // namespace
}  // namespace dpbudget
