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

// Laplace mechanism noise: per-statistic noise characterization, seeded
// sampling, release of noisy statistics, and sequential-composition
// accounting.

#ifndef DPBUDGET_NOISE_H_
#define DPBUDGET_NOISE_H_

#include <cstdint>

#include "absl/status/statusor.h"
#include "dpbudget/expression.h"
#include "dpbudget/workload.h"

namespace dpbudget {

struct NoiseProfile {
  double scale = 0.0;         // b = sensitivity / budget
  double variance = 0.0;      // 2 b^2
  double expected_abs = 0.0;  // E|X| = b
};

// Errors: kNonPositiveSensitivity, kNonPositiveBudget.
absl::StatusOr<NoiseProfile> LaplaceNoiseProfile(double sensitivity,
                                                 double budget);

// Counter-based random stream. The n-th output of the stream identified by
// (seed, statistic, trial) depends only on those values and n, so trials can
// be generated in any order or on any thread.
//
// The generator is SplitMix64 whose starting state is derived by chaining the
// SplitMix64 finalizer over seed, statistic index and trial index.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, std::uint64_t statistic, std::uint64_t trial);

  std::uint64_t NextBits();

  // Uniform on the open interval (-0.5, 0.5); never returns 0 or +-0.5.
  double NextCenteredUniform();

 private:
  std::uint64_t state_;
};

// Inverse-CDF Laplace draw: u ~ U(-0.5, 0.5), -scale * sign(u) * ln(1 - 2|u|).
double SampleLaplace(double scale, NoiseStream& stream);

// Noisy value of statistic `index` in trial `trial`: the reference value
// plus Laplace(sen / bud) noise from stream (seed, index, trial).
double ReleasedValue(const Workload& workload,
                     const BudgetAllocation& allocation, std::uint64_t seed,
                     std::size_t index, std::uint64_t trial);

// One non-interactive release of every statistic (trial 0).
absl::StatusOr<ValueMap> ReleaseStatistics(const Workload& workload,
                                           const BudgetAllocation& allocation,
                                           std::uint64_t seed);

// Total privacy loss under sequential composition.
double ConsumedBudget(const BudgetAllocation& allocation);

}  // namespace dpbudget

#endif  // DPBUDGET_NOISE_H_
