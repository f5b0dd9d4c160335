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

#include <cmath>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "dpbudget/status.h"

namespace dpbudget {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t Finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

absl::StatusOr<NoiseProfile> LaplaceNoiseProfile(double sensitivity,
                                                 double budget) {
  if (!(sensitivity > 0.0)) {
    return MakeError(ErrorKind::kNonPositiveSensitivity,
                     absl::StrCat("sensitivity must be > 0, got ",
                                  sensitivity));
  }
  if (!(budget > 0.0)) {
    return MakeError(ErrorKind::kNonPositiveBudget,
                     absl::StrCat("budget must be > 0, got ", budget));
  }
  const double scale = sensitivity / budget;
  return NoiseProfile{scale, 2.0 * scale * scale, scale};
}

NoiseStream::NoiseStream(std::uint64_t seed, std::uint64_t statistic,
                         std::uint64_t trial) {
  std::uint64_t key = Finalize(seed + kGolden);
  key = Finalize(key ^ (statistic + kGolden));
  key = Finalize(key ^ (trial + kGolden));
  state_ = key;
}

std::uint64_t NoiseStream::NextBits() {
  state_ += kGolden;
  return Finalize(state_);
}

double NoiseStream::NextCenteredUniform() {
  // m in [-2^52, 2^52); (m + 0.5) * 2^-53 is exact and lies strictly inside
  // (-0.5, 0.5).
  const auto m = static_cast<std::int64_t>(NextBits() >> 11) -
                 (std::int64_t{1} << 52);
  return (static_cast<double>(m) + 0.5) * 0x1p-53;
}

double SampleLaplace(double scale, NoiseStream& stream) {
  const double u = stream.NextCenteredUniform();
  const double magnitude = -scale * std::log1p(-2.0 * std::abs(u));
  return u < 0.0 ? -magnitude : magnitude;
}

double ReleasedValue(const Workload& workload,
                     const BudgetAllocation& allocation, std::uint64_t seed,
                     std::size_t index, std::uint64_t trial) {
  const StatisticSpec& s = workload.statistics()[index];
  NoiseStream stream(seed, index, trial);
  return s.reference_value +
         SampleLaplace(s.sensitivity / allocation.budgets()[index], stream);
}

absl::StatusOr<ValueMap> ReleaseStatistics(const Workload& workload,
                                           const BudgetAllocation& allocation,
                                           std::uint64_t seed) {
  if (absl::Status s = CheckAllocationMatches(workload, allocation); !s.ok()) {
    return s;
  }
  ValueMap released;
  for (std::size_t i = 0; i < workload.num_statistics(); ++i) {
    released[workload.statistics()[i].id] =
        ReleasedValue(workload, allocation, seed, i, /*trial=*/0);
  }
  return released;
}

double ConsumedBudget(const BudgetAllocation& allocation) {
  const std::span<const double> budgets = allocation.budgets();
  return std::accumulate(budgets.begin(), budgets.end(), 0.0);
}

}  // namespace dpbudget
