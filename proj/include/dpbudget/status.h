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

#ifndef DPBUDGET_STATUS_H_
#define DPBUDGET_STATUS_H_

#include "absl/strings/string_view.h"

#include "absl/status/status.h"

namespace dpbudget {

// Domain error kinds. Each kind maps onto a canonical absl status code and is
// also attached to the status as a payload so callers can tell apart, say, a
// missing value from a near-zero division (both are argument problems).
enum class ErrorKind {
  kMalformedDocument,
  kDuplicateId,
  kNonPositiveSensitivity,
  kUnknownStatisticRef,
  kNonPositiveEpsilon,
  kInvalidOptions,
  kExpressionSyntax,
  kBudgetSumMismatch,
  kNonPositiveBudget,
  kMissingBudget,
  kUnknownBudgetId,
  kMissingValue,
  kDivisionNearZero,
  kHeavyTailWarning,
  kNotSeparable,
  kTooManyStatistics,
  kResolutionTooCoarse,
  kNotConverged,
  kInvalidArgument,
};

absl::string_view ErrorKindName(ErrorKind kind);

absl::Status MakeError(ErrorKind kind, absl::string_view message);

// Returns the kind attached by MakeError, or kInvalidArgument for statuses
// that carry none. Must not be called on an OK status.
ErrorKind ErrorKindOf(const absl::Status& status);

bool HasErrorKind(const absl::Status& status, ErrorKind kind);

}  // namespace dpbudget

#endif  // DPBUDGET_STATUS_H_
