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

#include "dpbudget/status.h"

#include <array>
#include "absl/types/optional.h"
#include <string>

#include "absl/strings/cord.h"

namespace dpbudget {
namespace {

constexpr absl::string_view kKindPayloadUrl = "dpbudget/error-kind";

struct KindInfo {
  ErrorKind kind;
  absl::string_view name;
  absl::StatusCode code;
};

constexpr std::array<KindInfo, 19> kKinds = {{
    {ErrorKind::kMalformedDocument, "MalformedDocument",
     absl::StatusCode::kInvalidArgument},
    {ErrorKind::kDuplicateId, "DuplicateId",
     absl::StatusCode::kInvalidArgument},
    {ErrorKind::kNonPositiveSensitivity, "NonPositiveSensitivity",
     absl::StatusCode::kInvalidArgument},
    {ErrorKind::kUnknownStatisticRef, "UnknownStatisticRef",
     absl::StatusCode::kInvalidArgument},
    {ErrorKind::kNonPositiveEpsilon, "NonPositiveEpsilon",
     absl::StatusCode::kInvalidArgument},
    {ErrorKind::kInvalidOptions, "InvalidOptions",
     absl::StatusCode::kInvalidArgument},
    {ErrorKind::kExpressionSyntax, "ParseError",
     absl::StatusCode::kInvalidArgument},
    {ErrorKind::kBudgetSumMismatch, "BudgetSumMismatch",
     absl::StatusCode::kInvalidArgument},
    {ErrorKind::kNonPositiveBudget, "NonPositiveBudget",
     absl::StatusCode::kInvalidArgument},
    {ErrorKind::kMissingBudget, "MissingBudget",
     absl::StatusCode::kInvalidArgument},
    {ErrorKind::kUnknownBudgetId, "UnknownBudgetId",
     absl::StatusCode::kInvalidArgument},
    {ErrorKind::kMissingValue, "MissingValue", absl::StatusCode::kNotFound},
    {ErrorKind::kDivisionNearZero, "DivisionNearZero",
     absl::StatusCode::kOutOfRange},
    {ErrorKind::kHeavyTailWarning, "HeavyTailWarning",
     absl::StatusCode::kAborted},
    {ErrorKind::kNotSeparable, "NotSeparable",
     absl::StatusCode::kFailedPrecondition},
    {ErrorKind::kTooManyStatistics, "TooManyStatistics",
     absl::StatusCode::kInvalidArgument},
    {ErrorKind::kResolutionTooCoarse, "ResolutionTooCoarse",
     absl::StatusCode::kInvalidArgument},
    {ErrorKind::kNotConverged, "NotConverged",
     absl::StatusCode::kDeadlineExceeded},
    {ErrorKind::kInvalidArgument, "InvalidArgument",
     absl::StatusCode::kInvalidArgument},
}};

const KindInfo& Lookup(ErrorKind kind) {
  for (const KindInfo& info : kKinds) {
    if (info.kind == kind) return info;
  }
  return kKinds.back();
}

}  // namespace

absl::string_view ErrorKindName(ErrorKind kind) { return Lookup(kind).name; }

absl::Status MakeError(ErrorKind kind, absl::string_view message) {
  const KindInfo& info = Lookup(kind);
  absl::Status status(info.code, std::string(info.name) + ": " +
                                     std::string(message));
  status.SetPayload(kKindPayloadUrl, absl::Cord(info.name));
  return status;
}

ErrorKind ErrorKindOf(const absl::Status& status) {
  absl::optional<absl::Cord> payload = status.GetPayload(kKindPayloadUrl);
  if (!payload.has_value()) return ErrorKind::kInvalidArgument;
  for (const KindInfo& info : kKinds) {
    if (*payload == info.name) return info.kind;
  }
  return ErrorKind::kInvalidArgument;
}

bool HasErrorKind(const absl::Status& status, ErrorKind kind) {
  return !status.ok() && ErrorKindOf(status) == kind;
}

}  // namespace dpbudget
