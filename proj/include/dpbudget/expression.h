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

// Arithmetic expressions over statistic identifiers. These model the
// equations an analyst is predicted to run on released statistics, for
// example "s2 + s3" or "(s1 + s2) / s4".
//
// Grammar (left-associative, * and / bind tighter than + and -):
//
//   expr   := term (("+" | "-") term)*
//   term   := factor (("*" | "/") factor)*
//   factor := NUMBER | IDENT | "-" factor | "(" expr ")"
//   IDENT  := [A-Za-z_][A-Za-z0-9_]*

#ifndef DPBUDGET_EXPRESSION_H_
#define DPBUDGET_EXPRESSION_H_

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include "absl/strings/string_view.h"
#include <vector>

#include "absl/status/statusor.h"

namespace dpbudget {

// Denominators with magnitude below this are rejected during evaluation.
inline constexpr double kDivisionThreshold = 1e-12;

using ValueMap = std::map<std::string, double, std::less<>>;

enum class BinaryOp { kAdd, kSub, kMul, kDiv };

// Immutable expression tree with value semantics. Copies share nodes.
class Expression {
 public:
  enum class Kind { kConstant, kStatRef, kNegate, kBinary };

  // Constant(0).
  Expression();

  // `value` must be finite and non-negative; negative literals are written
  // as Negate(Constant(...)), which is also what the parser produces.
  static Expression Constant(double value);
  static Expression StatRef(std::string id);
  static Expression Negate(Expression operand);
  static Expression Binary(BinaryOp op, Expression lhs, Expression rhs);

  Kind kind() const;
  double constant() const;
  const std::string& stat_id() const;
  BinaryOp op() const;
  // Child of a Negate node.
  const Expression& operand() const;
  const Expression& lhs() const;
  const Expression& rhs() const;

  // Structural equality. Constants compare by value.
  friend bool operator==(const Expression& a, const Expression& b);

 private:
  struct Node;
  explicit Expression(std::shared_ptr<const Node> node);

  std::shared_ptr<const Node> node_;
};

struct ParseError {
  std::size_t offset = 0;
  // Sorted, e.g. {"(", "-", "IDENT", "NUMBER"}.
  std::vector<std::string> expected;
  std::string detail;

  std::string ToString() const;
};

// On failure returns a kExpressionSyntax error; if `error` is non-null it
// receives the byte offset and expected-token set.
absl::StatusOr<Expression> ParseExpression(absl::string_view text,
                                           ParseError* error = nullptr);

// Canonical text with the fewest parentheses that still parse back to a
// structurally equal tree.
std::string FormatExpression(const Expression& expr);

std::set<std::string> FreeStatistics(const Expression& expr);

// Errors: kMissingValue, kDivisionNearZero.
absl::StatusOr<double> Evaluate(const Expression& expr, const ValueMap& values);

bool IsIdentifier(absl::string_view text);

// Flattened expression whose statistic references are resolved to slots of
// a dense value array. Intended for inner loops of sampling code.
class CompiledExpression {
 public:
  struct Result {
    double value = 0.0;
    bool division_near_zero = false;
  };

  // `slot_of` maps a statistic id to its index in the value array passed to
  // Evaluate, or nullopt if unknown (reported as kMissingValue).
  static absl::StatusOr<CompiledExpression> Compile(
      const Expression& expr,
      const std::function<std::optional<std::size_t>(absl::string_view)>&
          slot_of);

  Result Evaluate(std::span<const double> slots) const;

 private:
  struct Op {
    Expression::Kind kind;
    BinaryOp binary;
    double constant;
    std::size_t slot;
    std::size_t lhs;
    std::size_t rhs;
  };

  Result EvaluateNode(std::size_t index, std::span<const double> slots) const;

  std::vector<Op> ops_;
  std::size_t root_ = 0;
};

}  // namespace dpbudget

#endif  // DPBUDGET_EXPRESSION_H_
