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

#include "dpbudget/expression.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <utility>
#include <variant>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "dpbudget/status.h"

namespace dpbudget {

struct Expression::Node {
  Kind kind = Kind::kConstant;
  double constant = 0.0;
  std::string id;
  BinaryOp op = BinaryOp::kAdd;
  Expression lhs;  // Negate operand lives here.
  Expression rhs;
};

Expression::Expression() : Expression(Constant(0.0)) {}

Expression::Expression(std::shared_ptr<const Node> node)
    : node_(std::move(node)) {}

Expression Expression::Constant(double value) {
  // Children are explicit nulls so this never recurses into Expression().
  auto node = std::make_shared<Node>(Node{Kind::kConstant, value, {}, {},
                                          Expression(nullptr),
                                          Expression(nullptr)});
  return Expression(std::move(node));
}

Expression Expression::StatRef(std::string id) {
  auto node = std::make_shared<Node>(Node{Kind::kStatRef, 0.0, std::move(id),
                                          {}, Expression(nullptr),
                                          Expression(nullptr)});
  return Expression(std::move(node));
}

Expression Expression::Negate(Expression operand) {
  auto node = std::make_shared<Node>(Node{Kind::kNegate, 0.0, {}, {},
                                          std::move(operand),
                                          Expression(nullptr)});
  return Expression(std::move(node));
}

Expression Expression::Binary(BinaryOp op, Expression lhs, Expression rhs) {
  auto node = std::make_shared<Node>(
      Node{Kind::kBinary, 0.0, {}, op, std::move(lhs), std::move(rhs)});
  return Expression(std::move(node));
}

Expression::Kind Expression::kind() const { return node_->kind; }
double Expression::constant() const { return node_->constant; }
const std::string& Expression::stat_id() const { return node_->id; }
BinaryOp Expression::op() const { return node_->op; }
const Expression& Expression::operand() const { return node_->lhs; }
const Expression& Expression::lhs() const { return node_->lhs; }
const Expression& Expression::rhs() const { return node_->rhs; }

bool operator==(const Expression& a, const Expression& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Expression::Kind::kConstant:
      return a.constant() == b.constant();
    case Expression::Kind::kStatRef:
      return a.stat_id() == b.stat_id();
    case Expression::Kind::kNegate:
      return a.operand() == b.operand();
    case Expression::Kind::kBinary:
      return a.op() == b.op() && a.lhs() == b.lhs() && a.rhs() == b.rhs();
  }
  return false;
}

std::string ParseError::ToString() const {
  std::string out = absl::StrCat("offset ", offset);
  if (!detail.empty()) absl::StrAppend(&out, ": ", detail);
  if (!expected.empty()) {
    absl::StrAppend(&out, "; expected one of {", absl::StrJoin(expected, ", "),
                    "}");
  }
  return out;
}

namespace {

constexpr int kMaxNesting = 256;

bool IsIdentStart(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}
bool IsIdentChar(char c) { return IsIdentStart(c) || (c >= '0' && c <= '9'); }
bool IsDigit(char c) { return c >= '0' && c <= '9'; }

class Parser {
 public:
  explicit Parser(absl::string_view text) : text_(text) {}

  absl::StatusOr<Expression> ParseAll(ParseError* error) {
    absl::StatusOr<Expression> result = ParseExpr();
    if (result.ok()) {
      SkipSpace();
      if (pos_ < text_.size()) {
        result = Fail({"*", "+", "-", "/", "end of input"},
                      absl::StrCat("unexpected '", text_.substr(pos_, 1), "'"));
      }
    }
    if (!result.ok() && error != nullptr) *error = error_;
    return result;
  }

 private:
  absl::Status Fail(std::vector<std::string> expected, std::string detail) {
    std::sort(expected.begin(), expected.end());
    error_.offset = pos_;
    error_.expected = std::move(expected);
    error_.detail = std::move(detail);
    return MakeError(ErrorKind::kExpressionSyntax, error_.ToString());
  }

  void SkipSpace() {
    while (pos_ < text_.size() &&
           (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
            text_[pos_] == '\r')) {
      ++pos_;
    }
  }

  bool Peek(char c) {
    SkipSpace();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  absl::StatusOr<Expression> ParseExpr() {
    absl::StatusOr<Expression> lhs = ParseTerm();
    if (!lhs.ok()) return lhs;
    Expression result = *std::move(lhs);
    while (Peek('+') || Peek('-')) {
      const BinaryOp op = text_[pos_] == '+' ? BinaryOp::kAdd : BinaryOp::kSub;
      ++pos_;
      absl::StatusOr<Expression> rhs = ParseTerm();
      if (!rhs.ok()) return rhs;
      result = Expression::Binary(op, std::move(result), *std::move(rhs));
    }
    return result;
  }

  absl::StatusOr<Expression> ParseTerm() {
    absl::StatusOr<Expression> lhs = ParseFactor();
    if (!lhs.ok()) return lhs;
    Expression result = *std::move(lhs);
    while (Peek('*') || Peek('/')) {
      const BinaryOp op = text_[pos_] == '*' ? BinaryOp::kMul : BinaryOp::kDiv;
      ++pos_;
      absl::StatusOr<Expression> rhs = ParseFactor();
      if (!rhs.ok()) return rhs;
      result = Expression::Binary(op, std::move(result), *std::move(rhs));
    }
    return result;
  }

  absl::StatusOr<Expression> ParseFactor() {
    SkipSpace();
    if (++depth_ > kMaxNesting) {
      return Fail({}, "expression nested too deeply");
    }
    absl::StatusOr<Expression> result = ParseFactorInner();
    --depth_;
    return result;
  }

  absl::StatusOr<Expression> ParseFactorInner() {
    if (pos_ >= text_.size()) {
      return Fail({"(", "-", "IDENT", "NUMBER"}, "unexpected end of input");
    }
    const char c = text_[pos_];
    if (c == '-') {
      ++pos_;
      absl::StatusOr<Expression> operand = ParseFactor();
      if (!operand.ok()) return operand;
      return Expression::Negate(*std::move(operand));
    }
    if (c == '(') {
      ++pos_;
      absl::StatusOr<Expression> inner = ParseExpr();
      if (!inner.ok()) return inner;
      if (!Peek(')')) {
        return Fail({")", "*", "+", "-", "/"}, "unbalanced parenthesis");
      }
      ++pos_;
      return inner;
    }
    if (IsIdentStart(c)) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && IsIdentChar(text_[pos_])) ++pos_;
      return Expression::StatRef(std::string(text_.substr(start, pos_ - start)));
    }
    if (IsDigit(c) || c == '.') return ParseNumber();
    return Fail({"(", "-", "IDENT", "NUMBER"},
                absl::StrCat("unexpected '", text_.substr(pos_, 1), "'"));
  }

  absl::StatusOr<Expression> ParseNumber() {
    const std::size_t start = pos_;
    std::size_t end = pos_;
    std::size_t digits = 0;
    while (end < text_.size() && IsDigit(text_[end])) ++end, ++digits;
    if (end < text_.size() && text_[end] == '.') {
      ++end;
      while (end < text_.size() && IsDigit(text_[end])) ++end, ++digits;
    }
    if (digits == 0) {
      return Fail({"(", "-", "IDENT", "NUMBER"}, "malformed number");
    }
    if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
      std::size_t exp = end + 1;
      if (exp < text_.size() && (text_[exp] == '+' || text_[exp] == '-')) {
        ++exp;
      }
      if (exp < text_.size() && IsDigit(text_[exp])) {
        while (exp < text_.size() && IsDigit(text_[exp])) ++exp;
        end = exp;
      }
    }
    double value = 0.0;
    const char* first = text_.data() + start;
    const char* last = text_.data() + end;
    const std::from_chars_result parsed = std::from_chars(first, last, value);
    if (parsed.ec != std::errc() || parsed.ptr != last ||
        !std::isfinite(value)) {
      return Fail({"NUMBER"}, "number out of range");
    }
    pos_ = end;
    return Expression::Constant(value);
  }

  absl::string_view text_;
  std::size_t pos_ = 0;
  int depth_ = 0;
  ParseError error_;
};

int Precedence(const Expression& expr) {
  switch (expr.kind()) {
    case Expression::Kind::kBinary:
      return (expr.op() == BinaryOp::kAdd || expr.op() == BinaryOp::kSub) ? 1
                                                                          : 2;
    case Expression::Kind::kNegate:
      return 3;
    default:
      return 4;
  }
}

absl::string_view OpSymbol(BinaryOp op) {
  switch (op) {
    case BinaryOp::kAdd:
      return " + ";
    case BinaryOp::kSub:
      return " - ";
    case BinaryOp::kMul:
      return " * ";
    case BinaryOp::kDiv:
      return " / ";
  }
  return " ? ";
}

void FormatInto(const Expression& expr, std::string* out);

void FormatChild(const Expression& child, bool parenthesize, std::string* out) {
  if (parenthesize) out->push_back('(');
  FormatInto(child, out);
  if (parenthesize) out->push_back(')');
}

void FormatInto(const Expression& expr, std::string* out) {
  switch (expr.kind()) {
    case Expression::Kind::kConstant: {
      char buf[64];
      const std::to_chars_result r =
          std::to_chars(buf, buf + sizeof(buf), expr.constant());
      out->append(buf, r.ptr);
      return;
    }
    case Expression::Kind::kStatRef:
      out->append(expr.stat_id());
      return;
    case Expression::Kind::kNegate:
      out->push_back('-');
      FormatChild(expr.operand(), Precedence(expr.operand()) < 3, out);
      return;
    case Expression::Kind::kBinary: {
      const int prec = Precedence(expr);
      FormatChild(expr.lhs(), Precedence(expr.lhs()) < prec, out);
      absl::StrAppend(out, OpSymbol(expr.op()));
      FormatChild(expr.rhs(), Precedence(expr.rhs()) <= prec, out);
      return;
    }
  }
}

void CollectFree(const Expression& expr, std::set<std::string>* ids) {
  switch (expr.kind()) {
    case Expression::Kind::kConstant:
      return;
    case Expression::Kind::kStatRef:
      ids->insert(expr.stat_id());
      return;
    case Expression::Kind::kNegate:
      CollectFree(expr.operand(), ids);
      return;
    case Expression::Kind::kBinary:
      CollectFree(expr.lhs(), ids);
      CollectFree(expr.rhs(), ids);
      return;
  }
}

}  // namespace

absl::StatusOr<Expression> ParseExpression(absl::string_view text,
                                           ParseError* error) {
  return Parser(text).ParseAll(error);
}

std::string FormatExpression(const Expression& expr) {
  std::string out;
  FormatInto(expr, &out);
  return out;
}

std::set<std::string> FreeStatistics(const Expression& expr) {
  std::set<std::string> ids;
  CollectFree(expr, &ids);
  return ids;
}

absl::StatusOr<double> Evaluate(const Expression& expr,
                                const ValueMap& values) {
  switch (expr.kind()) {
    case Expression::Kind::kConstant:
      return expr.constant();
    case Expression::Kind::kStatRef: {
      auto it = values.find(expr.stat_id());
      if (it == values.end()) {
        return MakeError(ErrorKind::kMissingValue,
                         absl::StrCat("no value for statistic '",
                                      expr.stat_id(), "'"));
      }
      return it->second;
    }
    case Expression::Kind::kNegate: {
      absl::StatusOr<double> v = Evaluate(expr.operand(), values);
      if (!v.ok()) return v;
      return -*v;
    }
    case Expression::Kind::kBinary: {
      absl::StatusOr<double> a = Evaluate(expr.lhs(), values);
      if (!a.ok()) return a;
      absl::StatusOr<double> b = Evaluate(expr.rhs(), values);
      if (!b.ok()) return b;
      switch (expr.op()) {
        case BinaryOp::kAdd:
          return *a + *b;
        case BinaryOp::kSub:
          return *a - *b;
        case BinaryOp::kMul:
          return *a * *b;
        case BinaryOp::kDiv:
          if (std::abs(*b) < kDivisionThreshold) {
            return MakeError(
                ErrorKind::kDivisionNearZero,
                absl::StrCat("denominator ", *b, " in '",
                             FormatExpression(expr), "'"));
          }
          return *a / *b;
      }
    }
  }
  return MakeError(ErrorKind::kInvalidArgument, "corrupt expression");
}

bool IsIdentifier(absl::string_view text) {
  if (text.empty() || !IsIdentStart(text.front())) return false;
  return std::all_of(text.begin(), text.end(), IsIdentChar);
}

absl::StatusOr<CompiledExpression> CompiledExpression::Compile(
    const Expression& expr,
    const std::function<std::optional<std::size_t>(absl::string_view)>&
        slot_of) {
  CompiledExpression compiled;
  absl::Status status;
  std::function<std::size_t(const Expression&)> emit =
      [&](const Expression& e) -> std::size_t {
    Op op{e.kind(), BinaryOp::kAdd, 0.0, 0, 0, 0};
    switch (e.kind()) {
      case Expression::Kind::kConstant:
        op.constant = e.constant();
        break;
      case Expression::Kind::kStatRef: {
        std::optional<std::size_t> slot = slot_of(e.stat_id());
        if (!slot.has_value() && status.ok()) {
          status = MakeError(ErrorKind::kMissingValue,
                             absl::StrCat("no slot for statistic '",
                                          e.stat_id(), "'"));
        }
        op.slot = slot.value_or(0);
        break;
      }
      case Expression::Kind::kNegate:
        op.lhs = emit(e.operand());
        break;
      case Expression::Kind::kBinary:
        op.binary = e.op();
        op.lhs = emit(e.lhs());
        op.rhs = emit(e.rhs());
        break;
    }
    compiled.ops_.push_back(op);
    return compiled.ops_.size() - 1;
  };
  compiled.root_ = emit(expr);
  if (!status.ok()) return status;
  return compiled;
}

CompiledExpression::Result CompiledExpression::EvaluateNode(
    std::size_t index, std::span<const double> slots) const {
  const Op& op = ops_[index];
  switch (op.kind) {
    case Expression::Kind::kConstant:
      return {op.constant, false};
    case Expression::Kind::kStatRef:
      return {slots[op.slot], false};
    case Expression::Kind::kNegate: {
      Result r = EvaluateNode(op.lhs, slots);
      r.value = -r.value;
      return r;
    }
    case Expression::Kind::kBinary: {
      const Result a = EvaluateNode(op.lhs, slots);
      if (a.division_near_zero) return a;
      const Result b = EvaluateNode(op.rhs, slots);
      if (b.division_near_zero) return b;
      switch (op.binary) {
        case BinaryOp::kAdd:
          return {a.value + b.value, false};
        case BinaryOp::kSub:
          return {a.value - b.value, false};
        case BinaryOp::kMul:
          return {a.value * b.value, false};
        case BinaryOp::kDiv:
          if (std::abs(b.value) < kDivisionThreshold) return {0.0, true};
          return {a.value / b.value, false};
      }
    }
  }
  return {0.0, true};
}

CompiledExpression::Result CompiledExpression::Evaluate(
    std::span<const double> slots) const {
  return EvaluateNode(root_, slots);
}

}  // namespace dpbudget
