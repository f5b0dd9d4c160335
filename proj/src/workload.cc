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

#include "dpbudget/workload.h"

#include <cmath>
#include <set>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "json.hpp"

namespace dpbudget {
namespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

ValidationError Error(ErrorKind kind, std::string subject,
                      std::string message) {
  return ValidationError{kind, std::move(subject), std::move(message)};
}

// Records an error for every key of `object` not in `allowed`.
void RejectUnknownKeys(const Json& object,
                       std::initializer_list<absl::string_view> allowed,
                       absl::string_view where, ValidationErrors* errors) {
  for (const auto& [key, unused] : object.items()) {
    bool known = false;
    for (absl::string_view a : allowed) known = known || key == a;
    if (!known) {
      errors->push_back(Error(ErrorKind::kMalformedDocument, key,
                              absl::StrCat("unknown key '", key, "' in ",
                                           where)));
    }
  }
}

std::optional<double> GetNumber(const Json& object, absl::string_view key,
                                absl::string_view where, bool required,
                                ValidationErrors* errors) {
  auto it = object.find(key);
  if (it == object.end()) {
    if (required) {
      errors->push_back(Error(ErrorKind::kMalformedDocument, std::string(key),
                              absl::StrCat("missing '", key, "' in ", where)));
    }
    return std::nullopt;
  }
  if (!it->is_number()) {
    errors->push_back(Error(ErrorKind::kMalformedDocument, std::string(key),
                            absl::StrCat("'", key, "' in ", where,
                                         " must be a number")));
    return std::nullopt;
  }
  return it->get<double>();
}

std::optional<std::string> GetString(const Json& object, absl::string_view key,
                                     absl::string_view where, bool required,
                                     ValidationErrors* errors) {
  auto it = object.find(key);
  if (it == object.end()) {
    if (required) {
      errors->push_back(Error(ErrorKind::kMalformedDocument, std::string(key),
                              absl::StrCat("missing '", key, "' in ", where)));
    }
    return std::nullopt;
  }
  if (!it->is_string()) {
    errors->push_back(Error(ErrorKind::kMalformedDocument, std::string(key),
                            absl::StrCat("'", key, "' in ", where,
                                         " must be a string")));
    return std::nullopt;
  }
  return it->get<std::string>();
}

MetricOptions ParseOptions(const Json& object, ValidationErrors* errors) {
  MetricOptions options;
  if (!object.is_object()) {
    errors->push_back(Error(ErrorKind::kMalformedDocument, "options",
                            "'options' must be an object"));
    return options;
  }
  RejectUnknownKeys(object,
                    {"normalize_by_sensitivity", "estimator", "mc_samples",
                     "min_budget_fraction"},
                    "options", errors);
  if (auto it = object.find("normalize_by_sensitivity"); it != object.end()) {
    if (it->is_boolean()) {
      options.normalize_by_sensitivity = it->get<bool>();
    } else {
      errors->push_back(Error(ErrorKind::kMalformedDocument,
                              "normalize_by_sensitivity",
                              "'normalize_by_sensitivity' must be a boolean"));
    }
  }
  if (std::optional<std::string> name =
          GetString(object, "estimator", "options", false, errors)) {
    if (std::optional<Estimator> estimator = ParseEstimator(*name)) {
      options.estimator = *estimator;
    } else {
      errors->push_back(Error(ErrorKind::kMalformedDocument, "estimator",
                              absl::StrCat("unknown estimator '", *name,
                                           "' (analytic|montecarlo)")));
    }
  }
  if (auto it = object.find("mc_samples"); it != object.end()) {
    if (it->is_number_integer()) {
      options.mc_samples = it->get<std::int64_t>();
    } else {
      errors->push_back(Error(ErrorKind::kMalformedDocument, "mc_samples",
                              "'mc_samples' must be an integer"));
    }
  }
  if (std::optional<double> fraction = GetNumber(
          object, "min_budget_fraction", "options", false, errors)) {
    options.min_budget_fraction = *fraction;
  }
  return options;
}

OrderedJson OptionsToJson(const MetricOptions& options) {
  OrderedJson out;
  out["normalize_by_sensitivity"] = options.normalize_by_sensitivity;
  out["estimator"] = std::string(EstimatorName(options.estimator));
  out["mc_samples"] = options.mc_samples;
  out["min_budget_fraction"] = options.min_budget_fraction;
  return out;
}

}  // namespace

std::string ValidationError::ToString() const {
  if (subject.empty()) return absl::StrCat(ErrorKindName(kind), ": ", message);
  return absl::StrCat(ErrorKindName(kind), "(", subject, "): ", message);
}

absl::Status ErrorsToStatus(const ValidationErrors& errors) {
  if (errors.empty()) return absl::OkStatus();
  std::vector<std::string> lines;
  lines.reserve(errors.size());
  for (const ValidationError& e : errors) lines.push_back(e.ToString());
  return MakeError(errors.front().kind, absl::StrJoin(lines, "; "));
}

absl::string_view EstimatorName(Estimator estimator) {
  return estimator == Estimator::kAnalytic ? "analytic" : "montecarlo";
}

std::optional<Estimator> ParseEstimator(absl::string_view name) {
  if (name == "analytic") return Estimator::kAnalytic;
  if (name == "montecarlo") return Estimator::kMonteCarlo;
  return std::nullopt;
}

Validated<Workload> Workload::Create(double epsilon,
                                     std::vector<StatisticSpec> statistics,
                                     std::vector<EquationSpec> equations,
                                     MetricOptions options) {
  ValidationErrors errors;
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    errors.push_back(Error(ErrorKind::kNonPositiveEpsilon, "",
                           absl::StrCat("epsilon must be positive and finite, "
                                        "got ",
                                        epsilon)));
  }
  if (statistics.empty()) {
    errors.push_back(Error(ErrorKind::kMalformedDocument, "",
                           "at least one statistic is required"));
  }
  std::set<std::string, std::less<>> stat_ids;
  for (const StatisticSpec& s : statistics) {
    if (!IsIdentifier(s.id)) {
      errors.push_back(Error(ErrorKind::kMalformedDocument, s.id,
                             absl::StrCat("statistic id '", s.id,
                                          "' is not an identifier")));
    }
    if (!stat_ids.insert(s.id).second) {
      errors.push_back(Error(ErrorKind::kDuplicateId, s.id,
                             absl::StrCat("duplicate statistic id '", s.id,
                                          "'")));
    }
    if (!(s.sensitivity > 0.0) || !std::isfinite(s.sensitivity)) {
      errors.push_back(Error(ErrorKind::kNonPositiveSensitivity, s.id,
                             absl::StrCat("sensitivity of '", s.id,
                                          "' must be positive, got ",
                                          s.sensitivity)));
    }
    if (!std::isfinite(s.reference_value)) {
      errors.push_back(Error(ErrorKind::kMalformedDocument, s.id,
                             absl::StrCat("reference_value of '", s.id,
                                          "' must be finite")));
    }
  }
  std::set<std::string, std::less<>> equation_ids;
  for (const EquationSpec& e : equations) {
    if (e.id.empty()) {
      errors.push_back(Error(ErrorKind::kMalformedDocument, e.id,
                             "equation id must be non-empty"));
    }
    if (!equation_ids.insert(e.id).second) {
      errors.push_back(Error(ErrorKind::kDuplicateId, e.id,
                             absl::StrCat("duplicate equation id '", e.id,
                                          "'")));
    }
    if (!(e.sensitivity > 0.0) || !std::isfinite(e.sensitivity)) {
      errors.push_back(Error(ErrorKind::kNonPositiveSensitivity, e.id,
                             absl::StrCat("sensitivity of equation '", e.id,
                                          "' must be positive, got ",
                                          e.sensitivity)));
    }
    for (const std::string& ref : FreeStatistics(e.expression)) {
      if (!stat_ids.contains(ref)) {
        errors.push_back(Error(ErrorKind::kUnknownStatisticRef, ref,
                               absl::StrCat("equation '", e.id,
                                            "' references unknown statistic '",
                                            ref, "'")));
      }
    }
  }
  if (options.mc_samples <= 0) {
    errors.push_back(Error(ErrorKind::kInvalidOptions, "mc_samples",
                           "mc_samples must be positive"));
  }
  const double max_fraction =
      statistics.empty() ? 1.0 : 1.0 / static_cast<double>(statistics.size());
  if (!(options.min_budget_fraction > 0.0) ||
      !(options.min_budget_fraction < max_fraction)) {
    errors.push_back(Error(
        ErrorKind::kInvalidOptions, "min_budget_fraction",
        absl::StrCat("min_budget_fraction must lie in (0, 1/nsta) = (0, ",
                     max_fraction, "), got ", options.min_budget_fraction)));
  }
  if (!errors.empty()) return errors;

  Workload workload;
  workload.epsilon_ = epsilon;
  workload.statistics_ = std::move(statistics);
  workload.equations_ = std::move(equations);
  workload.options_ = options;
  return workload;
}

std::optional<std::size_t> Workload::StatisticIndex(absl::string_view id) const {
  for (std::size_t i = 0; i < statistics_.size(); ++i) {
    if (statistics_[i].id == id) return i;
  }
  return std::nullopt;
}

const StatisticSpec* Workload::FindStatistic(absl::string_view id) const {
  std::optional<std::size_t> index = StatisticIndex(id);
  return index.has_value() ? &statistics_[*index] : nullptr;
}

ValueMap Workload::ReferenceValues() const {
  ValueMap values;
  for (const StatisticSpec& s : statistics_) values[s.id] = s.reference_value;
  return values;
}

Validated<Workload> Workload::WithOptions(MetricOptions options) const {
  return Create(epsilon_, statistics_, equations_, options);
}

Validated<Workload> Workload::WithEpsilon(double epsilon) const {
  return Create(epsilon, statistics_, equations_, options_);
}

Validated<Workload> LoadWorkload(absl::string_view document) {
  const Json root = Json::parse(document, /*cb=*/nullptr,
                                /*allow_exceptions=*/false);
  if (root.is_discarded()) {
    return ValidationErrors{Error(ErrorKind::kMalformedDocument, "",
                                  "workload is not valid JSON")};
  }
  if (!root.is_object()) {
    return ValidationErrors{Error(ErrorKind::kMalformedDocument, "",
                                  "workload must be a JSON object")};
  }
  ValidationErrors errors;
  RejectUnknownKeys(root, {"epsilon", "options", "statistics", "equations"},
                    "workload", &errors);

  const std::optional<double> epsilon =
      GetNumber(root, "epsilon", "workload", true, &errors);

  MetricOptions options;
  if (auto it = root.find("options"); it != root.end()) {
    options = ParseOptions(*it, &errors);
  }

  std::vector<StatisticSpec> statistics;
  bool statistics_shape_error = true;
  if (auto it = root.find("statistics"); it == root.end()) {
    errors.push_back(Error(ErrorKind::kMalformedDocument, "statistics",
                           "missing 'statistics'"));
  } else if (!it->is_array()) {
    errors.push_back(Error(ErrorKind::kMalformedDocument, "statistics",
                           "'statistics' must be an array"));
  } else {
    statistics_shape_error = false;
    for (const Json& entry : *it) {
      if (!entry.is_object()) {
        errors.push_back(Error(ErrorKind::kMalformedDocument, "statistics",
                               "statistic entries must be objects"));
        continue;
      }
      RejectUnknownKeys(entry, {"id", "label", "sensitivity",
                                "reference_value"},
                        "statistic", &errors);
      std::optional<std::string> id =
          GetString(entry, "id", "statistic", true, &errors);
      std::optional<std::string> label =
          GetString(entry, "label", "statistic", false, &errors);
      std::optional<double> sensitivity =
          GetNumber(entry, "sensitivity", "statistic", true, &errors);
      std::optional<double> reference =
          GetNumber(entry, "reference_value", "statistic", true, &errors);
      if (id && sensitivity && reference) {
        statistics.push_back(StatisticSpec{*id, label.value_or(""),
                                           *sensitivity, *reference});
      }
    }
  }

  std::vector<EquationSpec> equations;
  if (auto it = root.find("equations"); it != root.end()) {
    if (!it->is_array()) {
      errors.push_back(Error(ErrorKind::kMalformedDocument, "equations",
                             "'equations' must be an array"));
    } else {
      for (const Json& entry : *it) {
        if (!entry.is_object()) {
          errors.push_back(Error(ErrorKind::kMalformedDocument, "equations",
                                 "equation entries must be objects"));
          continue;
        }
        RejectUnknownKeys(entry, {"id", "expression", "sensitivity"},
                          "equation", &errors);
        std::optional<std::string> id =
            GetString(entry, "id", "equation", true, &errors);
        std::optional<std::string> text =
            GetString(entry, "expression", "equation", true, &errors);
        std::optional<double> sensitivity =
            GetNumber(entry, "sensitivity", "equation", true, &errors);
        if (!id || !text || !sensitivity) continue;
        ParseError parse_error;
        absl::StatusOr<Expression> expr = ParseExpression(*text, &parse_error);
        if (!expr.ok()) {
          errors.push_back(Error(ErrorKind::kExpressionSyntax, *id,
                                 absl::StrCat("equation '", *id, "': ",
                                              parse_error.ToString())));
          continue;
        }
        equations.push_back(EquationSpec{*id, *std::move(expr), *sensitivity});
      }
    }
  }

  // Semantic checks still run on whatever parsed so one pass reports all.
  Validated<Workload> workload =
      Workload::Create(epsilon.value_or(1.0), std::move(statistics),
                       std::move(equations), options);
  if (!workload.ok()) {
    for (const ValidationError& e : workload.errors()) {
      // A missing statistics array was already reported.
      if (statistics_shape_error && e.kind == ErrorKind::kMalformedDocument &&
          e.subject.empty()) {
        continue;
      }
      errors.push_back(e);
    }
  }
  if (!errors.empty()) return errors;
  return workload;
}

std::string WorkloadToJson(const Workload& workload) {
  OrderedJson root;
  root["epsilon"] = workload.epsilon();
  root["options"] = OptionsToJson(workload.options());
  root["statistics"] = OrderedJson::array();
  for (const StatisticSpec& s : workload.statistics()) {
    OrderedJson entry;
    entry["id"] = s.id;
    entry["label"] = s.label;
    entry["sensitivity"] = s.sensitivity;
    entry["reference_value"] = s.reference_value;
    root["statistics"].push_back(std::move(entry));
  }
  root["equations"] = OrderedJson::array();
  for (const EquationSpec& e : workload.equations()) {
    OrderedJson entry;
    entry["id"] = e.id;
    entry["expression"] = FormatExpression(e.expression);
    entry["sensitivity"] = e.sensitivity;
    root["equations"].push_back(std::move(entry));
  }
  return root.dump(2) + "\n";
}

double BudgetAllocation::budget(absl::string_view id) const {
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (ids_[i] == id) return budgets_[i];
  }
  return 0.0;
}

ValueMap BudgetAllocation::ToMap() const {
  ValueMap out;
  for (std::size_t i = 0; i < ids_.size(); ++i) out[ids_[i]] = budgets_[i];
  return out;
}

bool BudgetAllocation::MatchesWorkload(const Workload& workload) const {
  if (ids_.size() != workload.num_statistics()) return false;
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (ids_[i] != workload.statistics()[i].id) return false;
  }
  return true;
}

Validated<BudgetAllocation> ValidateAllocation(const Workload& workload,
                                               const ValueMap& budgets) {
  ValidationErrors errors;
  BudgetAllocation allocation;
  double sum = 0.0;
  for (const StatisticSpec& s : workload.statistics()) {
    auto it = budgets.find(s.id);
    if (it == budgets.end()) {
      errors.push_back(Error(ErrorKind::kMissingBudget, s.id,
                             absl::StrCat("no budget for statistic '", s.id,
                                          "'")));
      continue;
    }
    if (!(it->second > 0.0)) {
      errors.push_back(Error(ErrorKind::kNonPositiveBudget, s.id,
                             absl::StrCat("budget of '", s.id,
                                          "' must be > 0, got ", it->second)));
    }
    allocation.ids_.push_back(s.id);
    allocation.budgets_.push_back(it->second);
  }
  for (const auto& [id, value] : budgets) {
    if (!workload.StatisticIndex(id).has_value()) {
      errors.push_back(Error(ErrorKind::kUnknownBudgetId, id,
                             absl::StrCat("budget given for unknown statistic '",
                                          id, "'")));
    }
    sum += value;
  }
  const double epsilon = workload.epsilon();
  if (!(std::abs(sum - epsilon) <= kBudgetSumRelativeTolerance * epsilon)) {
    errors.push_back(Error(ErrorKind::kBudgetSumMismatch, "",
                           absl::StrCat("budgets sum to ", sum,
                                        " but epsilon is ", epsilon)));
  }
  if (!errors.empty()) return errors;
  return allocation;
}

Validated<BudgetAllocation> ValidateAllocation(
    const Workload& workload, std::span<const double> ordered_budgets) {
  if (ordered_budgets.size() != workload.num_statistics()) {
    return ValidationErrors{
        Error(ErrorKind::kMalformedDocument, "",
              absl::StrCat("expected ", workload.num_statistics(),
                           " budgets, got ", ordered_budgets.size()))};
  }
  ValueMap budgets;
  for (std::size_t i = 0; i < ordered_budgets.size(); ++i) {
    budgets[workload.statistics()[i].id] = ordered_budgets[i];
  }
  return ValidateAllocation(workload, budgets);
}

Validated<ValueMap> LoadAllocation(absl::string_view document) {
  const Json root = Json::parse(document, /*cb=*/nullptr,
                                /*allow_exceptions=*/false);
  if (root.is_discarded() || !root.is_object()) {
    return ValidationErrors{Error(ErrorKind::kMalformedDocument, "",
                                  "allocation must be a JSON object")};
  }
  ValidationErrors errors;
  RejectUnknownKeys(root, {"budgets"}, "allocation", &errors);
  ValueMap budgets;
  auto it = root.find("budgets");
  if (it == root.end() || !it->is_object()) {
    errors.push_back(Error(ErrorKind::kMalformedDocument, "budgets",
                           "'budgets' must be an object of numbers"));
  } else {
    for (const auto& [id, value] : it->items()) {
      if (!value.is_number()) {
        errors.push_back(Error(ErrorKind::kMalformedDocument, id,
                               absl::StrCat("budget of '", id,
                                            "' must be a number")));
        continue;
      }
      budgets[id] = value.get<double>();
    }
  }
  if (!errors.empty()) return errors;
  return budgets;
}

std::string AllocationToJson(const BudgetAllocation& allocation) {
  OrderedJson root;
  root["budgets"] = OrderedJson::object();
  for (std::size_t i = 0; i < allocation.size(); ++i) {
    root["budgets"][allocation.ids()[i]] = allocation.budgets()[i];
  }
  return root.dump(2) + "\n";
}

absl::Status CheckAllocationMatches(const Workload& workload,
                                    const BudgetAllocation& allocation) {
  if (allocation.MatchesWorkload(workload)) return absl::OkStatus();
  return MakeError(ErrorKind::kInvalidArgument,
                   "allocation was not validated against this workload");
}

absl::StatusOr<std::vector<Tuple>> Consolidate(
    const Workload& workload, const BudgetAllocation& allocation,
    const ValueMap& values) {
  if (absl::Status s = CheckAllocationMatches(workload, allocation); !s.ok()) {
    return s;
  }
  std::vector<Tuple> tuples;
  tuples.reserve(workload.num_statistics());
  for (std::size_t i = 0; i < workload.num_statistics(); ++i) {
    const StatisticSpec& s = workload.statistics()[i];
    auto it = values.find(s.id);
    if (it == values.end()) {
      return MakeError(ErrorKind::kMissingValue,
                       absl::StrCat("no value for statistic '", s.id, "'"));
    }
    tuples.push_back(Tuple{it->second, s.sensitivity, allocation.budgets()[i]});
  }
  return tuples;
}

}  // namespace dpbudget
