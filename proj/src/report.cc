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

#include "dpbudget/report.h"

#include <cmath>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_replace.h"
#include "json.hpp"

namespace dpbudget {
namespace {

using OrderedJson = nlohmann::ordered_json;

std::string Num(double value) { return absl::StrFormat("%.17g", value); }
std::string Short(double value) { return absl::StrFormat("%.6g", value); }

std::string CsvField(absl::string_view field) {
  if (field.find_first_of(",\"\n") == absl::string_view::npos) {
    return std::string(field);
  }
  return absl::StrCat("\"", absl::StrReplaceAll(field, {{"\"", "\"\""}}), "\"");
}

OrderedJson Terms(const std::vector<NamedValue>& terms) {
  OrderedJson out = OrderedJson::object();
  for (const NamedValue& t : terms) out[t.id] = t.value;
  return out;
}

OrderedJson UtilityJson(const UtilityReport& report) {
  OrderedJson out;
  out["metric"] = report.metric;
  out["us_terms"] = Terms(report.us_terms);
  out["ue_terms"] = Terms(report.ue_terms);
  OrderedJson options;
  options["normalize_by_sensitivity"] = report.options.normalize_by_sensitivity;
  options["estimator"] = std::string(EstimatorName(report.options.estimator));
  options["mc_samples"] = report.options.mc_samples;
  options["min_budget_fraction"] = report.options.min_budget_fraction;
  out["options"] = std::move(options);
  return out;
}

std::string Dump(const OrderedJson& json) { return json.dump(2) + "\n"; }

}  // namespace

std::optional<OutputFormat> ParseOutputFormat(absl::string_view name) {
  if (name == "json") return OutputFormat::kJson;
  if (name == "csv") return OutputFormat::kCsv;
  if (name == "text") return OutputFormat::kText;
  return std::nullopt;
}

std::string RenderUtilityReport(const UtilityReport& report,
                                OutputFormat format) {
  switch (format) {
    case OutputFormat::kJson:
      return Dump(UtilityJson(report));
    case OutputFormat::kCsv: {
      std::string out = "term,id,value\n";
      for (const NamedValue& t : report.us_terms) {
        absl::StrAppend(&out, "us,", CsvField(t.id), ",", Num(t.value), "\n");
      }
      for (const NamedValue& t : report.ue_terms) {
        absl::StrAppend(&out, "ue,", CsvField(t.id), ",", Num(t.value), "\n");
      }
      absl::StrAppend(&out, "metric,,", Num(report.metric), "\n");
      return out;
    }
    case OutputFormat::kText: {
      std::string out = absl::StrCat("metric ", Short(report.metric), " (",
                                     EstimatorName(report.options.estimator),
                                     report.options.normalize_by_sensitivity
                                         ? ", normalized"
                                         : ", unnormalized",
                                     ")\n");
      for (const NamedValue& t : report.us_terms) {
        absl::StrAppend(&out, "  us ", t.id, " = ", Short(t.value), "\n");
      }
      for (const NamedValue& t : report.ue_terms) {
        absl::StrAppend(&out, "  ue ", t.id, " = ", Short(t.value), "\n");
      }
      return out;
    }
  }
  return {};
}

std::string RenderRanking(const std::vector<RankedAllocation>& ranking,
                          OutputFormat format) {
  switch (format) {
    case OutputFormat::kJson: {
      OrderedJson out = OrderedJson::array();
      for (const RankedAllocation& r : ranking) {
        OrderedJson entry;
        entry["name"] = r.name;
        entry["rank"] = r.rank;
        const OrderedJson utility = UtilityJson(r.report);
        for (const auto& [key, value] : utility.items()) entry[key] = value;
        out.push_back(std::move(entry));
      }
      return Dump(out);
    }
    case OutputFormat::kCsv: {
      std::string out = "rank,name,metric\n";
      for (const RankedAllocation& r : ranking) {
        absl::StrAppend(&out, r.rank, ",", CsvField(r.name), ",",
                        Num(r.report.metric), "\n");
      }
      return out;
    }
    case OutputFormat::kText: {
      std::string out;
      for (const RankedAllocation& r : ranking) {
        absl::StrAppend(&out, r.rank, ". ", r.name, "  metric ",
                        Short(r.report.metric), "\n");
      }
      return out;
    }
  }
  return {};
}

std::string RenderOptimization(const OptimizationResult& result,
                               OutputFormat format) {
  const BudgetAllocation& a = result.allocation;
  switch (format) {
    case OutputFormat::kJson: {
      OrderedJson out;
      out["method"] = std::string(AllocationMethodName(result.method));
      out["metric"] = result.metric;
      out["iterations"] = result.iterations;
      out["converged"] = result.converged;
      OrderedJson budgets = OrderedJson::object();
      for (std::size_t i = 0; i < a.size(); ++i) {
        budgets[a.ids()[i]] = a.budgets()[i];
      }
      out["budgets"] = std::move(budgets);
      return Dump(out);
    }
    case OutputFormat::kCsv: {
      std::string out = "id,budget\n";
      for (std::size_t i = 0; i < a.size(); ++i) {
        absl::StrAppend(&out, CsvField(a.ids()[i]), ",", Num(a.budgets()[i]),
                        "\n");
      }
      return out;
    }
    case OutputFormat::kText: {
      std::string out = absl::StrCat(
          AllocationMethodName(result.method), ": metric ",
          Short(result.metric), " after ", result.iterations, " iterations",
          result.converged ? "" : " (not converged)", "\n");
      for (std::size_t i = 0; i < a.size(); ++i) {
        absl::StrAppend(&out, "  ", a.ids()[i], " = ", Short(a.budgets()[i]),
                        "\n");
      }
      return out;
    }
  }
  return {};
}

std::string RenderSimulation(const SimulationReport& report,
                             OutputFormat format) {
  switch (format) {
    case OutputFormat::kJson: {
      OrderedJson out;
      out["trials"] = report.trials;
      out["seed"] = report.seed;
      out["reliable"] = report.reliable;
      OrderedJson stats = OrderedJson::object();
      for (const StatisticSimulation& s : report.per_statistic) {
        OrderedJson entry;
        entry["empirical_rmse"] = s.empirical_rmse;
        entry["bias"] = s.bias;
        entry["predicted_rmse"] = s.predicted_rmse;
        stats[s.id] = std::move(entry);
      }
      out["per_statistic"] = std::move(stats);
      OrderedJson eqs = OrderedJson::object();
      for (const EquationSimulation& e : report.per_equation) {
        OrderedJson entry;
        entry["empirical_rmse"] = e.empirical_rmse;
        entry["trimmed_rmse"] = e.trimmed_rmse;
        entry["bias"] = e.bias;
        entry["predicted_rmse"] = e.predicted_rmse;
        entry["excluded"] = e.excluded;
        eqs[e.id] = std::move(entry);
      }
      out["per_equation"] = std::move(eqs);
      return Dump(out);
    }
    case OutputFormat::kCsv: {
      std::string out =
          "kind,id,empirical_rmse,trimmed_rmse,bias,predicted_rmse,excluded\n";
      for (const StatisticSimulation& s : report.per_statistic) {
        absl::StrAppend(&out, "statistic,", CsvField(s.id), ",",
                        Num(s.empirical_rmse), ",,", Num(s.bias), ",",
                        Num(s.predicted_rmse), ",0\n");
      }
      for (const EquationSimulation& e : report.per_equation) {
        absl::StrAppend(&out, "equation,", CsvField(e.id), ",",
                        Num(e.empirical_rmse), ",", Num(e.trimmed_rmse), ",",
                        Num(e.bias), ",", Num(e.predicted_rmse), ",",
                        e.excluded, "\n");
      }
      return out;
    }
    case OutputFormat::kText: {
      std::string out =
          absl::StrCat(report.trials, " trials, seed ", report.seed,
                       report.reliable ? "" : " (too few trials: unreliable)",
                       "\n");
      for (const StatisticSimulation& s : report.per_statistic) {
        absl::StrAppend(&out, "  statistic ", s.id, ": rmse ",
                        Short(s.empirical_rmse), " predicted ",
                        Short(s.predicted_rmse), "\n");
      }
      for (const EquationSimulation& e : report.per_equation) {
        absl::StrAppend(&out, "  equation ", e.id, ": rmse ",
                        Short(e.empirical_rmse), " trimmed ",
                        Short(e.trimmed_rmse), " predicted ",
                        Short(e.predicted_rmse), "\n");
      }
      return out;
    }
  }
  return {};
}

std::string RenderValidation(const ValidationErrors& errors,
                             OutputFormat format) {
  switch (format) {
    case OutputFormat::kJson: {
      OrderedJson out;
      out["valid"] = errors.empty();
      out["errors"] = OrderedJson::array();
      for (const ValidationError& e : errors) {
        OrderedJson entry;
        entry["kind"] = std::string(ErrorKindName(e.kind));
        entry["subject"] = e.subject;
        entry["message"] = e.message;
        out["errors"].push_back(std::move(entry));
      }
      return Dump(out);
    }
    case OutputFormat::kCsv: {
      std::string out = "kind,subject,message\n";
      for (const ValidationError& e : errors) {
        absl::StrAppend(&out, ErrorKindName(e.kind), ",", CsvField(e.subject),
                        ",", CsvField(e.message), "\n");
      }
      return out;
    }
    case OutputFormat::kText: {
      if (errors.empty()) return "ok\n";
      std::string out;
      for (const ValidationError& e : errors) {
        absl::StrAppend(&out, e.ToString(), "\n");
      }
      return out;
    }
  }
  return {};
}

std::string RenderTrialErrorsCsv(const TrialErrors& errors) {
  std::string out = "trial";
  for (const std::string& c : errors.columns) {
    absl::StrAppend(&out, ",", CsvField(c));
  }
  out.push_back('\n');
  const std::size_t width = errors.columns.size();
  const std::size_t rows = width == 0 ? 0 : errors.values.size() / width;
  for (std::size_t t = 0; t < rows; ++t) {
    absl::StrAppend(&out, t);
    for (std::size_t c = 0; c < width; ++c) {
      const double v = errors.at(t, c);
      absl::StrAppend(&out, ",", std::isnan(v) ? "" : Num(v));
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace dpbudget
