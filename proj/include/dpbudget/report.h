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

// Machine-readable renderings of reports. JSON keys and CSV column orders are
// stable; the text format is for people.
//
// JSON shapes:
//   utility:      {"metric", "us_terms": {id: x}, "ue_terms": {id: x},
//                  "options": {...}}
//   ranking:      [{"name", "rank", <utility keys>}, ...]
//   optimization: {"method", "metric", "iterations", "converged",
//                  "budgets": {id: x}}
//   simulation:   {"trials", "seed", "reliable",
//                  "per_statistic": {id: {"empirical_rmse", "bias",
//                                         "predicted_rmse"}},
//                  "per_equation": {id: {"empirical_rmse", "trimmed_rmse",
//                                        "bias", "predicted_rmse",
//                                        "excluded"}}}
//   validation:   {"valid", "errors": [{"kind", "subject", "message"}]}

#ifndef DPBUDGET_REPORT_H_
#define DPBUDGET_REPORT_H_

#include <optional>
#include <string>
#include "absl/strings/string_view.h"
#include <vector>

#include "dpbudget/allocator.h"
#include "dpbudget/metric.h"
#include "dpbudget/simulation.h"
#include "dpbudget/workload.h"

namespace dpbudget {

enum class OutputFormat { kJson, kCsv, kText };

std::optional<OutputFormat> ParseOutputFormat(absl::string_view name);

std::string RenderUtilityReport(const UtilityReport& report,
                                OutputFormat format);
std::string RenderRanking(const std::vector<RankedAllocation>& ranking,
                          OutputFormat format);
std::string RenderOptimization(const OptimizationResult& result,
                               OutputFormat format);
std::string RenderSimulation(const SimulationReport& report,
                             OutputFormat format);
std::string RenderValidation(const ValidationErrors& errors,
                             OutputFormat format);

// One row per trial: "trial,<column>,...". Excluded entries are empty.
std::string RenderTrialErrorsCsv(const TrialErrors& errors);

}  // namespace dpbudget

#endif  // DPBUDGET_REPORT_H_
