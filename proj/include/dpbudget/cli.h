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

#ifndef DPBUDGET_CLI_H_
#define DPBUDGET_CLI_H_

#include <ostream>

namespace dpbudget {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidationFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitComputation = 3;

// Entry point for the dpbudget tool. Reports go to `out`, diagnostics to
// `err`.
//
//   dpbudget validate --workload W [--allocation A]
//   dpbudget score    --workload W --allocation A
//   dpbudget compare  --workload W A1 A2 [...]   (or repeated --allocation)
//   dpbudget optimize --workload W [--method sqrt|grid|descent] [--out A]
//   dpbudget simulate --workload W --allocation A --seed S [--trials N]
int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace dpbudget

#endif  // DPBUDGET_CLI_H_
