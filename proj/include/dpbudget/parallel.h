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

#ifndef DPBUDGET_PARALLEL_H_
#define DPBUDGET_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace dpbudget {

// Hardware concurrency, at least 1.
int DefaultThreadCount();

// Calls fn(begin, end) on contiguous chunks covering [0, n), using at most
// `threads` workers. Callers write results by index so the outcome does not
// depend on the partition.
void ParallelFor(std::size_t n, int threads,
                 const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace dpbudget

#endif  // DPBUDGET_PARALLEL_H_
