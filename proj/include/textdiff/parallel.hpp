// Copyright 2026 The textdiff Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <functional>

namespace textdiff {

// Worker count: TEXTDIFF_THREADS if set, otherwise hardware concurrency.
std::size_t default_thread_count();

// Runs fn(i) for i in [0, n) on up to `threads` workers. Callers write
// results into per-index slots and reduce in index order afterwards, so the
// outcome is independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  std::size_t threads = default_thread_count());

}  // namespace textdiff
