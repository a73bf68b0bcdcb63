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

#include "textdiff/types.hpp"

namespace textdiff {

struct BleuConfig {
  int max_order = 4;
  bool brevity_penalty = true;
};

// Sentence-level BLEU in [0, 1]: geometric mean of clipped n-gram precisions
// for orders 1..max_order times the brevity penalty exp(min(0, 1 - |ref|/|hyp|)).
// An order with zero matches contributes (0 + 1) / (candidates + 1) instead
// of zero. An empty hypothesis scores 0.
double sentence_bleu(const TokenSeq& hyp, const TokenSeq& ref, const BleuConfig& cfg = {});

}  // namespace textdiff
