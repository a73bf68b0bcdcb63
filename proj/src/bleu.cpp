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

#include "textdiff/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "textdiff/errors.hpp"

namespace textdiff {

namespace {

using NgramCounts = std::map<TokenSeq, int>;

NgramCounts count_ngrams(const TokenSeq& seq, std::size_t n) {
  NgramCounts counts;
  if (seq.size() < n) return counts;
  for (std::size_t i = 0; i + n <= seq.size(); ++i)
    ++counts[TokenSeq(seq.begin() + static_cast<std::ptrdiff_t>(i),
                      seq.begin() + static_cast<std::ptrdiff_t>(i + n))];
  return counts;
}

}  // namespace

double sentence_bleu(const TokenSeq& hyp, const TokenSeq& ref, const BleuConfig& cfg) {
  if (ref.empty()) throw DomainError("sentence_bleu: empty reference");
  if (cfg.max_order < 1) throw ConfigError("sentence_bleu: max_order must be >= 1");
  if (hyp.empty()) return 0.0;
  double log_sum = 0.0;
  for (int n = 1; n <= cfg.max_order; ++n) {
    const auto un = static_cast<std::size_t>(n);
    const NgramCounts h = count_ngrams(hyp, un);
    const NgramCounts r = count_ngrams(ref, un);
    int matches = 0;
    for (const auto& [gram, count] : h) {
      const auto it = r.find(gram);
      if (it != r.end()) matches += std::min(count, it->second);
    }
    const int total = hyp.size() >= un ? static_cast<int>(hyp.size() - un + 1) : 0;
    const double precision = matches > 0 ? static_cast<double>(matches) / total
                                         : 1.0 / (static_cast<double>(total) + 1.0);
    log_sum += std::log(precision);
  }
  double log_bleu = log_sum / cfg.max_order;
  if (cfg.brevity_penalty)
    log_bleu += std::min(0.0, 1.0 - static_cast<double>(ref.size()) / static_cast<double>(hyp.size()));
  return std::exp(log_bleu);
}

}  // namespace textdiff
