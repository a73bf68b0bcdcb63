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

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "textdiff/rng.hpp"
#include "textdiff/types.hpp"

namespace textdiff {

enum class TokenizeMode { kWhitespace, kCharacter };

// Token <-> id bijection with four reserved ids at the front.
class Vocabulary {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kBos = 1;
  static constexpr TokenId kEos = 2;
  static constexpr TokenId kUnk = 3;
  static constexpr TokenId kNumReserved = 4;

  Vocabulary();

  // Reserved ids plus `symbols` content tokens spelled "0", "1", ...
  static Vocabulary synthetic(int symbols);

  TokenId add(std::string_view token);
  TokenId id(std::string_view token) const;  // kUnk when absent
  bool contains(std::string_view token) const;
  const std::string& token(TokenId id) const;
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  TokenSeq encode(std::string_view text, TokenizeMode mode = TokenizeMode::kWhitespace) const;
  std::string decode(const TokenSeq& ids, TokenizeMode mode = TokenizeMode::kWhitespace) const;

  // One non-reserved token per line; line k holds id k + kNumReserved.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  static Vocabulary from_tokens(const std::vector<std::string>& tokens);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

std::vector<std::string> split_tokens(std::string_view text, TokenizeMode mode);

// V x H codebook with i.i.d. N(0, 1/H) entries.
Matrix init_codebook(int vocab_size, int dim, Rng& rng);

// Throws NumericError on non-finite entries or an all-zero row.
void validate_codebook(const Matrix& codebook);

// Row l is codebook[x_l].
LatentSeq embed(const TokenSeq& x, const Matrix& codebook);

// Per position, the id of the nearest codebook row (Euclidean); ties go to
// the lowest id.
TokenSeq round_to_tokens(const LatentSeq& z, const Matrix& codebook);

// L x V scores -||z_l - e_m||^2. Row-wise argmax equals round_to_tokens.
Matrix rounding_logits(const LatentSeq& z, const Matrix& codebook);

}  // namespace textdiff
