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

#include "textdiff/vocab_embed.hpp"

#include <cctype>
#include <cmath>
#include <fstream>

#include "textdiff/errors.hpp"

namespace textdiff {

namespace {

constexpr const char* kReservedTokens[] = {"<pad>", "<bos>", "<eos>", "<unk>"};

void require_finite(const Matrix& z, const char* what) {
  if (!z.allFinite()) throw NumericError(std::string(what) + ": non-finite latent values");
}

std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xe) return 3;
  if ((lead >> 3) == 0x1e) return 4;
  return 1;
}

}  // namespace

Vocabulary::Vocabulary() {
  for (const char* t : kReservedTokens) add(t);
}

Vocabulary Vocabulary::synthetic(int symbols) {
  Vocabulary v;
  for (int k = 0; k < symbols; ++k) v.add(std::to_string(k));
  return v;
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
  Vocabulary v;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i < static_cast<std::size_t>(kNumReserved)) {
      if (tokens[i] != kReservedTokens[i]) throw ConfigError("vocabulary: reserved tokens out of place");
      continue;
    }
    if (v.contains(tokens[i])) throw ConfigError("vocabulary: duplicate token '" + tokens[i] + "'");
    v.add(tokens[i]);
  }
  return v;
}

TokenId Vocabulary::add(std::string_view token) {
  if (auto it = index_.find(std::string(token)); it != index_.end()) return it->second;
  const auto id = static_cast<TokenId>(tokens_.size());
  tokens_.emplace_back(token);
  index_.emplace(tokens_.back(), id);
  return id;
}

TokenId Vocabulary::id(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.contains(std::string(token));
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || id >= size()) throw RangeError("token id " + std::to_string(id) + " out of range");
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<std::string> split_tokens(std::string_view text, TokenizeMode mode) {
  std::vector<std::string> out;
  if (mode == TokenizeMode::kCharacter) {
    for (std::size_t i = 0; i < text.size();) {
      const std::size_t n = std::min(utf8_length(static_cast<unsigned char>(text[i])), text.size() - i);
      if (!(n == 1 && std::isspace(static_cast<unsigned char>(text[i]))))
        out.emplace_back(text.substr(i, n));
      i += n;
    }
    return out;
  }
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

TokenSeq Vocabulary::encode(std::string_view text, TokenizeMode mode) const {
  TokenSeq ids;
  for (const auto& tok : split_tokens(text, mode)) ids.push_back(id(tok));
  return ids;
}

std::string Vocabulary::decode(const TokenSeq& ids, TokenizeMode mode) const {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0 && mode == TokenizeMode::kWhitespace) out += ' ';
    out += token(ids[i]);
  }
  return out;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write vocabulary file " + path.string());
  for (std::size_t i = kNumReserved; i < tokens_.size(); ++i) out << tokens_[i] << '\n';
  if (!out) throw IoError("failed writing vocabulary file " + path.string());
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read vocabulary file " + path.string());
  Vocabulary v;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || v.contains(line))
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": empty or duplicate token");
    v.add(line);
  }
  return v;
}

Matrix init_codebook(int vocab_size, int dim, Rng& rng) {
  if (vocab_size <= 0 || dim <= 0) throw ConfigError("codebook dimensions must be positive");
  Matrix e = gaussian_matrix(vocab_size, dim, rng) / std::sqrt(static_cast<double>(dim));
  validate_codebook(e);
  return e;
}

void validate_codebook(const Matrix& codebook) {
  if (!codebook.allFinite()) throw NumericError("codebook has non-finite entries");
  for (Eigen::Index m = 0; m < codebook.rows(); ++m)
    if ((codebook.row(m).array() == 0.0).all())
      throw NumericError("codebook row " + std::to_string(m) + " is all zero");
}

LatentSeq embed(const TokenSeq& x, const Matrix& codebook) {
  LatentSeq z(static_cast<Eigen::Index>(x.size()), codebook.cols());
  for (std::size_t l = 0; l < x.size(); ++l) {
    if (x[l] < 0 || x[l] >= codebook.rows())
      throw RangeError("token id " + std::to_string(x[l]) + " outside vocabulary of size " +
                       std::to_string(codebook.rows()));
    z.row(static_cast<Eigen::Index>(l)) = codebook.row(x[l]);
  }
  return z;
}

Matrix rounding_logits(const LatentSeq& z, const Matrix& codebook) {
  require_finite(z, "rounding_logits");
  if (z.cols() != codebook.cols()) throw ShapeError("rounding_logits: latent width differs from codebook");
  Matrix scores(z.rows(), codebook.rows());
  for (Eigen::Index l = 0; l < z.rows(); ++l)
    for (Eigen::Index m = 0; m < codebook.rows(); ++m)
      scores(l, m) = -(z.row(l) - codebook.row(m)).squaredNorm();
  return scores;
}

TokenSeq round_to_tokens(const LatentSeq& z, const Matrix& codebook) {
  const Matrix scores = rounding_logits(z, codebook);
  TokenSeq ids(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index l = 0; l < scores.rows(); ++l) {
    Eigen::Index best = 0;
    for (Eigen::Index m = 1; m < scores.cols(); ++m)
      if (scores(l, m) > scores(l, best)) best = m;
    ids[static_cast<std::size_t>(l)] = static_cast<TokenId>(best);
  }
  return ids;
}

}  // namespace textdiff
