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

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "textdiff/types.hpp"
#include "textdiff/vocab_embed.hpp"

namespace textdiff {

struct ParallelExample {
  TokenSeq source;
  TokenSeq target;
};

using Dataset = std::vector<ParallelExample>;

enum class SynthKind { kCopy, kReverse, kSort, kAddMod };

std::string_view to_string(SynthKind kind);
SynthKind synth_kind_from_string(std::string_view name);

// Desk-scale seq2seq tasks over content ids [4, vocab_size).
//   copy:    target = source
//   reverse: target = reversed source
//   sort:    target = source sorted ascending by id
//   add-mod: source = a1 b1 a2 b2 ..., target_l = (a_l + b_l) mod (vocab_size - 4)
// Lengths are drawn uniformly from [min_len, max_len] (target length for add-mod).
struct SynthTaskSpec {
  SynthKind kind = SynthKind::kCopy;
  int vocab_size = 16;
  int min_len = 1;
  int max_len = 12;
  int count = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

Dataset generate_synth(const SynthTaskSpec& spec);
TokenSeq apply_synth_rule(SynthKind kind, const TokenSeq& source, int vocab_size);
Vocabulary synth_vocabulary(const SynthTaskSpec& spec);

struct DatasetSplits {
  Dataset train;
  Dataset valid;
  Dataset test;
};

// Deterministic 90/5/5 split keyed on a hash of each example's index.
DatasetSplits split_dataset(const Dataset& data);

struct TsvOptions {
  int min_freq = 1;
  TokenizeMode mode = TokenizeMode::kWhitespace;
  // When set, tokens are mapped through this vocabulary instead of building
  // one from the file.
  const Vocabulary* vocab = nullptr;
};

struct ParallelCorpus {
  Dataset examples;
  Vocabulary vocab;
};

// "source<TAB>target" per line, UTF-8, whitespace tokenized. Tokens seen
// fewer than min_freq times map to <unk>.
ParallelCorpus load_parallel_tsv(const std::filesystem::path& path, const TsvOptions& opts = {});

struct NamedArray {
  std::string name;
  Matrix value;
};

// Full persisted training state. Arrays are stored as little-endian float64
// in row-major order.
struct Checkpoint {
  static constexpr int kFormatVersion = 1;

  int version = kFormatVersion;
  nlohmann::json config;  // run configuration snapshot
  std::vector<std::string> vocab;
  std::int64_t iteration = 0;
  std::uint64_t seed = 0;
  std::int64_t optimizer_step = 0;
  std::vector<NamedArray> arrays;

  const Matrix& array(std::string_view name) const;
};

// Layout: "TEXTDIFF-CKPT\n", header byte count and newline, JSON header,
// raw arrays, then an 8-byte FNV-1a checksum of everything before it.
// Written to a temporary file and renamed into place.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

}  // namespace textdiff
