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

#include "textdiff/data_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "textdiff/errors.hpp"
#include "textdiff/rng.hpp"

namespace textdiff {

namespace {

constexpr std::string_view kMagic = "TEXTDIFF-CKPT\n";

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string_view to_string(SynthKind kind) {
  switch (kind) {
    case SynthKind::kCopy:
      return "copy";
    case SynthKind::kReverse:
      return "reverse";
    case SynthKind::kSort:
      return "sort";
    case SynthKind::kAddMod:
      return "add-mod";
  }
  return "?";
}

SynthKind synth_kind_from_string(std::string_view name) {
  if (name == "copy") return SynthKind::kCopy;
  if (name == "reverse") return SynthKind::kReverse;
  if (name == "sort") return SynthKind::kSort;
  if (name == "add-mod") return SynthKind::kAddMod;
  throw ConfigError("unknown synthetic task '" + std::string(name) + "'");
}

void SynthTaskSpec::validate() const {
  if (vocab_size <= Vocabulary::kNumReserved + 1) throw ConfigError("synth: vocab_size must exceed 5");
  if (min_len < 1 || max_len < min_len) throw ConfigError("synth: invalid length range");
  if (count < 0) throw ConfigError("synth: count must be >= 0");
}

TokenSeq apply_synth_rule(SynthKind kind, const TokenSeq& source, int vocab_size) {
  switch (kind) {
    case SynthKind::kCopy:
      return source;
    case SynthKind::kReverse:
      return TokenSeq(source.rbegin(), source.rend());
    case SynthKind::kSort: {
      TokenSeq t = source;
      std::sort(t.begin(), t.end());
      return t;
    }
    case SynthKind::kAddMod: {
      if (source.size() % 2 != 0) throw DomainError("add-mod source must interleave operand pairs");
      const int base = vocab_size - Vocabulary::kNumReserved;
      TokenSeq t;
      for (std::size_t i = 0; i < source.size(); i += 2) {
        const int a = source[i] - Vocabulary::kNumReserved;
        const int b = source[i + 1] - Vocabulary::kNumReserved;
        t.push_back(static_cast<TokenId>((a + b) % base + Vocabulary::kNumReserved));
      }
      return t;
    }
  }
  return {};
}

Dataset generate_synth(const SynthTaskSpec& spec) {
  spec.validate();
  Rng rng(hash_combine(spec.seed, hash_name(to_string(spec.kind))));
  std::uniform_int_distribution<int> len_dist(spec.min_len, spec.max_len);
  std::uniform_int_distribution<TokenId> tok_dist(Vocabulary::kNumReserved, spec.vocab_size - 1);
  Dataset out;
  out.reserve(static_cast<std::size_t>(spec.count));
  for (int i = 0; i < spec.count; ++i) {
    const int len = len_dist(rng);
    const int src_len = spec.kind == SynthKind::kAddMod ? 2 * len : len;
    TokenSeq src(static_cast<std::size_t>(src_len));
    for (auto& tok : src) tok = tok_dist(rng);
    TokenSeq tgt = apply_synth_rule(spec.kind, src, spec.vocab_size);
    out.push_back({std::move(src), std::move(tgt)});
  }
  return out;
}

Vocabulary synth_vocabulary(const SynthTaskSpec& spec) {
  return Vocabulary::synthetic(spec.vocab_size - Vocabulary::kNumReserved);
}

DatasetSplits split_dataset(const Dataset& data) {
  DatasetSplits s;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto bucket = mix64(0x73706c6974ULL ^ static_cast<std::uint64_t>(i)) % 100;
    if (bucket < 90)
      s.train.push_back(data[i]);
    else if (bucket < 95)
      s.valid.push_back(data[i]);
    else
      s.test.push_back(data[i]);
  }
  return s;
}

ParallelCorpus load_parallel_tsv(const std::filesystem::path& path, const TsvOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus " + path.string());
  std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
      throw IoError(path.string() + ":" + std::to_string(lineno) +
                    ": expected exactly one tab separating source and target");
    auto src = split_tokens(std::string_view(line).substr(0, tab), opts.mode);
    auto tgt = split_tokens(std::string_view(line).substr(tab + 1), opts.mode);
    if (src.empty() || tgt.empty())
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": empty source or target");
    rows.emplace_back(std::move(src), std::move(tgt));
  }
  if (rows.empty()) throw IoError("corpus " + path.string() + " is empty");

  ParallelCorpus corpus;
  if (opts.vocab) {
    corpus.vocab = *opts.vocab;
  } else {
    std::map<std::string, int> freq;
    std::vector<std::string> order;
    for (const auto& [src, tgt] : rows)
      for (const auto* side : {&src, &tgt})
        for (const auto& tok : *side)
          if (freq[tok]++ == 0) order.push_back(tok);
    for (const auto& tok : order)
      if (freq[tok] >= opts.min_freq) corpus.vocab.add(tok);
  }
  for (const auto& [src, tgt] : rows) {
    ParallelExample ex;
    for (const auto& tok : src) ex.source.push_back(corpus.vocab.id(tok));
    for (const auto& tok : tgt) ex.target.push_back(corpus.vocab.id(tok));
    corpus.examples.push_back(std::move(ex));
  }
  return corpus;
}

const Matrix& Checkpoint::array(std::string_view name) const {
  for (const auto& a : arrays)
    if (a.name == name) return a.value;
  throw IoError("checkpoint has no array '" + std::string(name) + "'");
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h) {
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  nlohmann::json header;
  header["format_version"] = ckpt.version;
  header["dtype"] = "f64le";
  header["iteration"] = ckpt.iteration;
  header["seed"] = ckpt.seed;
  header["optimizer_step"] = ckpt.optimizer_step;
  header["config"] = ckpt.config;
  header["vocab"] = ckpt.vocab;
  header["arrays"] = nlohmann::json::array();
  for (const auto& a : ckpt.arrays)
    header["arrays"].push_back({{"name", a.name}, {"rows", a.value.rows()}, {"cols", a.value.cols()}});
  const std::string header_text = header.dump();

  std::string blob;
  blob += kMagic;
  blob += std::to_string(header_text.size());
  blob += '\n';
  blob += header_text;
  for (const auto& a : ckpt.arrays) {
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = a.value;
    blob.append(reinterpret_cast<const char*>(rm.data()), static_cast<std::size_t>(rm.size()) * 8);
  }
  const std::uint64_t sum = fnv1a64(blob);
  blob.append(reinterpret_cast<const char*>(&sum), sizeof(sum));

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint " + tmp.string());
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw IoError("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string blob = read_file(path);
  const std::string where = "checkpoint " + path.string();
  if (blob.size() < kMagic.size() + 8 || blob.compare(0, kMagic.size(), kMagic) != 0)
    throw IoError(where + ": not a textdiff checkpoint");
  std::uint64_t stored = 0;
  std::memcpy(&stored, blob.data() + blob.size() - 8, 8);
  if (fnv1a64(std::string_view(blob).substr(0, blob.size() - 8)) != stored)
    throw ChecksumError(where + ": checksum mismatch (truncated or corrupted)");

  std::size_t pos = kMagic.size();
  const auto nl = blob.find('\n', pos);
  if (nl == std::string::npos) throw IoError(where + ": malformed header");
  const std::size_t header_len = std::stoull(blob.substr(pos, nl - pos));
  pos = nl + 1;
  const nlohmann::json header = nlohmann::json::parse(blob.substr(pos, header_len));
  pos += header_len;

  Checkpoint ckpt;
  ckpt.version = header.at("format_version").get<int>();
  if (ckpt.version != Checkpoint::kFormatVersion)
    throw IoError(where + ": unsupported format version " + std::to_string(ckpt.version));
  if (header.at("dtype") != "f64le") throw IoError(where + ": unsupported dtype");
  ckpt.iteration = header.at("iteration").get<std::int64_t>();
  ckpt.seed = header.at("seed").get<std::uint64_t>();
  ckpt.optimizer_step = header.at("optimizer_step").get<std::int64_t>();
  ckpt.config = header.at("config");
  ckpt.vocab = header.at("vocab").get<std::vector<std::string>>();
  const std::size_t payload_end = blob.size() - 8;
  for (const auto& a : header.at("arrays")) {
    const auto rows = a.at("rows").get<Eigen::Index>();
    const auto cols = a.at("cols").get<Eigen::Index>();
    const std::size_t bytes = static_cast<std::size_t>(rows * cols) * 8;
    if (pos + bytes > payload_end) throw IoError(where + ": array data truncated");
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, cols);
    std::memcpy(rm.data(), blob.data() + pos, bytes);
    pos += bytes;
    ckpt.arrays.push_back({a.at("name").get<std::string>(), Matrix(rm)});
  }
  if (pos != payload_end) throw IoError(where + ": trailing bytes after arrays");
  return ckpt;
}

}  // namespace textdiff
