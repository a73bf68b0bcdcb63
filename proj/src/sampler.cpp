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

#include "textdiff/sampler.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "textdiff/diffusion.hpp"
#include "textdiff/errors.hpp"
#include "textdiff/rng.hpp"
#include "textdiff/vocab_embed.hpp"

namespace textdiff {

std::string_view to_string(ScMode mode) {
  switch (mode) {
    case ScMode::kNone:
      return "none";
    case ScMode::kReused:
      return "reused";
    case ScMode::kCorrected:
      return "corrected";
  }
  return "?";
}

ScMode sc_mode_from_string(std::string_view name) {
  if (name == "none") return ScMode::kNone;
  if (name == "reused") return ScMode::kReused;
  if (name == "corrected") return ScMode::kCorrected;
  throw ConfigError("unknown self-condition mode '" + std::string(name) + "'");
}

void GenerationConfig::validate() const {
  if (nfe < 1) throw ConfigError("generation: nfe must be >= 1");
  if (length_beam < 1 || noise_beam < 1) throw ConfigError("generation: beams must be >= 1");
  if (!(t_floor >= 0.0 && t_floor < 1.0)) throw ConfigError("generation: t_floor must lie in [0, 1)");
}

std::vector<double> time_grid(int nfe, double eps) {
  if (nfe < 1) throw DomainError("time_grid: nfe must be >= 1");
  std::vector<double> grid(static_cast<std::size_t>(nfe) + 1);
  for (int i = 0; i <= nfe; ++i)
    grid[static_cast<std::size_t>(i)] = 1.0 - (1.0 - eps) * static_cast<double>(i) / nfe;
  grid.back() = eps;
  return grid;
}

GenerationResult generate(const DenoiserModel& model, const EncodedSource& src, int length,
                          const GenerationConfig& gcfg, const NoiseSchedule& sched,
                          std::uint64_t seed) {
  gcfg.validate();
  if (length < 1 || length > model.max_length())
    throw RangeError("generate: length " + std::to_string(length) + " outside [1, " +
                     std::to_string(model.max_length()) + "]");
  const Eigen::Index width = model.codebook().cols();
  Rng rng(seed);
  GenerationResult res;
  LatentSeq z = gaussian_matrix(length, width, rng);
  LatentSeq previous;
  const auto grid = time_grid(gcfg.nfe, gcfg.t_floor);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double t = grid[i];
    const double s = grid[i + 1];
    const TimeVec tv = constant_times(length, t);
    LatentSeq cond;
    const LatentSeq* sc = nullptr;
    switch (gcfg.sc_mode) {
      case ScMode::kNone:
        break;
      case ScMode::kReused:
        if (previous.size() != 0) sc = &previous;
        break;
      case ScMode::kCorrected:
        cond = model.denoise(src, z, tv, nullptr);
        ++res.denoiser_calls;
        sc = &cond;
        break;
    }
    LatentSeq pred = model.denoise(src, z, tv, sc);
    ++res.denoiser_calls;
    const Matrix noise = gaussian_matrix(length, width, rng);
    LatentSeq next = reverse_step(z, pred, s, t, noise, sched);
    res.trajectory.steps.push_back({t, std::move(z), pred});
    previous = std::move(pred);
    z = std::move(next);
  }
  res.tokens = round_to_tokens(previous, model.codebook());
  return res;
}

std::vector<int> top_lengths(const RowVector& length_logits, int k) {
  std::vector<int> order(static_cast<std::size_t>(length_logits.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return length_logits(a) > length_logits(b); });
  order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(std::max(k, 0))));
  for (int& v : order) v += 1;
  return order;
}

std::uint64_t candidate_seed(std::uint64_t master, int length, int beam) {
  return hash_combine(hash_combine(master, static_cast<std::uint64_t>(length)),
                      static_cast<std::uint64_t>(beam));
}

std::size_t mbr_select(const std::vector<TokenSeq>& candidates, const BleuConfig& bleu) {
  if (candidates.empty()) throw DomainError("mbr_select: no candidates");
  const std::size_t n = candidates.size();
  if (n == 1) return 0;
  std::size_t best = 0;
  double best_score = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) sum += candidates[j].empty() ? 0.0 : sentence_bleu(candidates[i], candidates[j], bleu);
    const double score = sum / static_cast<double>(n - 1);
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return best;
}

MbrResult mbr_decode(const DenoiserModel& model, const TokenSeq& c, const GenerationConfig& gcfg,
                     const NoiseSchedule& sched) {
  gcfg.validate();
  const EncodedSource src = model.encode(c);
  MbrResult out;
  for (int length : top_lengths(model.length_logits(src), gcfg.length_beam)) {
    for (int beam = 0; beam < gcfg.noise_beam; ++beam) {
      const std::uint64_t seed = candidate_seed(gcfg.seed, length, beam);
      auto res = generate(model, src, length, gcfg, sched, seed);
      out.denoiser_calls += res.denoiser_calls;
      out.candidates.push_back({std::move(res.tokens), length, seed});
    }
  }
  std::vector<TokenSeq> seqs;
  seqs.reserve(out.candidates.size());
  for (const auto& cand : out.candidates) seqs.push_back(cand.tokens);
  out.index = mbr_select(seqs);
  out.best = out.candidates[out.index].tokens;
  return out;
}

}  // namespace textdiff
