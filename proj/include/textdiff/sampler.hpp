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
#include <string_view>
#include <vector>

#include "textdiff/bleu.hpp"
#include "textdiff/denoiser.hpp"
#include "textdiff/schedules.hpp"
#include "textdiff/types.hpp"

namespace textdiff {

// How the self-condition input is chosen at each reverse step.
//   none:      always zeros
//   reused:    the previous step's prediction (zeros at the first step)
//   corrected: a fresh zero-conditioned prediction at the current step,
//              which doubles the denoiser calls
enum class ScMode { kNone, kReused, kCorrected };

std::string_view to_string(ScMode mode);
ScMode sc_mode_from_string(std::string_view name);

struct GenerationConfig {
  int nfe = 5;
  ScMode sc_mode = ScMode::kReused;
  int length_beam = 1;
  int noise_beam = 1;
  std::uint64_t seed = 0;
  double t_floor = 1e-3;

  void validate() const;
};

// nfe + 1 uniformly spaced times from 1 down to eps inclusive.
std::vector<double> time_grid(int nfe, double eps);

struct TrajectoryStep {
  double t;
  LatentSeq z;           // state entering the step
  LatentSeq prediction;  // z0 estimate at t
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;  // times strictly decreasing
};

struct GenerationResult {
  TokenSeq tokens;
  Trajectory trajectory;
  int denoiser_calls = 0;
};

// Reverse process from z ~ N(0, I) at t = 1; the output rounds the final
// z0 prediction (not the last sampled state).
GenerationResult generate(const DenoiserModel& model, const EncodedSource& src, int length,
                          const GenerationConfig& gcfg, const NoiseSchedule& sched,
                          std::uint64_t seed);

struct Candidate {
  TokenSeq tokens;
  int length = 0;
  std::uint64_t seed = 0;
};
using CandidateSet = std::vector<Candidate>;

// The k highest-scoring lengths (1-based), ties broken toward shorter lengths.
std::vector<int> top_lengths(const RowVector& length_logits, int k);

// Seed of noise beam `beam` for candidate length `length`.
std::uint64_t candidate_seed(std::uint64_t master, int length, int beam);

struct MbrResult {
  TokenSeq best;
  std::size_t index = 0;
  CandidateSet candidates;
  int denoiser_calls = 0;
};

// Index of the candidate with the highest mean sentence-BLEU against all
// other candidates; ties go to the earliest.
std::size_t mbr_select(const std::vector<TokenSeq>& candidates, const BleuConfig& bleu = {});

// length_beam x noise_beam candidates, then MBR selection.
MbrResult mbr_decode(const DenoiserModel& model, const TokenSeq& c, const GenerationConfig& gcfg,
                     const NoiseSchedule& sched);

}  // namespace textdiff
