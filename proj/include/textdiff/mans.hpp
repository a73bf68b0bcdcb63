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
#include <vector>

#include "textdiff/denoiser.hpp"
#include "textdiff/rng.hpp"
#include "textdiff/schedules.hpp"
#include "textdiff/types.hpp"

namespace textdiff {

// Per-token flag: the nearest codebook row of z0 equals that of the
// prediction (the model already recovers the token).
using ConfidenceMask = std::vector<bool>;

ConfidenceMask confidence_mask(const LatentSeq& z0, const LatentSeq& z_hat, const Matrix& codebook);

// Masked entries become min(beta * t, t_ceiling); the rest are unchanged.
TimeVec rescale_timesteps(const TimeVec& t, const ConfidenceMask& mask, double beta,
                          double t_ceiling);

struct MansOutcome {
  TimeVec t_theta;
  bool applied = false;
  std::size_t masked = 0;  // tokens rescaled
  double beta = 1.0;
};

// With probability cfg.apply_prob: noise z0 to z_t with the plain forward
// kernel, predict with a zero self-condition, and rescale the timesteps of
// confidently reconstructed tokens by mans_beta(cfg, n). Otherwise t is
// returned unchanged and the model is not evaluated.
MansOutcome apply_mans(const DenoiserModel& model, const EncodedSource& src, const LatentSeq& z0,
                       const TimeVec& t, const MansConfig& cfg, std::int64_t n,
                       const NoiseSchedule& sched, Rng& rng);

}  // namespace textdiff
