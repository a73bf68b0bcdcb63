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

#include "textdiff/mans.hpp"

#include <algorithm>

#include "textdiff/diffusion.hpp"
#include "textdiff/errors.hpp"
#include "textdiff/vocab_embed.hpp"

namespace textdiff {

ConfidenceMask confidence_mask(const LatentSeq& z0, const LatentSeq& z_hat, const Matrix& codebook) {
  if (z0.rows() != z_hat.rows() || z0.cols() != z_hat.cols())
    throw ShapeError("confidence_mask: latent shapes disagree");
  const TokenSeq truth = round_to_tokens(z0, codebook);
  const TokenSeq recon = round_to_tokens(z_hat, codebook);
  ConfidenceMask mask(truth.size());
  for (std::size_t l = 0; l < truth.size(); ++l) mask[l] = truth[l] == recon[l];
  return mask;
}

TimeVec rescale_timesteps(const TimeVec& t, const ConfidenceMask& mask, double beta,
                          double t_ceiling) {
  if (t.size() != mask.size()) throw ShapeError("rescale_timesteps: mask length differs");
  if (!(beta >= 1.0)) throw DomainError("rescale_timesteps: beta must be >= 1");
  TimeVec out = t;
  for (std::size_t l = 0; l < t.size(); ++l)
    if (mask[l]) out[l] = std::max(t[l], std::min(beta * t[l], t_ceiling));
  return out;
}

MansOutcome apply_mans(const DenoiserModel& model, const EncodedSource& src, const LatentSeq& z0,
                       const TimeVec& t, const MansConfig& cfg, std::int64_t n,
                       const NoiseSchedule& sched, Rng& rng) {
  MansOutcome out;
  out.t_theta = t;
  if (cfg.apply_prob <= 0.0 || uniform01(rng) >= cfg.apply_prob) return out;
  const Matrix noise = gaussian_matrix(z0.rows(), z0.cols(), rng);
  const LatentSeq z_t = forward_sample(z0, t, noise, sched);
  const LatentSeq z_hat = model.denoise(src, z_t, t, nullptr);
  const ConfidenceMask mask = confidence_mask(z0, z_hat, model.codebook());
  out.applied = true;
  out.beta = mans_beta(cfg, n);
  out.masked = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
  out.t_theta = rescale_timesteps(t, mask, out.beta, cfg.t_ceiling);
  return out;
}

}  // namespace textdiff
