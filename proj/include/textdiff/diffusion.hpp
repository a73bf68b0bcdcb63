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

#include <span>
#include <vector>

#include "textdiff/schedules.hpp"
#include "textdiff/types.hpp"

// Gaussian diffusion kernels. Every kernel takes per-token times (one per
// row of the latent); constant-time use is the special case of a uniform
// vector. Noise is always supplied by the caller.
namespace textdiff {

// Row l = alphas[l] * z0_l + sigmas[l] * noise_l.
LatentSeq forward_sample(const LatentSeq& z0, std::span<const double> alphas,
                         std::span<const double> sigmas, const Matrix& noise);

// q(z_t | z0) with per-token times.
LatentSeq forward_sample(const LatentSeq& z0, const TimeVec& t, const Matrix& noise,
                         const NoiseSchedule& sched);

// Perturbed forward: alpha lambda z0 + sigma sqrt(1 + gamma^2) noise, per token.
LatentSeq scp_forward_sample(const LatentSeq& z0, const TimeVec& t, const Matrix& noise,
                             const NoiseSchedule& sched, const ScpSchedule& scp);

// Per-token coefficients of the SCP kernel, shared by the differentiable
// training path.
struct ForwardCoefficients {
  std::vector<double> signal;
  std::vector<double> noise;
};
ForwardCoefficients scp_coefficients(const TimeVec& t, const NoiseSchedule& sched,
                                     const ScpSchedule& scp);

struct PosteriorParams {
  LatentSeq mean;
  std::vector<double> std;  // per token
};

// q(z_s | z_t, z0_hat):
//   mean = (a_t / a_s)(s_s^2 / s_t^2) z_t + a_s (s_{t|s}^2 / s_t^2) z0_hat
//   std  = (s_s / s_t) s_{t|s}
PosteriorParams posterior_params(const LatentSeq& z_t, const LatentSeq& z0_hat, const TimeVec& s,
                                 const TimeVec& t, const NoiseSchedule& sched);
PosteriorParams posterior_params(const LatentSeq& z_t, const LatentSeq& z0_hat, double s, double t,
                                 const NoiseSchedule& sched);

// mean + std * noise.
LatentSeq reverse_step(const LatentSeq& z_t, const LatentSeq& z0_hat, double s, double t,
                       const Matrix& noise, const NoiseSchedule& sched);
LatentSeq reverse_step(const LatentSeq& z_t, const LatentSeq& z0_hat, const TimeVec& s,
                       const TimeVec& t, const Matrix& noise, const NoiseSchedule& sched);

TimeVec constant_times(Eigen::Index length, double t);

}  // namespace textdiff
