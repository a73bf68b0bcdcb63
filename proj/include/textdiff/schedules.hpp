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
#include <string>
#include <string_view>
#include <vector>

namespace textdiff {

enum class NoiseKind { kSqrt, kLinear, kCosine };

std::string_view to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(std::string_view name);

struct AlphaSigma {
  double alpha;
  double sigma;
};

// Variance-preserving continuous-time noise schedule, alpha(t)^2 + sigma(t)^2 = 1.
//
//   sqrt:   abar(t) = 1 - sqrt(t + s)                                   s = 1e-4
//   linear: abar(t) = exp(-b0 t - (b1 - b0) t^2 / 2)                    b0 = 0.1, b1 = 20
//   cosine: abar(t) = cos^2((t+s)/(1+s) pi/2) / cos^2(s/(1+s) pi/2)     s = 8e-3
//
// abar is clamped into [abar_min, abar_max] before taking square roots.
struct NoiseSchedule {
  NoiseKind kind = NoiseKind::kSqrt;
  double shift = 1e-4;
  double t_floor = 1e-3;
  double abar_min = 1e-5;
  double abar_max = 1.0 - 1e-5;

  // Defaults for a kind. Cosine uses a lower abar floor: its abar reaches
  // 1e-5 near t = 0.998, which would flatten alpha over the last grid cells.
  static NoiseSchedule make(NoiseKind kind);

  double raw_alpha_bar(double t) const;  // closed form, no clamping, any t >= 0
  double alpha_bar(double t) const;      // clamped
  AlphaSigma alpha_sigma(double t) const;

  // sqrt(sigma_t^2 - (alpha_t^2 / alpha_s^2) sigma_s^2), for s < t.
  double sigma_t_given_s(double s, double t) const;

  void validate() const;
};

// SCP signal-shrink / noise-inflation anchors. lambda_t and gamma_t are the
// linear interpolations (min - max) t + max.
struct ScpSchedule {
  double lambda_min = 0.90;
  double lambda_max = 0.95;
  double gamma_min = 0.15;
  double gamma_max = 0.35;

  static ScpSchedule identity() { return {1.0, 1.0, 0.0, 0.0}; }

  void validate() const;
};

struct LambdaGamma {
  double lambda;
  double gamma;
};

LambdaGamma scp_lambda_gamma(const ScpSchedule& scp, double t);

// Model-aware noise scaling: beta(n) stepping over training iterations.
struct MansConfig {
  std::vector<std::int64_t> milestones{100'000, 200'000, 600'000};
  std::vector<double> scalings{2.0, 3.0, 4.0};
  double apply_prob = 0.5;
  double t_ceiling = 1.0 - 1e-3;

  static MansConfig disabled();

  void validate() const;
};

// scalings[k] for the first milestone k with n < milestones[k]; the last
// scaling holds past the final milestone.
double mans_beta(const MansConfig& cfg, std::int64_t n);

// Inverse-sqrt schedule with linear warmup:
//   lr(n) = lr_max * min(n / warmup, sqrt(warmup / n)).
struct LrSchedule {
  double lr_max = 5e-4;
  std::int64_t warmup = 500;

  void validate() const;
};

double learning_rate(const LrSchedule& sched, std::int64_t n);

}  // namespace textdiff
