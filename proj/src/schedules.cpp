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

#include "textdiff/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "textdiff/errors.hpp"

namespace textdiff {

namespace {

constexpr double kLinearBetaMin = 0.1;
constexpr double kLinearBetaMax = 20.0;
constexpr double kNegativeRadicandTolerance = 1e-12;

}  // namespace

std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kSqrt:
      return "sqrt";
    case NoiseKind::kLinear:
      return "linear";
    case NoiseKind::kCosine:
      return "cosine";
  }
  return "?";
}

NoiseKind noise_kind_from_string(std::string_view name) {
  if (name == "sqrt") return NoiseKind::kSqrt;
  if (name == "linear") return NoiseKind::kLinear;
  if (name == "cosine") return NoiseKind::kCosine;
  throw ConfigError("unknown noise schedule kind '" + std::string(name) + "'");
}

NoiseSchedule NoiseSchedule::make(NoiseKind kind) {
  NoiseSchedule s;
  s.kind = kind;
  switch (kind) {
    case NoiseKind::kSqrt:
      s.shift = 1e-4;
      break;
    case NoiseKind::kLinear:
      s.shift = 0.0;
      break;
    case NoiseKind::kCosine:
      s.shift = 8e-3;
      s.abar_min = 1e-9;
      break;
  }
  return s;
}

double NoiseSchedule::raw_alpha_bar(double t) const {
  switch (kind) {
    case NoiseKind::kSqrt:
      return 1.0 - std::sqrt(t + shift);
    case NoiseKind::kLinear:
      return std::exp(-kLinearBetaMin * t - 0.5 * (kLinearBetaMax - kLinearBetaMin) * t * t);
    case NoiseKind::kCosine: {
      const double half_pi = 0.5 * std::numbers::pi;
      const double num = std::cos((t + shift) / (1.0 + shift) * half_pi);
      const double den = std::cos(shift / (1.0 + shift) * half_pi);
      return (num * num) / (den * den);
    }
  }
  return 0.0;
}

double NoiseSchedule::alpha_bar(double t) const {
  return std::clamp(raw_alpha_bar(t), abar_min, abar_max);
}

AlphaSigma NoiseSchedule::alpha_sigma(double t) const {
  if (!(t >= t_floor && t <= 1.0)) {
    std::ostringstream msg;
    msg << "diffusion time " << t << " outside [" << t_floor << ", 1]";
    throw DomainError(msg.str());
  }
  const double abar = alpha_bar(t);
  return {std::sqrt(abar), std::sqrt(1.0 - abar)};
}

double NoiseSchedule::sigma_t_given_s(double s, double t) const {
  if (!(s < t)) {
    std::ostringstream msg;
    msg << "transition requires s < t, got s=" << s << " t=" << t;
    throw OrderingError(msg.str());
  }
  const auto [alpha_s, sigma_s] = alpha_sigma(s);
  const auto [alpha_t, sigma_t] = alpha_sigma(t);
  const double ratio = alpha_t / alpha_s;
  const double radicand = sigma_t * sigma_t - ratio * ratio * sigma_s * sigma_s;
  if (radicand < -kNegativeRadicandTolerance) {
    std::ostringstream msg;
    msg << "inconsistent schedule: sigma_{t|s}^2 = " << radicand << " at s=" << s << " t=" << t;
    throw NumericError(msg.str());
  }
  return radicand <= 0.0 ? 0.0 : std::sqrt(radicand);
}

void NoiseSchedule::validate() const {
  if (!(t_floor > 0.0 && t_floor < 1.0)) throw ConfigError("noise.t_floor must lie in (0, 1)");
  if (!(shift >= 0.0)) throw ConfigError("noise.shift must be >= 0");
  if (!(abar_min > 0.0 && abar_min < abar_max && abar_max < 1.0))
    throw ConfigError("noise clamp bounds must satisfy 0 < abar_min < abar_max < 1");
}

void ScpSchedule::validate() const {
  if (!(lambda_min > 0.0 && lambda_min <= lambda_max && lambda_max <= 1.0))
    throw ConfigError("scp: need 0 < lambda_min <= lambda_max <= 1");
  if (!(gamma_min >= 0.0 && gamma_min <= gamma_max))
    throw ConfigError("scp: need 0 <= gamma_min <= gamma_max");
}

LambdaGamma scp_lambda_gamma(const ScpSchedule& scp, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("scp time must lie in [0, 1]");
  return {(scp.lambda_min - scp.lambda_max) * t + scp.lambda_max,
          (scp.gamma_min - scp.gamma_max) * t + scp.gamma_max};
}

MansConfig MansConfig::disabled() {
  MansConfig cfg;
  cfg.milestones = {1};
  cfg.scalings = {1.0};
  cfg.apply_prob = 0.0;
  return cfg;
}

void MansConfig::validate() const {
  if (milestones.empty() || scalings.empty())
    throw ConfigError("mans: milestones and scalings must be nonempty");
  if (milestones.size() != scalings.size())
    throw ConfigError("mans: milestones and scalings differ in length");
  for (std::size_t k = 1; k < milestones.size(); ++k)
    if (milestones[k] <= milestones[k - 1])
      throw ConfigError("mans: milestones must be strictly ascending");
  for (double b : scalings)
    if (!(b >= 1.0)) throw ConfigError("mans: scalings must be >= 1");
  if (!(apply_prob >= 0.0 && apply_prob <= 1.0))
    throw ConfigError("mans: apply_prob must lie in [0, 1]");
  if (!(t_ceiling > 0.0 && t_ceiling <= 1.0)) throw ConfigError("mans: t_ceiling must lie in (0, 1]");
}

double mans_beta(const MansConfig& cfg, std::int64_t n) {
  if (cfg.milestones.empty() || cfg.scalings.size() != cfg.milestones.size())
    throw ConfigError("mans: empty or inconsistent beta table");
  if (n < 0) throw DomainError("mans: iteration must be >= 0");
  const auto it = std::upper_bound(cfg.milestones.begin(), cfg.milestones.end(), n);
  if (it == cfg.milestones.end()) return cfg.scalings.back();
  return cfg.scalings[static_cast<std::size_t>(it - cfg.milestones.begin())];
}

void LrSchedule::validate() const {
  if (!(lr_max > 0.0)) throw ConfigError("lr.lr_max must be > 0");
  if (warmup < 1) throw ConfigError("lr.warmup must be >= 1");
}

double learning_rate(const LrSchedule& sched, std::int64_t n) {
  if (n < 1) throw DomainError("learning rate is defined for n >= 1");
  const double ratio = static_cast<double>(n) / static_cast<double>(sched.warmup);
  return sched.lr_max * std::min(ratio, 1.0 / std::sqrt(ratio));
}

}  // namespace textdiff
