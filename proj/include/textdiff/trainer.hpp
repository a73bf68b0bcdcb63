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
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "textdiff/data_io.hpp"
#include "textdiff/denoiser.hpp"
#include "textdiff/schedules.hpp"
#include "textdiff/types.hpp"

namespace textdiff {

struct TrainConfig {
  int batch_size = 32;
  std::int64_t iterations = 3000;
  ScpSchedule scp;
  MansConfig mans;
  LrSchedule lr;
  double sc_prob = 0.5;
  double grad_clip = 1.0;
  std::uint64_t seed = 0;
  std::int64_t validation_interval = 500;
  std::int64_t log_interval = 50;
  std::int64_t checkpoint_interval = 0;  // 0: only at the end
  int validation_examples = 200;
  int validation_nfe = 5;
  double dropout = 0.1;
  double label_smoothing = 0.1;  // length head only
  double length_weight = 0.1;

  void validate() const;
};

struct TrainMetrics {
  std::int64_t iter = 0;
  double l_diff = 0.0;
  double l_round = 0.0;
  double l_len = 0.0;
  double l_total = 0.0;
  double lr = 0.0;
  double mans_frac = 0.0;  // fraction of batch tokens whose time was rescaled
  double mans_dt = 0.0;    // mean over batch tokens of t_theta - t
  double mans_beta = 1.0;  // beta(n) in force at this iteration
  double grad_norm = 0.0;  // before clipping
  bool self_conditioned = false;
  double wall_ms = 0.0;
};

// Mean over all L*H entries of (z_pred - z0)^2.
// Scales grads to global norm max_norm when it is exceeded; returns the
// norm before clipping.
double clip_global_norm(Gradients& grads, double max_norm);

double diffusion_loss(const LatentSeq& z_pred, const LatentSeq& z0);

// Mean per-position cross-entropy of softmax(-||z0_l - e_m||^2) against x.
double rounding_loss(const LatentSeq& z0, const TokenSeq& x, const Matrix& codebook);

// Every random quantity a single training example consumes. Fixing these
// makes the example loss a deterministic function of the parameters.
struct ExampleDraws {
  TimeVec t;  // already rescaled by MANS
  Matrix noise;
  bool self_condition = false;
  double dropout = 0.0;
  std::uint64_t dropout_seed = 0;
};

struct LossParts {
  double diffusion = 0.0;
  double rounding = 0.0;
  double length = 0.0;
  double total = 0.0;
};

struct LossOptions {
  double length_weight = 0.1;
  double label_smoothing = 0.1;
};

// L_total = L_diff(z_out, z0) + L_round(z0, x) + w * L_len. z_out is the
// zero-conditioned prediction on the SCP-perturbed sample, or, when
// draws.self_condition is set, a second prediction conditioned on the
// stop-gradient of the first. Adds dL/dtheta into *grads when non-null.
LossParts example_loss(const TransformerDenoiser& model, const ParallelExample& ex,
                       const ExampleDraws& draws, const LossOptions& opts,
                       const NoiseSchedule& sched, const ScpSchedule& scp, Gradients* grads);

struct AdamState {
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.98;
  static constexpr double kEps = 1e-8;

  Gradients m;
  Gradients v;
  std::int64_t step = 0;
};

struct ValidationReport {
  std::int64_t iter = 0;
  double diffusion_loss = 0.0;
  double seq_accuracy = 0.0;
  double length_accuracy = 0.0;
  std::size_t examples = 0;
};

// Held-out diffusion loss of the self-conditioned prediction at stratified
// times, plus exact-match accuracy of reused-mode generation at `nfe` with
// the top-1 predicted length.
ValidationReport evaluate_validation(const TransformerDenoiser& model, const Dataset& valid,
                                     const NoiseSchedule& sched, int nfe, std::uint64_t seed,
                                     int max_examples);

struct LoopIo {
  std::ostream* metrics = nullptr;     // JSONL, one record per logged iteration
  std::ostream* validation = nullptr;  // JSONL, one record per validation
  std::function<void(const class Trainer&)> checkpoint;
};

struct TrainLoopResult {
  std::vector<TrainMetrics> log;
  std::vector<ValidationReport> validations;
};

class Trainer {
 public:
  Trainer(const DenoiserConfig& model_cfg, const TrainConfig& cfg, const NoiseSchedule& sched);

  const TransformerDenoiser& model() const { return model_; }
  TransformerDenoiser& model() { return model_; }
  const TrainConfig& config() const { return cfg_; }
  TrainConfig& config() { return cfg_; }
  const NoiseSchedule& schedule() const { return sched_; }
  std::int64_t iteration() const { return iteration_; }
  const AdamState& optimizer() const { return adam_; }

  // Runs iteration n = iteration() + 1 on a batch drawn from `train`.
  TrainMetrics step(const Dataset& train);
  // Runs iteration n on an explicit batch.
  TrainMetrics step(std::span<const ParallelExample> batch, std::int64_t n);

  // Steps until cfg.iterations, validating, logging and checkpointing.
  TrainLoopResult run(const Dataset& train, const Dataset& valid, const LoopIo& io = {});

  ValidationReport validate(const Dataset& valid) const;

  Checkpoint to_checkpoint(const nlohmann::json& config, const std::vector<std::string>& vocab) const;
  void restore(const Checkpoint& ckpt);

 private:
  void apply_update(const Gradients& grads, std::int64_t n);

  DenoiserConfig model_cfg_;
  TrainConfig cfg_;
  NoiseSchedule sched_;
  TransformerDenoiser model_;
  AdamState adam_;
  std::int64_t iteration_ = 0;
};

void write_metrics_jsonl(std::ostream& out, const TrainMetrics& m);

}  // namespace textdiff
