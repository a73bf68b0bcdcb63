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

#include "textdiff/trainer.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

#include "json.hpp"
#include "textdiff/diffusion.hpp"
#include "textdiff/errors.hpp"
#include "textdiff/mans.hpp"
#include "textdiff/parallel.hpp"
#include "textdiff/rng.hpp"
#include "textdiff/sampler.hpp"
#include "textdiff/vocab_embed.hpp"

namespace textdiff {

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("training: batch_size must be >= 1");
  if (iterations < 0) throw ConfigError("training: iterations must be >= 0");
  if (!(sc_prob >= 0.0 && sc_prob <= 1.0)) throw ConfigError("training: sc_prob must lie in [0, 1]");
  if (!(grad_clip > 0.0)) throw ConfigError("training: grad_clip must be > 0");
  if (validation_interval < 0 || log_interval < 1 || checkpoint_interval < 0)
    throw ConfigError("training: intervals must be nonnegative (log_interval >= 1)");
  if (validation_nfe < 1) throw ConfigError("training: validation_nfe must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("training: dropout must lie in [0, 1)");
  if (!(label_smoothing >= 0.0 && label_smoothing < 1.0))
    throw ConfigError("training: label_smoothing must lie in [0, 1)");
  if (!(length_weight >= 0.0)) throw ConfigError("training: length_weight must be >= 0");
  scp.validate();
  mans.validate();
  lr.validate();
}

double clip_global_norm(Gradients& grads, double max_norm) {
  const double norm = global_norm(grads);
  if (std::isfinite(norm) && norm > max_norm) {
    const double k = max_norm / norm;
    for (auto& g : grads) g *= k;
  }
  return norm;
}

double diffusion_loss(const LatentSeq& z_pred, const LatentSeq& z0) {
  if (z_pred.rows() != z0.rows() || z_pred.cols() != z0.cols())
    throw ShapeError("diffusion_loss: shapes disagree");
  return (z_pred - z0).squaredNorm() / static_cast<double>(z0.size());
}

double rounding_loss(const LatentSeq& z0, const TokenSeq& x, const Matrix& codebook) {
  if (static_cast<std::size_t>(z0.rows()) != x.size()) throw ShapeError("rounding_loss: length mismatch");
  ad::Tape tape;
  const ad::Var z = tape.param(z0, false);
  const ad::Var e = tape.param(codebook, false);
  return tape.value(ad::cross_entropy(tape, ad::neg_sq_dist(tape, z, e), x)).value();
}

LossParts example_loss(const TransformerDenoiser& model, const ParallelExample& ex,
                       const ExampleDraws& draws, const LossOptions& opts,
                       const NoiseSchedule& sched, const ScpSchedule& scp, Gradients* grads) {
  const auto length = static_cast<Eigen::Index>(ex.target.size());
  if (length < 1 || length > model.config().max_len)
    throw RangeError("target length " + std::to_string(length) + " outside model range");
  Rng dropout_rng(draws.dropout_seed);
  ad::Tape tape;
  TransformerDenoiser::Graph g(model, tape, grads != nullptr, draws.dropout, &dropout_rng);

  const auto enc = g.encode(ex.source);
  const ad::Var z0 = ad::gather_rows(tape, g.codebook(), ex.target);
  const auto coef = scp_coefficients(draws.t, sched, scp);
  Matrix noise_term = draws.noise;
  for (Eigen::Index l = 0; l < length; ++l) noise_term.row(l) *= coef.noise[static_cast<std::size_t>(l)];
  const ad::Var z_pert = ad::add_const(tape, ad::scale_rows(tape, z0, coef.signal), noise_term);

  const ad::Var zeros = tape.constant(Matrix::Zero(length, model.config().latent));
  ad::Var z_out = g.denoise(enc, z_pert, draws.t, zeros);
  if (draws.self_condition) z_out = g.denoise(enc, z_pert, draws.t, ad::stop_gradient(tape, z_out));

  const ad::Var l_diff = ad::mse(tape, z_out, z0);
  const ad::Var l_round = ad::cross_entropy(tape, ad::neg_sq_dist(tape, z0, g.codebook()), ex.target);
  const TokenId len_class = static_cast<TokenId>(length - 1);
  const ad::Var l_len = ad::cross_entropy(tape, g.length_logits(enc), std::span(&len_class, 1),
                                          opts.label_smoothing);
  const ad::Var total = ad::add_scaled(tape, ad::add(tape, l_diff, l_round), l_len, opts.length_weight);

  LossParts parts{tape.value(l_diff).value(), tape.value(l_round).value(), tape.value(l_len).value(),
                  tape.value(total).value()};
  if (grads) {
    tape.backward(total);
    g.add_gradients(*grads);
  }
  return parts;
}

// ---------------------------------------------------------------------------

Trainer::Trainer(const DenoiserConfig& model_cfg, const TrainConfig& cfg, const NoiseSchedule& sched)
    : model_cfg_(model_cfg), cfg_(cfg), sched_(sched), model_(model_cfg, cfg.seed) {
  cfg_.validate();
  sched_.validate();
  adam_.m = zero_gradients(model_.params());
  adam_.v = zero_gradients(model_.params());
}

TrainMetrics Trainer::step(const Dataset& train) {
  if (train.empty()) throw ConfigError("training set is empty");
  const std::int64_t n = iteration_ + 1;
  Rng rng = RngStreams(cfg_.seed).stream("batch", static_cast<std::uint64_t>(n));
  std::uniform_int_distribution<std::size_t> pick(0, train.size() - 1);
  std::vector<ParallelExample> batch;
  batch.reserve(static_cast<std::size_t>(cfg_.batch_size));
  for (int i = 0; i < cfg_.batch_size; ++i) batch.push_back(train[pick(rng)]);
  return step(batch, n);
}

TrainMetrics Trainer::step(std::span<const ParallelExample> batch, std::int64_t n) {
  if (batch.empty()) throw ConfigError("empty training batch");
  const auto start = std::chrono::steady_clock::now();
  const RngStreams streams(cfg_.seed);
  const auto un = static_cast<std::uint64_t>(n);
  Rng branch_rng = streams.stream("branch", un);
  const bool self_condition = cfg_.sc_prob > 0.0 && uniform01(branch_rng) < cfg_.sc_prob;
  const double beta = mans_beta(cfg_.mans, n);
  const LossOptions opts{cfg_.length_weight, cfg_.label_smoothing};

  struct Slot {
    LossParts loss;
    Gradients grads;
    std::size_t masked = 0;
    std::size_t tokens = 0;
    double dt = 0.0;
  };
  std::vector<Slot> slots(batch.size());
  parallel_for(batch.size(), [&](std::size_t i) {
    const ParallelExample& ex = batch[i];
    Rng rng = streams.stream("example", un, i);
    const double t0 = sched_.t_floor + (1.0 - sched_.t_floor) * uniform01(rng);
    const auto length = static_cast<Eigen::Index>(ex.target.size());
    ExampleDraws draws;
    draws.t = constant_times(length, t0);
    if (cfg_.mans.apply_prob > 0.0) {
      const LatentSeq z0 = embed(ex.target, model_.codebook());
      const auto outcome =
          apply_mans(model_, model_.encode(ex.source), z0, draws.t, cfg_.mans, n, sched_, rng);
      for (std::size_t l = 0; l < outcome.t_theta.size(); ++l) slots[i].dt += outcome.t_theta[l] - t0;
      draws.t = outcome.t_theta;
      slots[i].masked = outcome.masked;
    }
    draws.noise = gaussian_matrix(length, model_cfg_.latent, rng);
    draws.self_condition = self_condition;
    draws.dropout = cfg_.dropout;
    draws.dropout_seed = rng();
    slots[i].tokens = static_cast<std::size_t>(length);
    slots[i].grads = zero_gradients(model_.params());
    slots[i].loss = example_loss(model_, ex, draws, opts, sched_, cfg_.scp, &slots[i].grads);
  });

  TrainMetrics m;
  m.iter = n;
  m.self_conditioned = self_condition;
  m.mans_beta = beta;
  Gradients grads = zero_gradients(model_.params());
  std::size_t masked = 0;
  std::size_t tokens = 0;
  double mans_dt = 0.0;
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (const auto& s : slots) {
    m.l_diff += s.loss.diffusion * inv;
    m.l_round += s.loss.rounding * inv;
    m.l_len += s.loss.length * inv;
    m.l_total += s.loss.total * inv;
    for (std::size_t k = 0; k < grads.size(); ++k) grads[k] += s.grads[k] * inv;
    masked += s.masked;
    tokens += s.tokens;
    mans_dt += s.dt;
  }
  m.mans_frac = static_cast<double>(masked) / static_cast<double>(tokens);
  if (!std::isfinite(m.l_total))
    throw DivergenceError("non-finite loss at iteration " + std::to_string(n));

  m.mans_dt = mans_dt / static_cast<double>(tokens);
  m.grad_norm = clip_global_norm(grads, cfg_.grad_clip);
  if (!std::isfinite(m.grad_norm))
    throw DivergenceError("non-finite gradient norm at iteration " + std::to_string(n));
  m.lr = learning_rate(cfg_.lr, n);
  apply_update(grads, n);
  iteration_ = n;
  m.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return m;
}

void Trainer::apply_update(const Gradients& grads, std::int64_t n) {
  const double lr = learning_rate(cfg_.lr, n);
  ++adam_.step;
  const double c1 = 1.0 - std::pow(AdamState::kBeta1, static_cast<double>(adam_.step));
  const double c2 = 1.0 - std::pow(AdamState::kBeta2, static_cast<double>(adam_.step));
  auto& entries = model_.params().entries();
  for (std::size_t k = 0; k < entries.size(); ++k) {
    adam_.m[k] = AdamState::kBeta1 * adam_.m[k] + (1.0 - AdamState::kBeta1) * grads[k];
    adam_.v[k] = AdamState::kBeta2 * adam_.v[k] +
                 (1.0 - AdamState::kBeta2) * grads[k].cwiseProduct(grads[k]);
    entries[k].value.array() -=
        lr * (adam_.m[k].array() / c1) / ((adam_.v[k].array() / c2).sqrt() + AdamState::kEps);
  }
  if (!model_.params().all_finite())
    throw DivergenceError("parameters became non-finite at iteration " + std::to_string(n));
}

ValidationReport evaluate_validation(const TransformerDenoiser& model, const Dataset& valid,
                                     const NoiseSchedule& sched, int nfe, std::uint64_t seed,
                                     int max_examples) {
  ValidationReport rep;
  const std::size_t count = std::min(valid.size(), static_cast<std::size_t>(std::max(max_examples, 0)));
  rep.examples = count;
  if (count == 0) return rep;
  const RngStreams streams(seed);
  GenerationConfig gcfg;
  gcfg.nfe = nfe;
  gcfg.sc_mode = ScMode::kReused;
  gcfg.t_floor = sched.t_floor;
  struct Slot {
    double loss = 0.0;
    bool exact = false;
    bool length_ok = false;
  };
  std::vector<Slot> slots(count);
  parallel_for(count, [&](std::size_t k) {
    const auto& ex = valid[k];
    const EncodedSource src = model.encode(ex.source);
    const auto length = static_cast<Eigen::Index>(ex.target.size());
    const double t = sched.t_floor + (1.0 - sched.t_floor) * (static_cast<double>(k) + 0.5) /
                                         static_cast<double>(count);
    Rng rng = streams.stream("valid", k);
    const LatentSeq z0 = embed(ex.target, model.codebook());
    const TimeVec tv = constant_times(length, t);
    const LatentSeq z_t = forward_sample(z0, tv, gaussian_matrix(length, z0.cols(), rng), sched);
    const LatentSeq first = model.denoise(src, z_t, tv, nullptr);
    slots[k].loss = diffusion_loss(model.denoise(src, z_t, tv, &first), z0);

    const int predicted = top_lengths(model.length_logits(src), 1).front();
    slots[k].length_ok = predicted == static_cast<int>(length);
    const auto res = generate(model, src, predicted, gcfg, sched,
                              candidate_seed(streams.derive("valid-gen", k), predicted, 0));
    slots[k].exact = res.tokens == ex.target;
  });
  std::size_t exact = 0, length_ok = 0;
  for (const auto& s : slots) {
    rep.diffusion_loss += s.loss;
    exact += s.exact ? 1 : 0;
    length_ok += s.length_ok ? 1 : 0;
  }
  rep.diffusion_loss /= static_cast<double>(count);
  rep.seq_accuracy = static_cast<double>(exact) / static_cast<double>(count);
  rep.length_accuracy = static_cast<double>(length_ok) / static_cast<double>(count);
  return rep;
}

ValidationReport Trainer::validate(const Dataset& valid) const {
  auto rep = evaluate_validation(model_, valid, sched_, cfg_.validation_nfe, cfg_.seed,
                                 cfg_.validation_examples);
  rep.iter = iteration_;
  return rep;
}

void write_metrics_jsonl(std::ostream& out, const TrainMetrics& m) {
  nlohmann::json j;
  j["iter"] = m.iter;
  j["l_diff"] = m.l_diff;
  j["l_round"] = m.l_round;
  j["l_len"] = m.l_len;
  j["l_total"] = m.l_total;
  j["lr"] = m.lr;
  j["mans_frac"] = m.mans_frac;
  j["mans_dt"] = m.mans_dt;
  j["mans_beta"] = m.mans_beta;
  j["grad_norm"] = m.grad_norm;
  j["self_conditioned"] = m.self_conditioned;
  j["wall_ms"] = m.wall_ms;
  out << j.dump() << '\n';
  out.flush();
}

namespace {

void write_validation_jsonl(std::ostream& out, const ValidationReport& r) {
  nlohmann::json j;
  j["iter"] = r.iter;
  j["diffusion_loss"] = r.diffusion_loss;
  j["seq_accuracy"] = r.seq_accuracy;
  j["length_accuracy"] = r.length_accuracy;
  j["examples"] = r.examples;
  out << j.dump() << '\n';
  out.flush();
}

}  // namespace

TrainLoopResult Trainer::run(const Dataset& train, const Dataset& valid, const LoopIo& io) {
  TrainLoopResult result;
  if (iteration_ >= cfg_.iterations) return result;
  if (train.empty()) throw ConfigError("training set is empty");
  double wall = 0.0;
  while (iteration_ < cfg_.iterations) {
    TrainMetrics m = step(train);
    wall += m.wall_ms;
    m.wall_ms = wall;
    const bool last = iteration_ == cfg_.iterations;
    if (m.iter % cfg_.log_interval == 0 || last) {
      if (io.metrics) write_metrics_jsonl(*io.metrics, m);
      result.log.push_back(m);
    }
    if (!valid.empty() && ((cfg_.validation_interval > 0 && m.iter % cfg_.validation_interval == 0) || last)) {
      const auto rep = validate(valid);
      if (io.validation) write_validation_jsonl(*io.validation, rep);
      result.validations.push_back(rep);
    }
    if (io.checkpoint &&
        ((cfg_.checkpoint_interval > 0 && m.iter % cfg_.checkpoint_interval == 0) || last))
      io.checkpoint(*this);
  }
  return result;
}

Checkpoint Trainer::to_checkpoint(const nlohmann::json& config,
                                  const std::vector<std::string>& vocab) const {
  Checkpoint c;
  c.config = config;
  c.vocab = vocab;
  c.iteration = iteration_;
  c.seed = cfg_.seed;
  c.optimizer_step = adam_.step;
  const auto& entries = model_.params().entries();
  for (std::size_t k = 0; k < entries.size(); ++k) c.arrays.push_back({"param/" + entries[k].name, entries[k].value});
  for (std::size_t k = 0; k < entries.size(); ++k) c.arrays.push_back({"adam_m/" + entries[k].name, adam_.m[k]});
  for (std::size_t k = 0; k < entries.size(); ++k) c.arrays.push_back({"adam_v/" + entries[k].name, adam_.v[k]});
  return c;
}

void Trainer::restore(const Checkpoint& ckpt) {
  auto& entries = model_.params().entries();
  auto load = [&](const std::string& name, Matrix& dst) {
    const Matrix& src = ckpt.array(name);
    if (src.rows() != dst.rows() || src.cols() != dst.cols())
      throw IoError("checkpoint array " + name + " has the wrong shape for this model");
    dst = src;
  };
  for (std::size_t k = 0; k < entries.size(); ++k) {
    load("param/" + entries[k].name, entries[k].value);
    load("adam_m/" + entries[k].name, adam_.m[k]);
    load("adam_v/" + entries[k].name, adam_.v[k]);
  }
  adam_.step = ckpt.optimizer_step;
  iteration_ = ckpt.iteration;
  cfg_.seed = ckpt.seed;
}

}  // namespace textdiff
