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

#include "textdiff/denoiser.hpp"

#include <cmath>

#include "textdiff/errors.hpp"
#include "textdiff/vocab_embed.hpp"

namespace textdiff {

namespace {

constexpr double kTimeScale = 2000.0;
constexpr double kMaskBias = -1e9;

Matrix fan_in_gaussian(int rows, int cols, Rng& rng) {
  return gaussian_matrix(rows, cols, rng) / std::sqrt(static_cast<double>(rows));
}

Matrix sinusoid(std::span<const double> positions, int width) {
  Matrix out(static_cast<Eigen::Index>(positions.size()), width);
  const int half = width / 2;
  for (std::size_t r = 0; r < positions.size(); ++r) {
    for (int i = 0; i < half; ++i) {
      const double freq = std::exp(-std::log(10000.0) * i / std::max(1, half));
      const double arg = positions[r] * freq;
      out(static_cast<Eigen::Index>(r), i) = std::sin(arg);
      out(static_cast<Eigen::Index>(r), half + i) = std::cos(arg);
    }
    if (width % 2 == 1) out(static_cast<Eigen::Index>(r), width - 1) = 0.0;
  }
  return out;
}

}  // namespace

Matrix& ParameterSet::add(std::string name, Matrix init) {
  if (index_.contains(name)) throw ConfigError("duplicate parameter " + name);
  index_.emplace(name, entries_.size());
  entries_.push_back({std::move(name), std::move(init)});
  return entries_.back().value;
}

std::size_t ParameterSet::index_of(std::string_view name) const {
  if (const auto it = index_.find(std::string(name)); it != index_.end()) return it->second;
  throw ConfigError("unknown parameter " + std::string(name));
}

Matrix& ParameterSet::get(std::string_view name) { return entries_[index_of(name)].value; }
const Matrix& ParameterSet::get(std::string_view name) const { return entries_[index_of(name)].value; }

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += static_cast<std::size_t>(e.value.size());
  return n;
}

bool ParameterSet::all_finite() const {
  for (const auto& e : entries_)
    if (!e.value.allFinite()) return false;
  return true;
}

Gradients zero_gradients(const ParameterSet& params) {
  Gradients g;
  g.reserve(params.entries().size());
  for (const auto& e : params.entries()) g.push_back(Matrix::Zero(e.value.rows(), e.value.cols()));
  return g;
}

double global_norm(const Gradients& grads) {
  double sq = 0.0;
  for (const auto& g : grads) sq += g.squaredNorm();
  return std::sqrt(sq);
}

void DenoiserConfig::validate() const {
  if (enc_layers < 1 || dec_layers < 1 || width < 2 || heads < 1 || ffn < 1 || latent < 1 ||
      max_len < 1 || vocab <= Vocabulary::kNumReserved)
    throw ConfigError("model: all sizes must be positive and vocab must cover the reserved ids");
  if (width % heads != 0) throw ConfigError("model: width must be divisible by heads");
}

Matrix time_features(const TimeVec& t, int width) {
  std::vector<double> scaled(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) scaled[i] = t[i] * kTimeScale;
  return sinusoid(scaled, width);
}

Matrix position_features(Eigen::Index length, int width) {
  std::vector<double> pos(static_cast<std::size_t>(length));
  for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = static_cast<double>(i);
  return sinusoid(pos, width);
}

TransformerDenoiser::TransformerDenoiser(const DenoiserConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(mix64(seed ^ 0x6465'6e6f'6973'6572ULL));
  const int d = cfg_.width;
  const int h = cfg_.latent;
  auto add_linear = [&](const std::string& prefix, int in, int out) {
    params_.add(prefix + ".w", fan_in_gaussian(in, out, rng));
    params_.add(prefix + ".b", Matrix::Zero(1, out));
  };
  auto add_norm = [&](const std::string& prefix) {
    params_.add(prefix + ".g", Matrix::Ones(1, d));
    params_.add(prefix + ".b", Matrix::Zero(1, d));
  };
  auto add_attention = [&](const std::string& prefix) {
    for (const char* p : {".q", ".k", ".v", ".o"}) add_linear(prefix + p, d, d);
  };
  auto add_ffn = [&](const std::string& prefix) {
    add_linear(prefix + ".in", d, cfg_.ffn);
    add_linear(prefix + ".out", cfg_.ffn, d);
  };

  params_.add("codebook", init_codebook(cfg_.vocab, h, rng));
  params_.add("src_embed", gaussian_matrix(cfg_.vocab, d, rng));
  for (int l = 0; l < cfg_.enc_layers; ++l) {
    const std::string p = "enc" + std::to_string(l);
    add_norm(p + ".ln1");
    add_attention(p + ".attn");
    add_norm(p + ".ln2");
    add_ffn(p + ".ffn");
  }
  add_norm("enc.ln_f");
  add_linear("dec.in", 2 * h, d);
  add_linear("dec.time", d, d);
  for (int l = 0; l < cfg_.dec_layers; ++l) {
    const std::string p = "dec" + std::to_string(l);
    add_norm(p + ".ln1");
    add_attention(p + ".self");
    add_norm(p + ".ln2");
    add_attention(p + ".cross");
    add_norm(p + ".ln3");
    add_ffn(p + ".ffn");
  }
  add_norm("dec.ln_f");
  add_linear("dec.out", d, h);
  add_linear("len", d, cfg_.max_len);
}

EncodedSource TransformerDenoiser::encode(const TokenSeq& c) const {
  ad::Tape tape;
  Graph g(*this, tape, false);
  auto enc = g.encode(c);
  return {tape.value(enc.memory), std::move(enc.key_bias), std::move(enc.weights)};
}

LatentSeq TransformerDenoiser::denoise(const EncodedSource& src, const LatentSeq& z,
                                       const TimeVec& t, const LatentSeq* self_cond) const {
  ad::Tape tape;
  Graph g(*this, tape, false);
  Graph::Encoded enc{tape.param(src.memory, false), src.key_bias, src.weights};
  const ad::Var zv = tape.param(z, false);
  const ad::Var sc = self_cond ? tape.param(*self_cond, false)
                               : tape.constant(Matrix::Zero(z.rows(), z.cols()));
  return tape.value(g.denoise(enc, zv, t, sc));
}

RowVector TransformerDenoiser::length_logits(const EncodedSource& src) const {
  ad::Tape tape;
  Graph g(*this, tape, false);
  Graph::Encoded enc{tape.param(src.memory, false), src.key_bias, src.weights};
  return tape.value(g.length_logits(enc)).row(0);
}

// ---------------------------------------------------------------------------

TransformerDenoiser::Graph::Graph(const TransformerDenoiser& model, ad::Tape& tape, bool trainable,
                                  double dropout, Rng* dropout_rng)
    : model_(model), tape_(tape), dropout_(dropout), rng_(dropout_rng) {
  if (!model.params_.all_finite()) throw NumericError("denoiser parameters are not finite");
  vars_.reserve(model.params_.entries().size());
  for (const auto& e : model.params_.entries()) vars_.push_back(tape.param(e.value, trainable));
}

ad::Var TransformerDenoiser::Graph::param(std::string_view name) const {
  return vars_[model_.params_.index_of(name)];
}

void TransformerDenoiser::Graph::add_gradients(Gradients& out) const {
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    const Matrix& g = tape_.grad(vars_[i]);
    if (g.size() != 0) out[i] += g;
  }
}

ad::Var TransformerDenoiser::Graph::layer_norm(ad::Var x, const std::string& prefix) {
  return ad::layer_norm(tape_, x, param(prefix + ".g"), param(prefix + ".b"));
}

ad::Var TransformerDenoiser::Graph::linear(ad::Var x, const std::string& prefix) {
  return ad::add_row(tape_, ad::matmul(tape_, x, param(prefix + ".w")), param(prefix + ".b"));
}

ad::Var TransformerDenoiser::Graph::dropout(ad::Var x) {
  if (dropout_ <= 0.0 || rng_ == nullptr) return x;
  const Matrix& v = tape_.value(x);
  Matrix mask(v.rows(), v.cols());
  std::bernoulli_distribution keep(1.0 - dropout_);
  const double inv = 1.0 / (1.0 - dropout_);
  for (Eigen::Index r = 0; r < v.rows(); ++r)
    for (Eigen::Index c = 0; c < v.cols(); ++c) mask(r, c) = keep(*rng_) ? inv : 0.0;
  return ad::hadamard_const(tape_, x, mask);
}

ad::Var TransformerDenoiser::Graph::attention(ad::Var q_in, ad::Var kv_in,
                                              const std::vector<double>* key_bias,
                                              const std::string& prefix) {
  const int heads = model_.cfg_.heads;
  const int dh = model_.cfg_.width / heads;
  const ad::Var q = linear(q_in, prefix + ".q");
  const ad::Var k = linear(kv_in, prefix + ".k");
  const ad::Var v = linear(kv_in, prefix + ".v");
  const Eigen::Index lq = tape_.value(q).rows();
  const Eigen::Index lk = tape_.value(k).rows();
  Matrix bias;
  if (key_bias) {
    bias.resize(lq, lk);
    for (Eigen::Index j = 0; j < lk; ++j) bias.col(j).setConstant((*key_bias)[static_cast<std::size_t>(j)]);
  }
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<ad::Var> outs;
  outs.reserve(static_cast<std::size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    const ad::Var qh = ad::slice_cols(tape_, q, h * dh, dh);
    const ad::Var kh = ad::slice_cols(tape_, k, h * dh, dh);
    const ad::Var vh = ad::slice_cols(tape_, v, h * dh, dh);
    ad::Var scores = ad::scale(tape_, ad::matmul_nt(tape_, qh, kh), inv_sqrt);
    if (key_bias) scores = ad::add_const(tape_, scores, bias);
    outs.push_back(ad::matmul(tape_, ad::softmax_rows(tape_, scores), vh));
  }
  const ad::Var merged = heads == 1 ? outs[0] : ad::concat_cols(tape_, outs);
  return linear(merged, prefix + ".o");
}

ad::Var TransformerDenoiser::Graph::feed_forward(ad::Var x, const std::string& prefix) {
  return linear(ad::gelu(tape_, linear(x, prefix + ".in")), prefix + ".out");
}

TransformerDenoiser::Graph::Encoded TransformerDenoiser::Graph::encode(const TokenSeq& c) {
  if (c.empty()) throw ShapeError("conditioning sequence is empty");
  Encoded enc;
  enc.key_bias.resize(c.size());
  enc.weights.resize(c.size());
  bool any = false;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const bool pad = c[i] == 0;
    enc.key_bias[i] = pad ? kMaskBias : 0.0;
    enc.weights[i] = pad ? 0.0 : 1.0;
    any = any || !pad;
  }
  if (!any) throw ShapeError("conditioning sequence contains only padding");
  const int d = model_.cfg_.width;
  ad::Var x = ad::gather_rows(tape_, param("src_embed"), c);
  x = ad::add_const(tape_, x, position_features(static_cast<Eigen::Index>(c.size()), d));
  for (int l = 0; l < model_.cfg_.enc_layers; ++l) {
    const std::string p = "enc" + std::to_string(l);
    const ad::Var h1 = layer_norm(x, p + ".ln1");
    x = ad::add(tape_, x, dropout(attention(h1, h1, &enc.key_bias, p + ".attn")));
    x = ad::add(tape_, x, dropout(feed_forward(layer_norm(x, p + ".ln2"), p + ".ffn")));
  }
  enc.memory = layer_norm(x, "enc.ln_f");
  return enc;
}

ad::Var TransformerDenoiser::Graph::denoise(const Encoded& src, ad::Var z, const TimeVec& t,
                                            ad::Var self_cond) {
  const auto& cfg = model_.cfg_;
  const Matrix& zv = tape_.value(z);
  if (zv.cols() != cfg.latent) throw ShapeError("denoise: latent width differs from model");
  if (zv.rows() < 1 || zv.rows() > cfg.max_len) throw RangeError("denoise: target length out of range");
  if (static_cast<Eigen::Index>(t.size()) != zv.rows())
    throw ShapeError("denoise: one time per target position required");
  const Matrix& sv = tape_.value(self_cond);
  if (sv.rows() != zv.rows() || sv.cols() != zv.cols()) throw ShapeError("denoise: self-condition shape");

  const ad::Var parts[] = {z, self_cond};
  ad::Var x = linear(ad::concat_cols(tape_, parts), "dec.in");
  x = ad::add_const(tape_, x, position_features(zv.rows(), cfg.width));
  x = ad::add(tape_, x, linear(tape_.constant(time_features(t, cfg.width)), "dec.time"));
  for (int l = 0; l < cfg.dec_layers; ++l) {
    const std::string p = "dec" + std::to_string(l);
    const ad::Var h1 = layer_norm(x, p + ".ln1");
    x = ad::add(tape_, x, dropout(attention(h1, h1, nullptr, p + ".self")));
    x = ad::add(tape_, x, dropout(attention(layer_norm(x, p + ".ln2"), src.memory, &src.key_bias,
                                            p + ".cross")));
    x = ad::add(tape_, x, dropout(feed_forward(layer_norm(x, p + ".ln3"), p + ".ffn")));
  }
  return linear(layer_norm(x, "dec.ln_f"), "dec.out");
}

ad::Var TransformerDenoiser::Graph::length_logits(const Encoded& src) {
  return linear(ad::weighted_mean_rows(tape_, src.memory, src.weights), "len");
}

}  // namespace textdiff
