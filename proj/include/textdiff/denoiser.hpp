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
#include <unordered_map>
#include <vector>

#include "textdiff/autodiff.hpp"
#include "textdiff/rng.hpp"
#include "textdiff/types.hpp"

namespace textdiff {

// Ordered collection of named trainable tensors. Element addresses are
// stable once construction is finished.
class ParameterSet {
 public:
  struct Entry {
    std::string name;
    Matrix value;
  };

  Matrix& add(std::string name, Matrix init);
  Matrix& get(std::string_view name);
  const Matrix& get(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t scalar_count() const;
  bool all_finite() const;

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// One gradient tensor per ParameterSet entry, same order and shapes.
using Gradients = std::vector<Matrix>;

Gradients zero_gradients(const ParameterSet& params);
double global_norm(const Gradients& grads);

struct DenoiserConfig {
  int enc_layers = 2;
  int dec_layers = 2;
  int width = 64;
  int heads = 2;
  int ffn = 128;
  int latent = 16;   // H
  int max_len = 32;  // longest target the length head can predict
  int vocab = 16;    // V

  void validate() const;
};

// Encoder output for one conditioning sequence, shared by every denoiser
// call that conditions on it.
struct EncodedSource {
  Matrix memory;                 // Lc x d
  std::vector<double> key_bias;  // 0 for real tokens, -1e9 for padding
  std::vector<double> weights;   // 1 for real tokens, 0 for padding
};

// The contract every sampler, MANS and diagnostic routine relies on:
// D(z_t, t, self_cond, c) -> z0 estimate, plus the length prior p(L | c).
class DenoiserModel {
 public:
  virtual ~DenoiserModel() = default;

  virtual EncodedSource encode(const TokenSeq& c) const = 0;
  // self_cond == nullptr means the all-zeros condition.
  virtual LatentSeq denoise(const EncodedSource& src, const LatentSeq& z, const TimeVec& t,
                            const LatentSeq* self_cond) const = 0;
  // Scores over lengths 1..max_length(); entry k scores length k + 1.
  virtual RowVector length_logits(const EncodedSource& src) const = 0;
  virtual const Matrix& codebook() const = 0;
  virtual int max_length() const = 0;
};

// Sinusoidal features of t * 2000, one row per token.
Matrix time_features(const TimeVec& t, int width);
Matrix position_features(Eigen::Index length, int width);

// Tiny encoder-decoder transformer. The decoder attends bidirectionally over
// all target positions and cross-attends to the encoder memory; the
// self-condition enters by concatenation with z followed by a projection.
class TransformerDenoiser final : public DenoiserModel {
 public:
  TransformerDenoiser(const DenoiserConfig& cfg, std::uint64_t seed);

  const DenoiserConfig& config() const { return cfg_; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }

  EncodedSource encode(const TokenSeq& c) const override;
  LatentSeq denoise(const EncodedSource& src, const LatentSeq& z, const TimeVec& t,
                    const LatentSeq* self_cond) const override;
  RowVector length_logits(const EncodedSource& src) const override;
  const Matrix& codebook() const override { return params_.get("codebook"); }
  int max_length() const override { return cfg_.max_len; }

  LatentSeq denoise(const LatentSeq& z, const TimeVec& t, const LatentSeq* self_cond,
                    const TokenSeq& c) const {
    return denoise(encode(c), z, t, self_cond);
  }

  // Binds the parameters onto a tape and builds differentiable sub-graphs.
  class Graph {
   public:
    // dropout_rng may be null, which disables dropout regardless of rate.
    Graph(const TransformerDenoiser& model, ad::Tape& tape, bool trainable,
          double dropout = 0.0, Rng* dropout_rng = nullptr);

    ad::Var param(std::string_view name) const;
    ad::Var codebook() const { return param("codebook"); }

    struct Encoded {
      ad::Var memory;
      std::vector<double> key_bias;
      std::vector<double> weights;
    };
    Encoded encode(const TokenSeq& c);
    ad::Var denoise(const Encoded& src, ad::Var z, const TimeVec& t, ad::Var self_cond);
    ad::Var length_logits(const Encoded& src);

    // d(root)/d(param) after tape.backward(root), added into `out`.
    void add_gradients(Gradients& out) const;

   private:
    ad::Var layer_norm(ad::Var x, const std::string& prefix);
    ad::Var linear(ad::Var x, const std::string& prefix);
    ad::Var attention(ad::Var q_in, ad::Var kv_in, const std::vector<double>* key_bias,
                      const std::string& prefix);
    ad::Var feed_forward(ad::Var x, const std::string& prefix);
    ad::Var dropout(ad::Var x);

    const TransformerDenoiser& model_;
    ad::Tape& tape_;
    std::vector<ad::Var> vars_;
    double dropout_;
    Rng* rng_;
  };

 private:
  DenoiserConfig cfg_;
  ParameterSet params_;
};

}  // namespace textdiff
