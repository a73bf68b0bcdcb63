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

#include <cmath>
#include <string>
#include <vector>

#include "textdiff/denoiser.hpp"
#include "textdiff/types.hpp"
#include "textdiff/vocab_embed.hpp"

namespace textdiff::testing {

// Deterministic pseudo-random matrix for fixtures.
inline Matrix fixture_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  return gaussian_matrix(rows, cols, rng);
}

// z0 estimate = a * z + b * self_cond (+ c * mean of the source memory), with
// a fixed length prior. Cheap, exactly analyzable stand-in for a network.
class LinearModel final : public DenoiserModel {
 public:
  LinearModel(Matrix codebook, double a, double b, int max_len = 16, int peak_len = 4)
      : codebook_(std::move(codebook)), a_(a), b_(b), max_len_(max_len), peak_(peak_len) {}

  EncodedSource encode(const TokenSeq& c) const override {
    EncodedSource s;
    s.memory = Matrix::Zero(static_cast<Eigen::Index>(c.size()), 1);
    s.key_bias.assign(c.size(), 0.0);
    s.weights.assign(c.size(), 1.0);
    return s;
  }
  LatentSeq denoise(const EncodedSource&, const LatentSeq& z, const TimeVec& t,
                    const LatentSeq* sc) const override {
    LatentSeq out = a_ * z;
    for (Eigen::Index r = 0; r < z.rows(); ++r) out.row(r) *= (1.0 - 0.5 * t[static_cast<std::size_t>(r)]);
    if (sc) out += b_ * *sc;
    return out;
  }
  RowVector length_logits(const EncodedSource&) const override {
    RowVector l(max_len_);
    for (int k = 0; k < max_len_; ++k) l(k) = -std::abs(k + 1 - peak_);
    return l;
  }
  const Matrix& codebook() const override { return codebook_; }
  int max_length() const override { return max_len_; }

 private:
  Matrix codebook_;
  double a_, b_;
  int max_len_, peak_;
};

// Forwards to another model with the self-condition always dropped.
class IgnoreSelfCondition final : public DenoiserModel {
 public:
  explicit IgnoreSelfCondition(const DenoiserModel& inner) : inner_(inner) {}
  EncodedSource encode(const TokenSeq& c) const override { return inner_.encode(c); }
  LatentSeq denoise(const EncodedSource& s, const LatentSeq& z, const TimeVec& t,
                    const LatentSeq*) const override {
    return inner_.denoise(s, z, t, nullptr);
  }
  RowVector length_logits(const EncodedSource& s) const override { return inner_.length_logits(s); }
  const Matrix& codebook() const override { return inner_.codebook(); }
  int max_length() const override { return inner_.max_length(); }

 private:
  const DenoiserModel& inner_;
};

// Predicts the embedding of a fixed target for every input.
class OracleModel final : public DenoiserModel {
 public:
  OracleModel(Matrix codebook, TokenSeq target, int max_len = 16)
      : codebook_(std::move(codebook)), target_(std::move(target)), max_len_(max_len) {}
  EncodedSource encode(const TokenSeq& c) const override {
    EncodedSource s;
    s.memory = Matrix::Zero(static_cast<Eigen::Index>(c.size()), 1);
    s.key_bias.assign(c.size(), 0.0);
    s.weights.assign(c.size(), 1.0);
    return s;
  }
  LatentSeq denoise(const EncodedSource&, const LatentSeq& z, const TimeVec&,
                    const LatentSeq*) const override {
    LatentSeq out(z.rows(), z.cols());
    for (Eigen::Index r = 0; r < z.rows(); ++r)
      out.row(r) = codebook_.row(target_[static_cast<std::size_t>(r) % target_.size()]);
    return out;
  }
  RowVector length_logits(const EncodedSource&) const override {
    RowVector l = RowVector::Constant(max_len_, -10.0);
    l(static_cast<Eigen::Index>(target_.size()) - 1) = 10.0;
    return l;
  }
  const Matrix& codebook() const override { return codebook_; }
  int max_length() const override { return max_len_; }

 private:
  Matrix codebook_;
  TokenSeq target_;
  int max_len_;
};

inline DenoiserConfig tiny_config(int vocab = 10) {
  DenoiserConfig c;
  c.enc_layers = 1;
  c.dec_layers = 1;
  c.width = 8;
  c.heads = 2;
  c.ffn = 12;
  c.latent = 4;
  c.max_len = 6;
  c.vocab = vocab;
  return c;
}

}  // namespace textdiff::testing
