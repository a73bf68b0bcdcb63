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

#include <functional>
#include <span>
#include <vector>

#include "textdiff/types.hpp"

// Minimal reverse-mode automatic differentiation over dense double matrices.
// A Tape records every operation of one forward pass; backward() walks it in
// reverse and accumulates gradients into the nodes that require them.
namespace textdiff::ad {

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

class Tape {
 public:
  Tape() { nodes_.reserve(512); }
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf referencing external storage; `value` must outlive the tape.
  Var param(const Matrix& value, bool requires_grad = true);
  // Leaf owning its value; never receives gradient.
  Var constant(Matrix value);

  const Matrix& value(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }

  // Gradient accumulated into v by the last backward(); empty if none reached it.
  const Matrix& grad(Var v) const { return nodes_[v.id].grad; }

  // Seeds d(root)/d(root) = 1 for a 1x1 root and propagates.
  void backward(Var root);

  std::size_t size() const { return nodes_.size(); }

  // Internal API used by the op implementations.
  using Backward = std::function<void(Tape&, const Matrix& out_grad)>;
  Var push(Matrix value, std::span<const Var> inputs, Backward backward);
  Var push(Matrix value, std::initializer_list<Var> inputs, Backward backward) {
    return push(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                std::move(backward));
  }
  void accumulate(Var v, const Matrix& g);
  template <typename Expr>
  void accumulate_expr(Var v, const Expr& g) {
    Node& n = nodes_[v.id];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0)
      n.grad = g;
    else
      n.grad += g;
  }

 private:
  struct Node {
    Matrix owned;
    const Matrix* external = nullptr;
    Matrix grad;
    Backward backward;
    bool requires_grad = false;
  };
  std::vector<Node> nodes_;
};

// Stop-gradient: the value of `v` as a constant leaf.
Var stop_gradient(Tape& tape, Var v);

Var matmul(Tape& tape, Var a, Var b);     // a * b
Var matmul_nt(Tape& tape, Var a, Var b);  // a * b^T
Var add(Tape& tape, Var a, Var b);
Var add_row(Tape& tape, Var a, Var row);  // broadcast a 1 x n row over a's rows
Var scale(Tape& tape, Var a, double s);
Var scale_rows(Tape& tape, Var a, std::span<const double> row_scales);
Var add_const(Tape& tape, Var a, const Matrix& c);
Var hadamard_const(Tape& tape, Var a, const Matrix& mask);
Var gelu(Tape& tape, Var a);  // tanh approximation
Var layer_norm(Tape& tape, Var x, Var gain, Var bias, double eps = 1e-5);
Var softmax_rows(Tape& tape, Var a);
Var slice_cols(Tape& tape, Var a, Eigen::Index start, Eigen::Index count);
Var concat_cols(Tape& tape, std::span<const Var> parts);
Var gather_rows(Tape& tape, Var table, std::span<const TokenId> ids);
// Weighted average of rows: sum_i w_i a_i / sum_i w_i, a 1 x n row.
Var weighted_mean_rows(Tape& tape, Var a, std::span<const double> weights);
// out(l, m) = -||z_l - table_m||^2.
Var neg_sq_dist(Tape& tape, Var z, Var table);
// Mean over rows of the cross-entropy of softmax(logits_row) against targets,
// with uniform label smoothing.
Var cross_entropy(Tape& tape, Var logits, std::span<const TokenId> targets,
                  double smoothing = 0.0);
Var mse(Tape& tape, Var a, Var b);  // mean of squared differences
Var add_scaled(Tape& tape, Var a, Var b, double wb);  // a + wb * b

}  // namespace textdiff::ad
