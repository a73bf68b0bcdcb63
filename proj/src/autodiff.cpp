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

#include "textdiff/autodiff.hpp"

#include <cmath>
#include <numbers>

#include "textdiff/errors.hpp"

namespace textdiff::ad {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
}

// Row-wise log-sum-exp.
Eigen::VectorXd row_lse(const Matrix& m) {
  const Eigen::VectorXd mx = m.rowwise().maxCoeff();
  return mx.array() + (m.colwise() - mx).array().exp().rowwise().sum().log();
}

}  // namespace

Var Tape::param(const Matrix& value, bool requires_grad) {
  Node n;
  n.external = &value;
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return {static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(Matrix value) {
  Node n;
  n.owned = std::move(value);
  nodes_.push_back(std::move(n));
  return {static_cast<int>(nodes_.size()) - 1};
}

const Matrix& Tape::value(Var v) const {
  const Node& n = nodes_[v.id];
  return n.external ? *n.external : n.owned;
}

Var Tape::push(Matrix value, std::span<const Var> inputs, Backward backward) {
  bool needs = false;
  for (Var in : inputs) needs = needs || nodes_[in.id].requires_grad;
  Node n;
  n.owned = std::move(value);
  n.requires_grad = needs;
  if (needs) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {static_cast<int>(nodes_.size()) - 1};
}

void Tape::accumulate(Var v, const Matrix& g) { accumulate_expr(v, g); }

void Tape::backward(Var root) {
  if (value(root).size() != 1) throw ShapeError("backward: root must be 1x1");
  for (auto& n : nodes_) n.grad.resize(0, 0);
  if (!nodes_[root.id].requires_grad) return;
  nodes_[root.id].grad = Matrix::Ones(1, 1);
  for (int i = root.id; i >= 0; --i) {
    Node& n = nodes_[i];
    // Inputs always have smaller ids, so n.grad is final here.
    if (n.backward && n.grad.size() != 0) n.backward(*this, n.grad);
  }
}

Var stop_gradient(Tape& tape, Var v) { return tape.constant(tape.value(v)); }

Var matmul(Tape& tape, Var a, Var b) {
  const Matrix& A = tape.value(a);
  const Matrix& B = tape.value(b);
  if (A.cols() != B.rows()) throw ShapeError("matmul: inner dimensions differ");
  return tape.push(A * B, {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (t.requires_grad(a)) t.accumulate_expr(a, g * t.value(b).transpose());
    if (t.requires_grad(b)) t.accumulate_expr(b, t.value(a).transpose() * g);
  });
}

Var matmul_nt(Tape& tape, Var a, Var b) {
  const Matrix& A = tape.value(a);
  const Matrix& B = tape.value(b);
  if (A.cols() != B.cols()) throw ShapeError("matmul_nt: inner dimensions differ");
  return tape.push(A * B.transpose(), {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (t.requires_grad(a)) t.accumulate_expr(a, g * t.value(b));
    if (t.requires_grad(b)) t.accumulate_expr(b, g.transpose() * t.value(a));
  });
}

Var add(Tape& tape, Var a, Var b) {
  require_same_shape(tape.value(a), tape.value(b), "add");
  return tape.push(tape.value(a) + tape.value(b), {a, b}, [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var add_row(Tape& tape, Var a, Var row) {
  const Matrix& A = tape.value(a);
  const Matrix& R = tape.value(row);
  if (R.rows() != 1 || R.cols() != A.cols()) throw ShapeError("add_row: bias shape mismatch");
  Matrix out = A.rowwise() + R.row(0);
  return tape.push(std::move(out), {a, row}, [a, row](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    if (t.requires_grad(row)) t.accumulate_expr(row, g.colwise().sum());
  });
}

Var scale(Tape& tape, Var a, double s) {
  return tape.push(tape.value(a) * s, {a},
                   [a, s](Tape& t, const Matrix& g) { t.accumulate_expr(a, g * s); });
}

Var scale_rows(Tape& tape, Var a, std::span<const double> row_scales) {
  const Matrix& A = tape.value(a);
  if (static_cast<Eigen::Index>(row_scales.size()) != A.rows())
    throw ShapeError("scale_rows: one scale per row required");
  Eigen::VectorXd s = Eigen::Map<const Eigen::VectorXd>(row_scales.data(), A.rows());
  Matrix out = s.asDiagonal() * A;
  return tape.push(std::move(out), {a}, [a, s](Tape& t, const Matrix& g) {
    t.accumulate_expr(a, s.asDiagonal() * g);
  });
}

Var add_const(Tape& tape, Var a, const Matrix& c) {
  require_same_shape(tape.value(a), c, "add_const");
  return tape.push(tape.value(a) + c, {a}, [a](Tape& t, const Matrix& g) { t.accumulate(a, g); });
}

Var hadamard_const(Tape& tape, Var a, const Matrix& mask) {
  require_same_shape(tape.value(a), mask, "hadamard_const");
  return tape.push(tape.value(a).cwiseProduct(mask), {a}, [a, mask](Tape& t, const Matrix& g) {
    t.accumulate_expr(a, g.cwiseProduct(mask));
  });
}

Var gelu(Tape& tape, Var a) {
  static constexpr double kC = 0.7978845608028654;  // sqrt(2 / pi)
  static constexpr double kA = 0.044715;
  const Matrix& X = tape.value(a);
  const Matrix inner = kC * (X.array() + kA * X.array().cube()).matrix();
  const Matrix th = inner.array().tanh().matrix();
  Matrix out = (0.5 * X.array() * (1.0 + th.array())).matrix();
  return tape.push(std::move(out), {a}, [a, th](Tape& t, const Matrix& g) {
    const auto x = t.value(a).array();
    const auto d = 0.5 * (1.0 + th.array()) +
                   0.5 * x * (1.0 - th.array().square()) * kC * (1.0 + 3.0 * kA * x.square());
    t.accumulate_expr(a, (g.array() * d).matrix());
  });
}

Var layer_norm(Tape& tape, Var x, Var gain, Var bias, double eps) {
  const Matrix& X = tape.value(x);
  const Matrix& G = tape.value(gain);
  const Matrix& B = tape.value(bias);
  if (G.rows() != 1 || G.cols() != X.cols() || B.rows() != 1 || B.cols() != X.cols())
    throw ShapeError("layer_norm: gain/bias shape mismatch");
  const double n = static_cast<double>(X.cols());
  const Eigen::VectorXd mean = X.rowwise().mean();
  const Matrix centered = X.colwise() - mean;
  const Eigen::VectorXd inv_std =
      ((centered.array().square().rowwise().sum() / n) + eps).rsqrt().matrix();
  Matrix xhat = inv_std.asDiagonal() * centered;
  Matrix out = (xhat.array().rowwise() * G.row(0).array()).matrix().rowwise() + B.row(0);
  return tape.push(std::move(out), {x, gain, bias},
                   [x, gain, bias, xhat, inv_std, n](Tape& t, const Matrix& g) {
                     if (t.requires_grad(gain))
                       t.accumulate_expr(gain, (g.array() * xhat.array()).colwise().sum().matrix());
                     if (t.requires_grad(bias)) t.accumulate_expr(bias, g.colwise().sum());
                     if (t.requires_grad(x)) {
                       const Matrix gx = (g.array().rowwise() * t.value(gain).row(0).array()).matrix();
                       const Eigen::VectorXd m1 = gx.rowwise().mean();
                       const Eigen::VectorXd m2 =
                           (gx.array() * xhat.array()).rowwise().sum().matrix() / n;
                       Matrix dx = gx.colwise() - m1;
                       dx -= m2.asDiagonal() * xhat;
                       t.accumulate_expr(x, inv_std.asDiagonal() * dx);
                     }
                   });
}

Var softmax_rows(Tape& tape, Var a) {
  const Matrix& A = tape.value(a);
  const Eigen::VectorXd mx = A.rowwise().maxCoeff();
  Matrix e = (A.colwise() - mx).array().exp().matrix();
  const Eigen::VectorXd inv = e.rowwise().sum().cwiseInverse();
  Matrix p = inv.asDiagonal() * e;
  Matrix p_copy = p;
  return tape.push(std::move(p), {a}, [a, p_copy](Tape& t, const Matrix& g) {
    const Eigen::VectorXd dot = (g.array() * p_copy.array()).rowwise().sum();
    t.accumulate_expr(a, (p_copy.array() * (g.colwise() - dot).array()).matrix());
  });
}

Var slice_cols(Tape& tape, Var a, Eigen::Index start, Eigen::Index count) {
  const Matrix& A = tape.value(a);
  if (start < 0 || count < 0 || start + count > A.cols()) throw ShapeError("slice_cols: out of range");
  const Eigen::Index rows = A.rows();
  const Eigen::Index cols = A.cols();
  return tape.push(A.middleCols(start, count), {a},
                   [a, start, count, rows, cols](Tape& t, const Matrix& g) {
                     Matrix full = Matrix::Zero(rows, cols);
                     full.middleCols(start, count) = g;
                     t.accumulate(a, full);
                   });
}

Var concat_cols(Tape& tape, std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const Eigen::Index rows = tape.value(parts[0]).rows();
  Eigen::Index cols = 0;
  for (Var p : parts) {
    if (tape.value(p).rows() != rows) throw ShapeError("concat_cols: row counts differ");
    cols += tape.value(p).cols();
  }
  Matrix out(rows, cols);
  Eigen::Index offset = 0;
  std::vector<Var> inputs(parts.begin(), parts.end());
  for (Var p : parts) {
    out.middleCols(offset, tape.value(p).cols()) = tape.value(p);
    offset += tape.value(p).cols();
  }
  return tape.push(std::move(out), parts, [inputs](Tape& t, const Matrix& g) {
    Eigen::Index off = 0;
    for (Var p : inputs) {
      const Eigen::Index c = t.value(p).cols();
      if (t.requires_grad(p)) t.accumulate_expr(p, g.middleCols(off, c));
      off += c;
    }
  });
}

Var gather_rows(Tape& tape, Var table, std::span<const TokenId> ids) {
  const Matrix& T = tape.value(table);
  Matrix out(static_cast<Eigen::Index>(ids.size()), T.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= T.rows())
      throw RangeError("token id " + std::to_string(ids[i]) + " outside [0, " +
                       std::to_string(T.rows()) + ")");
    out.row(static_cast<Eigen::Index>(i)) = T.row(ids[i]);
  }
  std::vector<TokenId> idx(ids.begin(), ids.end());
  const Eigen::Index rows = T.rows();
  return tape.push(std::move(out), {table}, [table, idx, rows](Tape& t, const Matrix& g) {
    Matrix full = Matrix::Zero(rows, g.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) full.row(idx[i]) += g.row(static_cast<Eigen::Index>(i));
    t.accumulate(table, full);
  });
}

Var weighted_mean_rows(Tape& tape, Var a, std::span<const double> weights) {
  const Matrix& A = tape.value(a);
  if (static_cast<Eigen::Index>(weights.size()) != A.rows())
    throw ShapeError("weighted_mean_rows: one weight per row required");
  Eigen::RowVectorXd w = Eigen::Map<const Eigen::RowVectorXd>(weights.data(), A.rows());
  const double total = w.sum();
  if (!(total > 0.0)) throw NumericError("weighted_mean_rows: weights sum to zero");
  w /= total;
  Matrix out = w * A;
  return tape.push(std::move(out), {a}, [a, w](Tape& t, const Matrix& g) {
    t.accumulate_expr(a, w.transpose() * g);
  });
}

Var neg_sq_dist(Tape& tape, Var z, Var table) {
  const Matrix& Z = tape.value(z);
  const Matrix& E = tape.value(table);
  if (Z.cols() != E.cols()) throw ShapeError("neg_sq_dist: embedding widths differ");
  const Eigen::VectorXd zn = Z.rowwise().squaredNorm();
  const Eigen::RowVectorXd en = E.rowwise().squaredNorm().transpose();
  Matrix out = 2.0 * Z * E.transpose();
  out.colwise() -= zn;
  out.rowwise() -= en;
  return tape.push(std::move(out), {z, table}, [z, table](Tape& t, const Matrix& g) {
    // d/dz_l = sum_m g_lm * -2 (z_l - e_m);  d/de_m = sum_l g_lm * 2 (z_l - e_m)
    const Matrix& Zv = t.value(z);
    const Matrix& Ev = t.value(table);
    if (t.requires_grad(z)) {
      const Eigen::VectorXd gs = g.rowwise().sum();
      t.accumulate_expr(z, 2.0 * (g * Ev) - 2.0 * (gs.asDiagonal() * Zv));
    }
    if (t.requires_grad(table)) {
      const Eigen::VectorXd gs = g.colwise().sum().transpose();
      t.accumulate_expr(table, 2.0 * (g.transpose() * Zv) - 2.0 * (gs.asDiagonal() * Ev));
    }
  });
}

Var cross_entropy(Tape& tape, Var logits, std::span<const TokenId> targets, double smoothing) {
  const Matrix& X = tape.value(logits);
  if (static_cast<Eigen::Index>(targets.size()) != X.rows())
    throw ShapeError("cross_entropy: one target per row required");
  const Eigen::Index rows = X.rows();
  const Eigen::Index classes = X.cols();
  // Target distribution q: (1 - smoothing) on the label plus smoothing / classes everywhere.
  Matrix q = Matrix::Constant(rows, classes, smoothing / static_cast<double>(classes));
  for (Eigen::Index r = 0; r < rows; ++r) {
    const TokenId y = targets[static_cast<std::size_t>(r)];
    if (y < 0 || y >= classes)
      throw RangeError("cross_entropy: target " + std::to_string(y) + " outside [0, " +
                       std::to_string(classes) + ")");
    q(r, y) += 1.0 - smoothing;
  }
  const Eigen::VectorXd lse = row_lse(X);
  const Matrix logp = X.colwise() - lse;
  const double loss = -(q.array() * logp.array()).sum() / static_cast<double>(rows);
  Matrix p = logp.array().exp().matrix();
  Matrix out(1, 1);
  out(0, 0) = loss;
  return tape.push(std::move(out), {logits}, [logits, p, q, rows](Tape& t, const Matrix& g) {
    t.accumulate_expr(logits, (p - q) * (g(0, 0) / static_cast<double>(rows)));
  });
}

Var mse(Tape& tape, Var a, Var b) {
  require_same_shape(tape.value(a), tape.value(b), "mse");
  Matrix diff = tape.value(a) - tape.value(b);
  const double n = static_cast<double>(diff.size());
  Matrix out(1, 1);
  out(0, 0) = diff.squaredNorm() / n;
  return tape.push(std::move(out), {a, b}, [a, b, diff, n](Tape& t, const Matrix& g) {
    const double k = 2.0 * g(0, 0) / n;
    if (t.requires_grad(a)) t.accumulate_expr(a, diff * k);
    if (t.requires_grad(b)) t.accumulate_expr(b, diff * -k);
  });
}

Var add_scaled(Tape& tape, Var a, Var b, double wb) {
  require_same_shape(tape.value(a), tape.value(b), "add_scaled");
  return tape.push(tape.value(a) + wb * tape.value(b), {a, b}, [a, b, wb](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    if (t.requires_grad(b)) t.accumulate_expr(b, g * wb);
  });
}

}  // namespace textdiff::ad
