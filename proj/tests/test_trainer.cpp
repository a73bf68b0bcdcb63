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

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "support.hpp"
#include "textdiff/data_io.hpp"
#include "textdiff/diffusion.hpp"
#include "textdiff/errors.hpp"
#include "textdiff/trainer.hpp"

using namespace textdiff;

namespace {

const NoiseSchedule kSqrt = NoiseSchedule::make(NoiseKind::kSqrt);

ExampleDraws fixed_draws(Eigen::Index length, int latent, bool sc, std::uint64_t seed) {
  ExampleDraws d;
  d.t.resize(static_cast<std::size_t>(length));
  for (std::size_t l = 0; l < d.t.size(); ++l) d.t[l] = 0.2 + 0.1 * static_cast<double>(l);
  d.noise = testing::fixture_matrix(length, latent, seed);
  d.self_condition = sc;
  return d;
}

// Loss with the self-condition input frozen to a given matrix, written
// directly against the graph API.
double frozen_sc_loss(const TransformerDenoiser& m, const ParallelExample& ex, const ExampleDraws& d,
                      const LatentSeq& sc, const LossOptions& o, Gradients* grads) {
  ad::Tape tape;
  TransformerDenoiser::Graph g(m, tape, grads != nullptr);
  const auto enc = g.encode(ex.source);
  const ad::Var z0 = ad::gather_rows(tape, g.codebook(), ex.target);
  const auto coef = scp_coefficients(d.t, kSqrt, ScpSchedule{});
  Matrix nt = d.noise;
  for (Eigen::Index l = 0; l < nt.rows(); ++l) nt.row(l) *= coef.noise[static_cast<std::size_t>(l)];
  const ad::Var zp = ad::add_const(tape, ad::scale_rows(tape, z0, coef.signal), nt);
  const ad::Var out = g.denoise(enc, zp, d.t, tape.constant(sc));
  const ad::Var l1 = ad::mse(tape, out, z0);
  const ad::Var l2 = ad::cross_entropy(tape, ad::neg_sq_dist(tape, z0, g.codebook()), ex.target);
  const TokenId cls = static_cast<TokenId>(ex.target.size() - 1);
  const ad::Var l3 = ad::cross_entropy(tape, g.length_logits(enc), std::span(&cls, 1), o.label_smoothing);
  const ad::Var total = ad::add_scaled(tape, ad::add(tape, l1, l2), l3, o.length_weight);
  if (grads) {
    tape.backward(total);
    g.add_gradients(*grads);
  }
  return tape.value(total).value();
}

}  // namespace

TEST_CASE("diffusion loss") {
  const LatentSeq a = testing::fixture_matrix(3, 4, 1);
  CHECK(diffusion_loss(a, a) == 0.0);
  CHECK(diffusion_loss(a.array() + 1.0, a) == doctest::Approx(1.0).epsilon(1e-14));
  const LatentSeq b = testing::fixture_matrix(3, 4, 2);
  double naive = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) naive += (a(i, j) - b(i, j)) * (a(i, j) - b(i, j));
  CHECK(std::abs(diffusion_loss(a, b) - naive / 12.0) < 1e-12);
  CHECK_THROWS_AS(diffusion_loss(a, testing::fixture_matrix(2, 4, 3)), ShapeError);
}

TEST_CASE("rounding loss") {
  Matrix e = Matrix::Zero(5, 5);
  for (int i = 0; i < 5; ++i) e(i, i) = 5.0;
  const TokenSeq x{1, 3, 4};
  CHECK(rounding_loss(embed(x, e), x, e) < 1e-3);
  const Matrix flat = Matrix::Constant(7, 3, 0.5);
  CHECK(rounding_loss(embed({2, 5}, flat), {2, 5}, flat) == doctest::Approx(std::log(7.0)).epsilon(1e-12));
  const Matrix cb = testing::fixture_matrix(6, 3, 4);
  const LatentSeq z = testing::fixture_matrix(4, 3, 5);
  const TokenSeq y{0, 5, 2, 2};
  double brute = 0.0;
  for (int l = 0; l < 4; ++l) {
    double mx = -1e300;
    std::vector<double> s(6);
    for (int m = 0; m < 6; ++m) mx = std::max(mx, s[m] = -(z.row(l) - cb.row(m)).squaredNorm());
    double sum = 0.0;
    for (double v : s) sum += std::exp(v - mx);
    brute += mx + std::log(sum) - s[y[l]];
  }
  CHECK(std::abs(rounding_loss(z, y, cb) - brute / 4.0) < 1e-10);
}

TEST_CASE("gradient clipping") {
  Gradients g{testing::fixture_matrix(3, 3, 1) * 10.0, testing::fixture_matrix(1, 4, 2) * 10.0};
  const double before = clip_global_norm(g, 1.0);
  CHECK(before > 1.0);
  CHECK(global_norm(g) <= 1.0 + 1e-9);
  Gradients small{Matrix::Constant(1, 1, 0.5)};
  CHECK(clip_global_norm(small, 1.0) == 0.5);
  CHECK(small[0](0, 0) == 0.5);
}

TEST_CASE("example loss gradients match central differences") {
  const TokenSeq src{4, 7, 5};
  const TokenSeq tgt{6, 9, 4, 8};
  const ParallelExample ex{src, tgt};
  const LossOptions opts;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    TransformerDenoiser m(testing::tiny_config(), seed);
    const ExampleDraws d = fixed_draws(4, 4, false, 10 + seed);
    Gradients analytic = zero_gradients(m.params());
    example_loss(m, ex, d, opts, kSqrt, ScpSchedule{}, &analytic);
    double worst = 0.0;
    auto& entries = m.params().entries();
    for (std::size_t k = 0; k < entries.size(); ++k) {
      Matrix& w = entries[k].value;
      for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double keep = w.data()[i];
        const double h = 1e-5;
        w.data()[i] = keep + h;
        const double up = example_loss(m, ex, d, opts, kSqrt, ScpSchedule{}, nullptr).total;
        w.data()[i] = keep - h;
        const double down = example_loss(m, ex, d, opts, kSqrt, ScpSchedule{}, nullptr).total;
        w.data()[i] = keep;
        const double num = (up - down) / (2 * h);
        const double a = analytic[k].data()[i];
        worst = std::max(worst, std::abs(a - num) / std::max({std::abs(a), std::abs(num), 1e-6}));
      }
    }
    CAPTURE(seed);
    CHECK(worst < 1e-3);
  }
}

TEST_CASE("self-conditioned branch treats the condition as a constant") {
  const ParallelExample ex{{4, 6}, {7, 5, 9}};
  const TransformerDenoiser m(testing::tiny_config(), 4);
  const ExampleDraws d = fixed_draws(3, 4, true, 20);
  const LossOptions opts;
  Gradients full = zero_gradients(m.params());
  const double loss = example_loss(m, ex, d, opts, kSqrt, ScpSchedule{}, &full).total;

  // The condition the loss saw: a zero-conditioned first pass.
  const auto coef = scp_coefficients(d.t, kSqrt, ScpSchedule{});
  LatentSeq zp = embed(ex.target, m.codebook());
  for (Eigen::Index l = 0; l < 3; ++l)
    zp.row(l) = coef.signal[static_cast<std::size_t>(l)] * zp.row(l) + coef.noise[static_cast<std::size_t>(l)] * d.noise.row(l);
  const LatentSeq first = m.denoise(m.encode(ex.source), zp, d.t, nullptr);

  Gradients frozen = zero_gradients(m.params());
  CHECK(frozen_sc_loss(m, ex, d, first, opts, &frozen) == doctest::Approx(loss).epsilon(1e-12));
  for (std::size_t k = 0; k < full.size(); ++k) CHECK((full[k] - frozen[k]).cwiseAbs().maxCoeff() < 1e-12);

  // Probe: the first pass receives no gradient.
  ad::Tape tape;
  TransformerDenoiser::Graph g(m, tape, true);
  const auto enc = g.encode(ex.source);
  const ad::Var z = tape.constant(zp);
  const ad::Var f = g.denoise(enc, z, d.t, tape.constant(LatentSeq::Zero(3, 4)));
  const ad::Var out = g.denoise(enc, z, d.t, ad::stop_gradient(tape, f));
  tape.backward(ad::mse(tape, out, tape.constant(embed(ex.target, m.codebook()))));
  CHECK((tape.grad(f).size() == 0 || tape.grad(f).cwiseAbs().maxCoeff() <= 1e-12));
}

namespace {

TrainConfig small_train_config() {
  TrainConfig c;
  c.batch_size = 4;
  c.iterations = 6;
  c.seed = 9;
  c.validation_interval = 3;
  c.log_interval = 1;
  c.validation_examples = 4;
  c.mans.milestones = {3, 5, 100};
  c.mans.scalings = {2.0, 3.0, 4.0};
  return c;
}

Dataset tiny_data(std::uint64_t seed) {
  SynthTaskSpec s;
  s.vocab_size = 10;
  s.max_len = 5;
  s.count = 40;
  s.seed = seed;
  return generate_synth(s);
}

}  // namespace

TEST_CASE("training is deterministic and reports phase changes") {
  const Dataset data = tiny_data(1);
  Trainer a(testing::tiny_config(), small_train_config(), kSqrt);
  Trainer b(testing::tiny_config(), small_train_config(), kSqrt);
  const auto ra = a.run(data, data);
  const auto rb = b.run(data, data);
  REQUIRE(ra.log.size() == 6);
  for (std::size_t i = 0; i < ra.log.size(); ++i) {
    CHECK(ra.log[i].l_total == rb.log[i].l_total);
    CHECK(ra.log[i].grad_norm == rb.log[i].grad_norm);
    CHECK(std::isfinite(ra.log[i].l_total));
    CHECK(ra.log[i].l_diff >= 0.0);
    CHECK(ra.log[i].l_round >= 0.0);
  }
  CHECK(ra.log[1].mans_beta == 2.0);
  CHECK(ra.log[2].mans_beta == 3.0);
  CHECK(ra.log[4].mans_beta == 4.0);
  CHECK(ra.validations.size() == 2);
  CHECK(a.model().params().get("dec.out.w") == b.model().params().get("dec.out.w"));
}

TEST_CASE("training results do not depend on the worker count") {
  const Dataset data = tiny_data(2);
  Trainer a(testing::tiny_config(), small_train_config(), kSqrt);
  a.run(data, {});
  setenv("TEXTDIFF_THREADS", "3", 1);
  Trainer b(testing::tiny_config(), small_train_config(), kSqrt);
  b.run(data, {});
  unsetenv("TEXTDIFF_THREADS");
  CHECK(a.model().params().get("codebook") == b.model().params().get("codebook"));
}

TEST_CASE("sc_prob extremes") {
  const Dataset data = tiny_data(3);
  TrainConfig never = small_train_config();
  never.sc_prob = 0.0;
  TrainConfig always = small_train_config();
  always.sc_prob = 1.0;
  Trainer a(testing::tiny_config(), never, kSqrt), b(testing::tiny_config(), always, kSqrt);
  for (const auto& m : a.run(data, {}).log) CHECK(!m.self_conditioned);
  for (const auto& m : b.run(data, {}).log) CHECK(m.self_conditioned);
}

TEST_CASE("resume reproduces an uninterrupted run exactly") {
  const Dataset data = tiny_data(4);
  TrainConfig full = small_train_config();
  Trainer straight(testing::tiny_config(), full, kSqrt);
  const auto log = straight.run(data, {}).log;

  TrainConfig half = full;
  half.iterations = 3;
  Trainer first(testing::tiny_config(), half, kSqrt);
  first.run(data, {});
  const auto path = std::filesystem::temp_directory_path() / "textdiff_resume.ckpt";
  save_checkpoint(first.to_checkpoint(nlohmann::json::object(), {}), path);

  Trainer second(testing::tiny_config(), full, kSqrt);
  second.restore(load_checkpoint(path));
  CHECK(second.iteration() == 3);
  const auto tail = second.run(data, {}).log;
  REQUIRE(tail.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(tail[i].iter == log[i + 3].iter);
    CHECK(tail[i].l_total == log[i + 3].l_total);
  }
  for (const auto& e : straight.model().params().entries())
    CHECK(e.value == second.model().params().get(e.name));
}

TEST_CASE("zero iterations leave the model untouched") {
  TrainConfig c = small_train_config();
  c.iterations = 0;
  Trainer t(testing::tiny_config(), c, kSqrt);
  const Matrix before = t.model().params().get("codebook");
  const auto r = t.run(tiny_data(5), {});
  CHECK(r.log.empty());
  CHECK(t.model().params().get("codebook") == before);
}

TEST_CASE("metrics JSONL carries the fixed field names") {
  TrainMetrics m;
  m.iter = 7;
  std::ostringstream out;
  write_metrics_jsonl(out, m);
  const auto j = nlohmann::json::parse(out.str());
  for (const char* k : {"iter", "l_diff", "l_round", "l_total", "lr", "mans_frac", "wall_ms"}) CHECK(j.contains(k));
  CHECK(j["iter"] == 7);
}

TEST_CASE("config validation") {
  TrainConfig c;
  c.sc_prob = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}
