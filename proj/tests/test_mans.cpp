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

#include "doctest.h"
#include "support.hpp"
#include "textdiff/diffusion.hpp"
#include "textdiff/errors.hpp"
#include "textdiff/mans.hpp"

using namespace textdiff;

TEST_CASE("confidence mask compares nearest codebook rows") {
  Matrix e = Matrix::Zero(4, 2);
  e << 0, 0, 1, 0, 0, 1, 1, 1;
  const LatentSeq z0 = embed({1, 2, 3}, e);
  LatentSeq zh(3, 2);
  zh << 0.9, 0.1, 0.8, 0.2, 1.1, 0.9;
  CHECK(confidence_mask(z0, zh, e) == ConfidenceMask{true, false, true});
  CHECK_THROWS_AS(confidence_mask(z0, LatentSeq::Zero(2, 2), e), ShapeError);
}

TEST_CASE("rescaling touches only masked tokens and respects the ceiling") {
  const TimeVec t{0.1, 0.2, 0.6, 0.9};
  const ConfidenceMask m{true, false, true, true};
  const TimeVec r = rescale_timesteps(t, m, 2.0, 0.999);
  CHECK(r[0] == doctest::Approx(0.2));
  CHECK(r[1] == 0.2);
  CHECK(r[2] == doctest::Approx(0.999));
  CHECK(r[3] == doctest::Approx(0.999));
  for (std::size_t l = 0; l < t.size(); ++l) {
    CHECK(r[l] >= t[l]);
    CHECK(r[l] <= 0.999 + 1e-15);
  }
  CHECK(rescale_timesteps(t, m, 1.0, 0.999) == t);
  CHECK_THROWS_AS(rescale_timesteps(t, m, 0.5, 0.999), DomainError);
  CHECK_THROWS_AS(rescale_timesteps(t, {true}, 2.0, 0.999), ShapeError);
}

TEST_CASE("apply_mans with a perfect model rescales every token") {
  const Matrix e = testing::fixture_matrix(10, 4, 1);
  const TokenSeq x{4, 5, 6};
  const testing::OracleModel oracle(e, x);
  const LatentSeq z0 = embed(x, e);
  const auto sched = NoiseSchedule::make(NoiseKind::kSqrt);
  MansConfig cfg;
  cfg.apply_prob = 1.0;
  Rng rng(3);
  const auto out = apply_mans(oracle, oracle.encode({4}), z0, constant_times(3, 0.3), cfg, 1, sched, rng);
  CHECK(out.applied);
  CHECK(out.masked == 3);
  CHECK(out.beta == 2.0);
  for (double v : out.t_theta) CHECK(v == doctest::Approx(0.6));
}

TEST_CASE("apply_mans respects the application probability") {
  const Matrix e = testing::fixture_matrix(10, 4, 2);
  const testing::OracleModel oracle(e, {4, 5});
  const auto sched = NoiseSchedule::make(NoiseKind::kSqrt);
  const LatentSeq z0 = embed({4, 5}, e);
  const TimeVec t = constant_times(2, 0.4);
  MansConfig off = MansConfig::disabled();
  Rng rng(4);
  for (int i = 0; i < 20; ++i) {
    const auto o = apply_mans(oracle, oracle.encode({4}), z0, t, off, 1, sched, rng);
    CHECK(!o.applied);
    CHECK(o.t_theta == t);
  }
  MansConfig half;
  int applied = 0;
  for (int i = 0; i < 2000; ++i)
    applied += apply_mans(oracle, oracle.encode({4}), z0, t, half, 1, sched, rng).applied ? 1 : 0;
  CHECK(applied > 900);
  CHECK(applied < 1100);
}

TEST_CASE("a model that is always wrong never triggers rescaling") {
  Matrix e = Matrix::Zero(6, 2);
  for (int i = 0; i < 6; ++i) e(i, 0) = 10.0 * i;
  const testing::OracleModel wrong(e, {5});
  const auto sched = NoiseSchedule::make(NoiseKind::kSqrt);
  MansConfig cfg;
  cfg.apply_prob = 1.0;
  Rng rng(5);
  const auto o = apply_mans(wrong, wrong.encode({4}), embed({1, 2}, e), constant_times(2, 0.3), cfg, 1, sched, rng);
  CHECK(o.applied);
  CHECK(o.masked == 0);
  CHECK(o.t_theta == constant_times(2, 0.3));
}
