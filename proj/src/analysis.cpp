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

#include "textdiff/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "textdiff/bleu.hpp"
#include "textdiff/diffusion.hpp"
#include "textdiff/errors.hpp"
#include "textdiff/parallel.hpp"
#include "textdiff/rng.hpp"
#include "textdiff/sampler.hpp"
#include "textdiff/stats.hpp"

namespace textdiff {

namespace {

double rms(const Matrix& m) {
  return m.size() == 0 ? 0.0 : std::sqrt(m.squaredNorm() / static_cast<double>(m.size()));
}

Dataset take(const Dataset& data, std::size_t max_examples) {
  if (max_examples == 0 || max_examples >= data.size()) return data;
  return Dataset(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(max_examples));
}

int checked_length(const DenoiserModel& model, const ParallelExample& ex) {
  const int len = static_cast<int>(ex.target.size());
  if (len < 1 || len > model.max_length())
    throw RangeError("analysis: target length " + std::to_string(len) + " outside [1, " +
                     std::to_string(model.max_length()) + "]");
  return len;
}

std::uint64_t example_seed(std::uint64_t seed, std::size_t index) {
  return RngStreams(seed).derive("analysis", index, 0);
}

struct ReusedWalk {
  EncodedSource src;
  GenerationResult result;
};

ReusedWalk reused_walk(const DenoiserModel& model, const ParallelExample& ex,
                       const NoiseSchedule& sched, const AnalysisOptions& opts, std::size_t index) {
  GenerationConfig g;
  g.nfe = opts.nfe;
  g.sc_mode = ScMode::kReused;
  g.t_floor = opts.t_floor;
  ReusedWalk w{model.encode(ex.source), {}};
  w.result = generate(model, w.src, checked_length(model, ex), g, sched, example_seed(opts.seed, index));
  return w;
}

}  // namespace

ResidualStats fit_residual_stats(std::span<const ResidualPair> pairs) {
  if (pairs.empty()) throw DomainError("fit_residual_stats: no pairs");
  const Eigen::Index h = pairs.front().matched.cols();
  std::size_t count = 0;
  for (const auto& p : pairs) {
    if (p.reused.rows() != p.matched.rows() || p.reused.cols() != h || p.matched.cols() != h)
      throw ShapeError("fit_residual_stats: pair shapes disagree");
    count += static_cast<std::size_t>(p.matched.rows());
  }
  if (count < 2) throw DomainError("fit_residual_stats: need at least 2 samples per dimension");
  Eigen::VectorXd num = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd den = Eigen::VectorXd::Zero(h);
  for (const auto& p : pairs) {
    num += p.reused.cwiseProduct(p.matched).colwise().sum().transpose();
    den += p.matched.cwiseAbs2().colwise().sum().transpose();
  }
  ResidualStats st;
  st.samples = count;
  st.mu.resize(h);
  for (Eigen::Index i = 0; i < h; ++i) {
    if (!(den(i) > 0.0))
      throw NumericError("fit_residual_stats: degenerate dimension " + std::to_string(i) +
                         " (matched values all zero)");
    st.mu(i) = num(i) / den(i);
  }
  Eigen::VectorXd ss = Eigen::VectorXd::Zero(h);
  for (const auto& p : pairs) {
    const Matrix r = p.reused - p.matched * st.mu.asDiagonal();
    ss += r.cwiseAbs2().colwise().sum().transpose();
  }
  st.sigma = (ss / static_cast<double>(count)).cwiseSqrt();
  if (!st.mu.allFinite() || !st.sigma.allFinite())
    throw NumericError("fit_residual_stats: non-finite statistics");
  return st;
}

std::vector<double> standardized_residuals(std::span<const ResidualPair> pairs,
                                           const ResidualStats& stats, Eigen::Index dim) {
  if (dim < 0 || dim >= stats.mu.size()) throw RangeError("standardized_residuals: bad dimension");
  if (!(stats.sigma(dim) > 0.0))
    throw NumericError("standardized_residuals: zero residual spread in dimension " +
                       std::to_string(dim));
  std::vector<double> out;
  out.reserve(stats.samples);
  for (const auto& p : pairs)
    for (Eigen::Index r = 0; r < p.matched.rows(); ++r)
      out.push_back((p.reused(r, dim) - stats.mu(dim) * p.matched(r, dim)) / stats.sigma(dim));
  return out;
}

EmpiricalLeakage empirical_lambda_gamma(const ResidualStats& stats, double s, const NoiseSchedule& sched) {
  const auto [alpha, sigma] = sched.alpha_sigma(s);
  EmpiricalLeakage out{Eigen::VectorXd(stats.mu.size()), Eigen::VectorXd(stats.mu.size())};
  for (Eigen::Index i = 0; i < stats.mu.size(); ++i) {
    if (stats.mu(i) == 0.0)
      throw NumericError("empirical_lambda_gamma: zero slope in dimension " + std::to_string(i));
    out.lambda(i) = 1.0 / stats.mu(i);
    out.gamma(i) = (alpha / sigma) * (stats.sigma(i) / stats.mu(i));
  }
  return out;
}

GapReport estimation_gap(const DenoiserModel& model, const Dataset& data, const NoiseSchedule& sched,
                         const AnalysisOptions& opts) {
  if (opts.nfe < 3)
    throw DomainError("estimation_gap: nfe must be >= 3 so that an interior step has both a "
                      "reused condition from two steps back and a successor step");
  const Dataset set = take(data, opts.max_examples);
  if (set.empty()) throw DomainError("estimation_gap: empty dataset");
  GapReport rep;
  rep.nfe = opts.nfe;
  const auto grid = time_grid(opts.nfe, opts.t_floor);
  for (int k = 2; k < opts.nfe; ++k) {
    rep.steps.push_back(k);
    rep.step_times.push_back(grid[static_cast<std::size_t>(k)]);
  }
  rep.per_example.assign(set.size(), std::vector<double>(rep.steps.size(), 0.0));
  parallel_for(set.size(), [&](std::size_t e) {
    const ReusedWalk w = reused_walk(model, set[e], sched, opts, e);
    const auto& steps = w.result.trajectory.steps;
    for (std::size_t j = 0; j < rep.steps.size(); ++j) {
      const auto& st = steps[static_cast<std::size_t>(rep.steps[j])];
      const TimeVec tv = constant_times(st.z.rows(), st.t);
      const LatentSeq matched = model.denoise(w.src, st.z, tv, nullptr);
      const LatentSeq corrected = model.denoise(w.src, st.z, tv, &matched);
      rep.per_example[e][j] = rms(st.prediction - corrected);
    }
  });
  rep.step_means.assign(rep.steps.size(), 0.0);
  for (const auto& row : rep.per_example)
    for (std::size_t j = 0; j < row.size(); ++j) rep.step_means[j] += row[j];
  for (double& m : rep.step_means) m /= static_cast<double>(set.size());
  rep.sup = *std::max_element(rep.step_means.begin(), rep.step_means.end());
  return rep;
}

double bootstrap_sup_stderr(const GapReport& report, int rounds, std::uint64_t seed) {
  const std::size_t n = report.per_example.size();
  if (n == 0 || rounds < 2) throw DomainError("bootstrap_sup_stderr: need examples and >= 2 rounds");
  const std::size_t steps = report.step_means.size();
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<double> sups(static_cast<std::size_t>(rounds));
  std::vector<double> means(steps);
  for (auto& sup : sups) {
    std::fill(means.begin(), means.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& row = report.per_example[pick(rng)];
      for (std::size_t j = 0; j < steps; ++j) means[j] += row[j];
    }
    sup = *std::max_element(means.begin(), means.end()) / static_cast<double>(n);
  }
  const double mean = std::accumulate(sups.begin(), sups.end(), 0.0) / rounds;
  double var = 0.0;
  for (double s : sups) var += (s - mean) * (s - mean);
  return std::sqrt(var / (rounds - 1));
}

ScBleuComparison sc_bleu_compare(const DenoiserModel& model, const Dataset& data,
                                 const NoiseSchedule& sched, const AnalysisOptions& opts) {
  const Dataset set = take(data, opts.max_examples);
  if (set.empty()) throw DomainError("sc_bleu_compare: empty dataset");
  std::vector<double> reused(set.size()), corrected(set.size());
  parallel_for(set.size(), [&](std::size_t e) {
    const EncodedSource src = model.encode(set[e].source);
    const int len = checked_length(model, set[e]);
    const std::uint64_t seed = example_seed(opts.seed, e);
    GenerationConfig g;
    g.nfe = opts.nfe;
    g.t_floor = opts.t_floor;
    g.sc_mode = ScMode::kReused;
    reused[e] = sentence_bleu(generate(model, src, len, g, sched, seed).tokens, set[e].target);
    g.sc_mode = ScMode::kCorrected;
    corrected[e] = sentence_bleu(generate(model, src, len, g, sched, seed).tokens, set[e].target);
  });
  const double n = static_cast<double>(set.size());
  return {std::accumulate(reused.begin(), reused.end(), 0.0) / n,
          std::accumulate(corrected.begin(), corrected.end(), 0.0) / n};
}

std::vector<ResidualRow> residual_analysis(const DenoiserModel& model, const Dataset& data,
                                           const NoiseSchedule& sched, const AnalysisOptions& opts,
                                           int sw_samples) {
  if (opts.nfe < 2) throw DomainError("residual_analysis: nfe must be >= 2");
  if (sw_samples < 3) throw DomainError("residual_analysis: need >= 3 Shapiro-Wilk samples");
  const Dataset set = take(data, opts.max_examples);
  if (set.empty()) throw DomainError("residual_analysis: empty dataset");
  const std::size_t steps = static_cast<std::size_t>(opts.nfe) - 1;
  // pairs[e][k - 1] for steps k = 1 .. nfe - 1
  std::vector<std::vector<ResidualPair>> pairs(set.size());
  parallel_for(set.size(), [&](std::size_t e) {
    const ReusedWalk w = reused_walk(model, set[e], sched, opts, e);
    const auto& tr = w.result.trajectory.steps;
    pairs[e].reserve(steps);
    for (std::size_t k = 1; k < tr.size(); ++k) {
      const TimeVec tv = constant_times(tr[k].z.rows(), tr[k].t);
      pairs[e].push_back({tr[k - 1].prediction, model.denoise(w.src, tr[k].z, tv, nullptr)});
    }
  });
  const auto grid = time_grid(opts.nfe, opts.t_floor);
  std::vector<ResidualRow> rows;
  Rng rng(RngStreams(opts.seed).derive("residual-sw", 0, 0));
  for (std::size_t k = 1; k <= steps; ++k) {
    std::vector<ResidualPair> at_step;
    at_step.reserve(set.size());
    for (auto& per : pairs) at_step.push_back(per[k - 1]);
    const double t = grid[k];
    const ResidualStats st = fit_residual_stats(at_step);
    const EmpiricalLeakage lg = empirical_lambda_gamma(st, t, sched);
    for (Eigen::Index d = 0; d < st.mu.size(); ++d) {
      ResidualRow row{static_cast<int>(k), t, static_cast<int>(d), st.mu(d), st.sigma(d),
                      lg.lambda(d), lg.gamma(d), std::numeric_limits<double>::quiet_NaN(),
                      std::numeric_limits<double>::quiet_NaN()};
      if (st.sigma(d) > 0.0) {
        std::vector<double> res = standardized_residuals(at_step, st, d);
        std::shuffle(res.begin(), res.end(), rng);
        res.resize(std::min(res.size(), static_cast<std::size_t>(sw_samples)));
        if (res.size() >= 3) {
          try {
            const auto sw = shapiro_wilk(res);
            row.w = sw.w;
            row.p = sw.p;
          } catch (const NumericError&) {
          }
        }
      }
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace textdiff
