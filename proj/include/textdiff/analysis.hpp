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
#include <span>
#include <utility>
#include <vector>

#include "textdiff/data_io.hpp"
#include "textdiff/denoiser.hpp"
#include "textdiff/schedules.hpp"
#include "textdiff/types.hpp"

namespace textdiff {

// A reused self-condition estimate and the step-matched estimate it stands
// in for, both L x H.
struct ResidualPair {
  LatentSeq reused;
  LatentSeq matched;
};

struct ResidualStats {
  Eigen::VectorXd mu;
  Eigen::VectorXd sigma;
  std::size_t samples = 0;  // per dimension
};

// Per-dimension regression through the origin of reused on matched values.
ResidualStats fit_residual_stats(std::span<const ResidualPair> pairs);

// (reused - mu * matched) / sigma for one dimension, in pair/row order.
std::vector<double> standardized_residuals(std::span<const ResidualPair> pairs,
                                           const ResidualStats& stats, Eigen::Index dim);

struct EmpiricalLeakage {
  Eigen::VectorXd lambda;
  Eigen::VectorXd gamma;
};

EmpiricalLeakage empirical_lambda_gamma(const ResidualStats& stats, double s, const NoiseSchedule& sched);

struct AnalysisOptions {
  int nfe = 5;
  std::uint64_t seed = 0;
  double t_floor = 1e-3;
  std::size_t max_examples = 0;  // 0: all
};

struct GapReport {
  int nfe = 0;
  std::vector<int> steps;           // trajectory indices, 0 at t = 1
  std::vector<double> step_times;
  std::vector<double> step_means;   // mean over examples of the RMS gap
  double sup = 0.0;
  std::vector<std::vector<double>> per_example;  // [example][step]
};

GapReport estimation_gap(const DenoiserModel& model, const Dataset& data, const NoiseSchedule& sched,
                         const AnalysisOptions& opts);

// Sup over steps of step means recomputed on `rounds` resamples of examples.
double bootstrap_sup_stderr(const GapReport& report, int rounds, std::uint64_t seed);

struct ScBleuComparison {
  double bleu_reused = 0.0;
  double bleu_corrected = 0.0;
};

// Corpus-mean sentence BLEU in [0, 1]; both modes share every noise seed and
// decode at the reference length.
ScBleuComparison sc_bleu_compare(const DenoiserModel& model, const Dataset& data,
                                 const NoiseSchedule& sched, const AnalysisOptions& opts);

struct ResidualRow {
  int step = 0;
  double t = 0.0;
  int dim = 0;
  double mu = 0.0;
  double sigma = 0.0;
  double lambda = 0.0;
  double gamma = 0.0;
  double w = 0.0;
  double p = 0.0;
};

// One row per (step, dimension) for every step >= 1 of reused-mode
// trajectories. W and p come from `sw_samples` randomly chosen standardized
// residuals of that dimension and are NaN when the residuals are degenerate.
std::vector<ResidualRow> residual_analysis(const DenoiserModel& model, const Dataset& data,
                                           const NoiseSchedule& sched, const AnalysisOptions& opts,
                                           int sw_samples = 50);

}  // namespace textdiff
