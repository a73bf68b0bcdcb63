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

#include "textdiff/diffusion.hpp"

#include <cmath>
#include <string>

#include "textdiff/errors.hpp"

namespace textdiff {

namespace {

void check_rows(const Matrix& m, std::size_t n, const char* what) {
  if (static_cast<std::size_t>(m.rows()) != n)
    throw ShapeError(std::string(what) + ": expected " + std::to_string(n) + " rows, got " +
                     std::to_string(m.rows()));
}

void check_same(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError(std::string(what) + ": latent shapes disagree");
}

}  // namespace

TimeVec constant_times(Eigen::Index length, double t) {
  return TimeVec(static_cast<std::size_t>(length), t);
}

LatentSeq forward_sample(const LatentSeq& z0, std::span<const double> alphas,
                         std::span<const double> sigmas, const Matrix& noise) {
  check_same(z0, noise, "forward_sample");
  check_rows(z0, alphas.size(), "forward_sample alphas");
  check_rows(z0, sigmas.size(), "forward_sample sigmas");
  LatentSeq out(z0.rows(), z0.cols());
  for (Eigen::Index l = 0; l < z0.rows(); ++l) {
    const auto i = static_cast<std::size_t>(l);
    out.row(l) = alphas[i] * z0.row(l) + sigmas[i] * noise.row(l);
  }
  return out;
}

LatentSeq forward_sample(const LatentSeq& z0, const TimeVec& t, const Matrix& noise,
                         const NoiseSchedule& sched) {
  check_rows(z0, t.size(), "forward_sample times");
  std::vector<double> a(t.size()), s(t.size());
  for (std::size_t l = 0; l < t.size(); ++l) {
    const auto as = sched.alpha_sigma(t[l]);
    a[l] = as.alpha;
    s[l] = as.sigma;
  }
  return forward_sample(z0, a, s, noise);
}

ForwardCoefficients scp_coefficients(const TimeVec& t, const NoiseSchedule& sched,
                                     const ScpSchedule& scp) {
  ForwardCoefficients c;
  c.signal.resize(t.size());
  c.noise.resize(t.size());
  for (std::size_t l = 0; l < t.size(); ++l) {
    const auto [alpha, sigma] = sched.alpha_sigma(t[l]);
    const auto [lambda, gamma] = scp_lambda_gamma(scp, t[l]);
    c.signal[l] = alpha * lambda;
    c.noise[l] = sigma * std::sqrt(1.0 + gamma * gamma);
  }
  return c;
}

LatentSeq scp_forward_sample(const LatentSeq& z0, const TimeVec& t, const Matrix& noise,
                             const NoiseSchedule& sched, const ScpSchedule& scp) {
  check_rows(z0, t.size(), "scp_forward_sample times");
  const auto c = scp_coefficients(t, sched, scp);
  return forward_sample(z0, c.signal, c.noise, noise);
}

PosteriorParams posterior_params(const LatentSeq& z_t, const LatentSeq& z0_hat, const TimeVec& s,
                                 const TimeVec& t, const NoiseSchedule& sched) {
  check_same(z_t, z0_hat, "posterior_params");
  check_rows(z_t, s.size(), "posterior_params s");
  check_rows(z_t, t.size(), "posterior_params t");
  PosteriorParams post{LatentSeq(z_t.rows(), z_t.cols()), std::vector<double>(t.size())};
  for (std::size_t l = 0; l < t.size(); ++l) {
    const double trans = sched.sigma_t_given_s(s[l], t[l]);  // throws on s >= t
    const auto [alpha_s, sigma_s] = sched.alpha_sigma(s[l]);
    const auto [alpha_t, sigma_t] = sched.alpha_sigma(t[l]);
    const double var_t = sigma_t * sigma_t;
    const double coef_zt = (alpha_t / alpha_s) * (sigma_s * sigma_s / var_t);
    const double coef_z0 = alpha_s * (trans * trans / var_t);
    const auto row = static_cast<Eigen::Index>(l);
    post.mean.row(row) = coef_zt * z_t.row(row) + coef_z0 * z0_hat.row(row);
    post.std[l] = (sigma_s / sigma_t) * trans;
  }
  return post;
}

PosteriorParams posterior_params(const LatentSeq& z_t, const LatentSeq& z0_hat, double s, double t,
                                 const NoiseSchedule& sched) {
  return posterior_params(z_t, z0_hat, constant_times(z_t.rows(), s), constant_times(z_t.rows(), t),
                          sched);
}

LatentSeq reverse_step(const LatentSeq& z_t, const LatentSeq& z0_hat, const TimeVec& s,
                       const TimeVec& t, const Matrix& noise, const NoiseSchedule& sched) {
  check_same(z_t, noise, "reverse_step");
  auto post = posterior_params(z_t, z0_hat, s, t, sched);
  for (Eigen::Index l = 0; l < z_t.rows(); ++l) {
    const double sd = post.std[static_cast<std::size_t>(l)];
    if (sd != 0.0) post.mean.row(l) += sd * noise.row(l);
  }
  return std::move(post.mean);
}

LatentSeq reverse_step(const LatentSeq& z_t, const LatentSeq& z0_hat, double s, double t,
                       const Matrix& noise, const NoiseSchedule& sched) {
  return reverse_step(z_t, z0_hat, constant_times(z_t.rows(), s), constant_times(z_t.rows(), t),
                      noise, sched);
}

}  // namespace textdiff
