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

#include "textdiff/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "textdiff/errors.hpp"

namespace textdiff {

namespace {

template <std::size_t N>
double poly(const std::array<double, N>& c, double x) {
  double r = 0.0;
  for (std::size_t i = N; i-- > 0;) r = r * x + c[i];
  return r;
}

constexpr std::array<double, 6> kC1{0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056};
constexpr std::array<double, 6> kC2{0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
constexpr std::array<double, 4> kC3{0.544, -0.39978, 0.025054, -6.714e-4};
constexpr std::array<double, 4> kC4{1.3822, -0.77857, 0.062767, -0.0020322};
constexpr std::array<double, 4> kC5{-1.5861, -0.31082, -0.083751, 0.0038915};
constexpr std::array<double, 3> kC6{-0.4803, -0.082676, 0.0030302};
constexpr std::array<double, 2> kG{-2.273, 0.459};

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

ShapiroWilkResult shapiro_wilk(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 3 || n > 5000)
    throw DomainError("shapiro_wilk: sample size " + std::to_string(n) + " outside [3, 5000]");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double ssq = 0.0;
  for (double v : x) ssq += (v - mean) * (v - mean);
  if (!(ssq > 0.0) || x.front() == x.back()) throw NumericError("shapiro_wilk: zero sample variance");

  const std::size_t half = n / 2;
  const double dn = static_cast<double>(n);
  std::vector<double> a(half);
  if (n == 3) {
    a[0] = std::numbers::sqrt2 / 2.0;
  } else {
    std::vector<double> m(half);
    double summ2 = 0.0;
    for (std::size_t i = 0; i < half; ++i) {
      m[i] = normal_quantile((static_cast<double>(i + 1) - 0.375) / (dn + 0.25));
      summ2 += m[i] * m[i];
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(dn);
    const double a1 = poly(kC1, rsn) - m[0] / ssumm2;
    std::size_t first = 1;
    double fac;
    if (n > 5) {
      first = 2;
      const double a2 = -m[1] / ssumm2 + poly(kC2, rsn);
      fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) /
                      (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
      a[1] = a2;
    } else {
      fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
    }
    a[0] = a1;
    for (std::size_t i = first; i < half; ++i) a[i] = -m[i] / fac;
  }

  double num = 0.0;
  for (std::size_t i = 0; i < half; ++i) num += a[i] * (x[n - 1 - i] - x[i]);
  const double w = std::min(1.0, num * num / ssq);

  double p;
  if (n == 3) {
    constexpr double kSixOverPi = 6.0 / std::numbers::pi;
    constexpr double kAsinSqrt34 = std::numbers::pi / 3.0;
    p = std::max(0.0, kSixOverPi * (std::asin(std::sqrt(w)) - kAsinSqrt34));
  } else {
    const double w1 = std::log1p(-w);
    double y, mu, sd;
    if (n <= 11) {
      const double gamma = poly(kG, dn);
      if (w1 >= gamma) return {w, 0.0};
      y = -std::log(gamma - w1);
      mu = poly(kC3, dn);
      sd = std::exp(poly(kC4, dn));
    } else {
      const double ln = std::log(dn);
      y = w1;
      mu = poly(kC5, ln);
      sd = std::exp(poly(kC6, ln));
    }
    p = 1.0 - normal_cdf((y - mu) / sd);
    if (!std::isfinite(y)) p = w >= 1.0 ? 1.0 : 0.0;
  }
  return {w, std::clamp(p, 0.0, 1.0)};
}

}  // namespace textdiff
