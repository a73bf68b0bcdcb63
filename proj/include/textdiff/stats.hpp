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

#include <span>

namespace textdiff {

double normal_cdf(double x);
double normal_quantile(double p);

struct ShapiroWilkResult {
  double w;
  double p;
};

// Shapiro-Wilk normality test for 3 <= n <= 5000 samples using Royston's
// (1995) approximation: coefficients from normal order-statistic scores and
// a normalizing transform of log(1 - W) for the p-value.
ShapiroWilkResult shapiro_wilk(std::span<const double> samples);

}  // namespace textdiff
