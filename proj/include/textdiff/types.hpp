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
#include <vector>

#include <Eigen/Dense>

namespace textdiff {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

using TokenId = std::int32_t;
using TokenSeq = std::vector<TokenId>;

// L x H embedding-space state (clean z0, noised z_t, perturbed z'_t or a
// denoiser prediction).
using LatentSeq = Matrix;

// Per-token diffusion times, one entry per sequence position.
using TimeVec = std::vector<double>;

}  // namespace textdiff
