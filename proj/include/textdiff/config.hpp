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

#include <filesystem>
#include <string>

#include "json.hpp"

#include "textdiff/data_io.hpp"
#include "textdiff/denoiser.hpp"
#include "textdiff/sampler.hpp"
#include "textdiff/schedules.hpp"
#include "textdiff/trainer.hpp"
#include "textdiff/vocab_embed.hpp"

namespace textdiff {

enum class TaskType { kSynth, kTsv };

struct TaskConfig {
  TaskType type = TaskType::kSynth;
  SynthTaskSpec synth;
  // tsv: paths are resolved relative to the config file. Without a valid
  // path the train file is split 90/5/5.
  std::filesystem::path train;
  std::filesystem::path valid;
  int min_freq = 1;
  TokenizeMode tokenize = TokenizeMode::kWhitespace;
};

struct PathsConfig {
  std::filesystem::path out_dir = "run";
};

// Everything a run needs, parsed strictly from JSON:
//   { "task": {...}, "model": {...}, "schedules": {"noise", "scp", "mans", "lr"},
//     "training": {...}, "generation": {...}, "paths": {...} }
// Every key is optional; unknown keys are rejected.
struct RunConfig {
  TaskConfig task;
  DenoiserConfig model;
  NoiseSchedule noise;
  TrainConfig training;
  GenerationConfig generation;
  PathsConfig paths;

  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
};

// Relative paths inside the file are resolved against its directory.
RunConfig load_run_config(const std::filesystem::path& path);

struct TaskData {
  Dataset train;
  Dataset valid;
  Dataset test;
  Vocabulary vocab;
};

// Materializes the task block and sets model.vocab to the vocabulary size.
TaskData load_task_data(RunConfig& cfg);

}  // namespace textdiff
