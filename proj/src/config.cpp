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

#include "textdiff/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "textdiff/errors.hpp"

namespace textdiff {

namespace {

using nlohmann::json;

// Reads fields of one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected a JSON object");
  }

  template <typename T>
  void get(const char* key, T& dst) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      dst = it->template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  const json* sub(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
  }

  const std::string& where() const { return where_; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

template <typename Fn>
void with_object(ObjectReader& parent, const char* key, Fn&& fn) {
  if (const json* j = parent.sub(key)) {
    ObjectReader r(*j, parent.where() + "." + key);
    fn(r);
    r.finish();
  }
}

template <typename Fn>
auto parse_enum(const std::string& where, const std::string& name, Fn&& fn) {
  try {
    return fn(name);
  } catch (const Error& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

std::string tokenize_name(TokenizeMode m) { return m == TokenizeMode::kCharacter ? "character" : "whitespace"; }

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  ObjectReader root(j, "config");

  with_object(root, "task", [&](ObjectReader& r) {
    std::string type = "synth", kind = std::string(to_string(c.task.synth.kind));
    std::string train, valid, tokenize = "whitespace";
    r.get("type", type);
    r.get("kind", kind);
    r.get("vocab_size", c.task.synth.vocab_size);
    r.get("min_len", c.task.synth.min_len);
    r.get("max_len", c.task.synth.max_len);
    r.get("count", c.task.synth.count);
    r.get("seed", c.task.synth.seed);
    r.get("train", train);
    r.get("valid", valid);
    r.get("min_freq", c.task.min_freq);
    r.get("tokenize", tokenize);
    if (type == "synth") {
      c.task.type = TaskType::kSynth;
    } else if (type == "tsv") {
      c.task.type = TaskType::kTsv;
    } else {
      throw ConfigError("config.task.type: expected 'synth' or 'tsv', got '" + type + "'");
    }
    c.task.synth.kind = parse_enum("config.task.kind", kind, synth_kind_from_string);
    c.task.train = train;
    c.task.valid = valid;
    if (tokenize == "whitespace") {
      c.task.tokenize = TokenizeMode::kWhitespace;
    } else if (tokenize == "character") {
      c.task.tokenize = TokenizeMode::kCharacter;
    } else {
      throw ConfigError("config.task.tokenize: expected 'whitespace' or 'character'");
    }
  });

  with_object(root, "model", [&](ObjectReader& r) {
    r.get("enc_layers", c.model.enc_layers);
    r.get("dec_layers", c.model.dec_layers);
    r.get("width", c.model.width);
    r.get("heads", c.model.heads);
    r.get("ffn", c.model.ffn);
    r.get("latent", c.model.latent);
    r.get("max_len", c.model.max_len);
  });

  with_object(root, "schedules", [&](ObjectReader& s) {
    with_object(s, "noise", [&](ObjectReader& r) {
      std::string kind = std::string(to_string(c.noise.kind));
      r.get("kind", kind);
      c.noise = NoiseSchedule::make(parse_enum("config.schedules.noise.kind", kind, noise_kind_from_string));
      r.get("shift", c.noise.shift);
      r.get("t_floor", c.noise.t_floor);
      r.get("abar_min", c.noise.abar_min);
      r.get("abar_max", c.noise.abar_max);
    });
    with_object(s, "scp", [&](ObjectReader& r) {
      bool enabled = true;
      r.get("enabled", enabled);
      if (!enabled) c.training.scp = ScpSchedule::identity();
      r.get("lambda_min", c.training.scp.lambda_min);
      r.get("lambda_max", c.training.scp.lambda_max);
      r.get("gamma_min", c.training.scp.gamma_min);
      r.get("gamma_max", c.training.scp.gamma_max);
    });
    with_object(s, "mans", [&](ObjectReader& r) {
      bool enabled = true;
      r.get("enabled", enabled);
      if (!enabled) c.training.mans = MansConfig::disabled();
      r.get("milestones", c.training.mans.milestones);
      r.get("scalings", c.training.mans.scalings);
      r.get("apply_prob", c.training.mans.apply_prob);
      r.get("t_ceiling", c.training.mans.t_ceiling);
    });
    with_object(s, "lr", [&](ObjectReader& r) {
      r.get("lr_max", c.training.lr.lr_max);
      r.get("warmup", c.training.lr.warmup);
    });
  });

  with_object(root, "training", [&](ObjectReader& r) {
    auto& t = c.training;
    r.get("batch_size", t.batch_size);
    r.get("iterations", t.iterations);
    r.get("sc_prob", t.sc_prob);
    r.get("grad_clip", t.grad_clip);
    r.get("seed", t.seed);
    r.get("validation_interval", t.validation_interval);
    r.get("log_interval", t.log_interval);
    r.get("checkpoint_interval", t.checkpoint_interval);
    r.get("validation_examples", t.validation_examples);
    r.get("validation_nfe", t.validation_nfe);
    r.get("dropout", t.dropout);
    r.get("label_smoothing", t.label_smoothing);
    r.get("length_weight", t.length_weight);
  });

  with_object(root, "generation", [&](ObjectReader& r) {
    auto& g = c.generation;
    std::string mode = std::string(to_string(g.sc_mode));
    r.get("nfe", g.nfe);
    r.get("sc_mode", mode);
    r.get("length_beam", g.length_beam);
    r.get("noise_beam", g.noise_beam);
    r.get("seed", g.seed);
    g.sc_mode = parse_enum("config.generation.sc_mode", mode, sc_mode_from_string);
  });

  with_object(root, "paths", [&](ObjectReader& r) {
    std::string out = c.paths.out_dir.string();
    r.get("out_dir", out);
    c.paths.out_dir = out;
  });

  root.finish();
  c.generation.t_floor = c.noise.t_floor;
  c.validate();
  return c;
}

json RunConfig::to_json() const {
  json tj = {{"type", task.type == TaskType::kSynth ? "synth" : "tsv"}};
  if (task.type == TaskType::kSynth) {
    tj["kind"] = to_string(task.synth.kind);
    tj["vocab_size"] = task.synth.vocab_size;
    tj["min_len"] = task.synth.min_len;
    tj["max_len"] = task.synth.max_len;
    tj["count"] = task.synth.count;
    tj["seed"] = task.synth.seed;
  } else {
    tj["train"] = task.train.string();
    if (!task.valid.empty()) tj["valid"] = task.valid.string();
    tj["min_freq"] = task.min_freq;
    tj["tokenize"] = tokenize_name(task.tokenize);
  }
  const auto& t = training;
  return json{
      {"task", tj},
      {"model",
       {{"enc_layers", model.enc_layers},
        {"dec_layers", model.dec_layers},
        {"width", model.width},
        {"heads", model.heads},
        {"ffn", model.ffn},
        {"latent", model.latent},
        {"max_len", model.max_len}}},
      {"schedules",
       {{"noise",
         {{"kind", to_string(noise.kind)},
          {"shift", noise.shift},
          {"t_floor", noise.t_floor},
          {"abar_min", noise.abar_min},
          {"abar_max", noise.abar_max}}},
        {"scp",
         {{"lambda_min", t.scp.lambda_min},
          {"lambda_max", t.scp.lambda_max},
          {"gamma_min", t.scp.gamma_min},
          {"gamma_max", t.scp.gamma_max}}},
        {"mans",
         {{"milestones", t.mans.milestones},
          {"scalings", t.mans.scalings},
          {"apply_prob", t.mans.apply_prob},
          {"t_ceiling", t.mans.t_ceiling}}},
        {"lr", {{"lr_max", t.lr.lr_max}, {"warmup", t.lr.warmup}}}}},
      {"training",
       {{"batch_size", t.batch_size},
        {"iterations", t.iterations},
        {"sc_prob", t.sc_prob},
        {"grad_clip", t.grad_clip},
        {"seed", t.seed},
        {"validation_interval", t.validation_interval},
        {"log_interval", t.log_interval},
        {"checkpoint_interval", t.checkpoint_interval},
        {"validation_examples", t.validation_examples},
        {"validation_nfe", t.validation_nfe},
        {"dropout", t.dropout},
        {"label_smoothing", t.label_smoothing},
        {"length_weight", t.length_weight}}},
      {"generation",
       {{"nfe", generation.nfe},
        {"sc_mode", to_string(generation.sc_mode)},
        {"length_beam", generation.length_beam},
        {"noise_beam", generation.noise_beam},
        {"seed", generation.seed}}},
      {"paths", {{"out_dir", paths.out_dir.string()}}}};
}

void RunConfig::validate() const {
  try {
    if (task.type == TaskType::kSynth) {
      task.synth.validate();
      if (task.synth.max_len > model.max_len)
        throw ConfigError("task.max_len exceeds model.max_len");
    } else {
      if (task.train.empty()) throw ConfigError("task.train is required for tsv tasks");
      if (task.min_freq < 1) throw ConfigError("task.min_freq must be >= 1");
    }
    DenoiserConfig m = model;
    m.vocab = std::max(m.vocab, Vocabulary::kNumReserved + 1);
    m.validate();
    noise.validate();
    training.validate();
    generation.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  RunConfig c = RunConfig::from_json(j);
  const auto base = path.parent_path();
  auto resolve = [&](std::filesystem::path& p) {
    if (!p.empty() && p.is_relative()) p = base / p;
  };
  resolve(c.task.train);
  resolve(c.task.valid);
  resolve(c.paths.out_dir);
  return c;
}

TaskData load_task_data(RunConfig& cfg) {
  TaskData d;
  if (cfg.task.type == TaskType::kSynth) {
    d.vocab = synth_vocabulary(cfg.task.synth);
    auto splits = split_dataset(generate_synth(cfg.task.synth));
    d.train = std::move(splits.train);
    d.valid = std::move(splits.valid);
    d.test = std::move(splits.test);
  } else {
    TsvOptions opts;
    opts.min_freq = cfg.task.min_freq;
    opts.mode = cfg.task.tokenize;
    auto corpus = load_parallel_tsv(cfg.task.train, opts);
    d.vocab = std::move(corpus.vocab);
    if (cfg.task.valid.empty()) {
      auto splits = split_dataset(corpus.examples);
      d.train = std::move(splits.train);
      d.valid = std::move(splits.valid);
      d.test = std::move(splits.test);
    } else {
      d.train = std::move(corpus.examples);
      TsvOptions vopts = opts;
      vopts.vocab = &d.vocab;
      d.valid = load_parallel_tsv(cfg.task.valid, vopts).examples;
    }
  }
  if (d.train.empty()) throw ConfigError("task produced an empty training split");
  if (d.valid.empty()) throw ConfigError("task produced an empty validation split");
  cfg.model.vocab = d.vocab.size();
  for (const Dataset* set : {&d.train, &d.valid})
    for (const auto& ex : *set)
      if (static_cast<int>(ex.target.size()) > cfg.model.max_len)
        throw ConfigError("a target of length " + std::to_string(ex.target.size()) +
                          " exceeds model.max_len " + std::to_string(cfg.model.max_len));
  return d;
}

}  // namespace textdiff
