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

#include "textdiff/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "textdiff/analysis.hpp"
#include "textdiff/bleu.hpp"
#include "textdiff/config.hpp"
#include "textdiff/data_io.hpp"
#include "textdiff/errors.hpp"
#include "textdiff/parallel.hpp"
#include "textdiff/sampler.hpp"
#include "textdiff/trainer.hpp"

namespace textdiff {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class UsageError : public Error {
 public:
  using Error::Error;
};

struct LoadedModel {
  RunConfig cfg;
  Vocabulary vocab;
  std::unique_ptr<TransformerDenoiser> model;
};

LoadedModel load_model(const fs::path& path) {
  const Checkpoint ckpt = load_checkpoint(path);
  LoadedModel m{RunConfig::from_json(ckpt.config), Vocabulary::from_tokens(ckpt.vocab), nullptr};
  m.cfg.model.vocab = m.vocab.size();
  m.model = std::make_unique<TransformerDenoiser>(m.cfg.model, ckpt.seed);
  for (auto& e : m.model->params().entries()) {
    const Matrix& src = ckpt.array("param/" + e.name);
    if (src.rows() != e.value.rows() || src.cols() != e.value.cols())
      throw IoError("checkpoint array param/" + e.name + " does not match the model shape");
    e.value = src;
  }
  return m;
}

std::string format_double(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

// Output stream that is either a file or the command's stdout.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw IoError("cannot open '" + path + "' for writing");
      out_ = &file_;
    }
  }
  std::ostream& operator*() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

struct DataFlags {
  std::string data;
  std::string split = "test";
  std::size_t limit = 0;
};

void add_data_flags(CLI::App* cmd, DataFlags& f) {
  cmd->add_option("--data,--test", f.data, "TSV file of source<TAB>target lines");
  cmd->add_option("--split", f.split, "split of the configured task when --data is absent")
      ->check(CLI::IsMember({"train", "valid", "test"}));
  cmd->add_option("--limit", f.limit, "use at most this many examples (0: all)");
}

Dataset select_data(const LoadedModel& m, const DataFlags& f) {
  Dataset d;
  if (!f.data.empty()) {
    TsvOptions opts;
    opts.mode = m.cfg.task.tokenize;
    opts.vocab = &m.vocab;
    d = load_parallel_tsv(f.data, opts).examples;
  } else {
    RunConfig cfg = m.cfg;
    TaskData t = load_task_data(cfg);
    d = f.split == "train" ? std::move(t.train) : f.split == "valid" ? std::move(t.valid) : std::move(t.test);
  }
  if (f.limit > 0 && d.size() > f.limit) d.resize(f.limit);
  if (d.empty()) throw IoError("evaluation data is empty");
  return d;
}

// ---- train ---------------------------------------------------------------

struct TrainFlags {
  std::string config;
  std::optional<std::int64_t> iterations;
  std::optional<std::uint64_t> seed;
  std::string resume;
  std::string out_dir;
};

int cmd_train(const TrainFlags& f, std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_run_config(f.config);
  if (f.iterations) cfg.training.iterations = *f.iterations;
  if (f.seed) cfg.training.seed = *f.seed;
  if (!f.out_dir.empty()) cfg.paths.out_dir = f.out_dir;
  if (cfg.training.iterations < 0) throw UsageError("--iterations must be >= 0");
  if (cfg.training.iterations == 0) {
    out << json{{"status", "ok"}, {"iterations", 0}}.dump() << '\n';
    return kExitOk;
  }
  TaskData data = load_task_data(cfg);
  cfg.validate();
  Trainer trainer(cfg.model, cfg.training, cfg.noise);
  const bool resuming = !f.resume.empty();
  if (resuming) {
    const Checkpoint ckpt = load_checkpoint(f.resume);
    if (ckpt.vocab != data.vocab.tokens())
      throw ConfigError("checkpoint vocabulary differs from the configured task");
    trainer.restore(ckpt);
    trainer.config().seed = cfg.training.seed;
    if (ckpt.seed != cfg.training.seed)
      err << "warning: resuming a run started with seed " << ckpt.seed << " under seed "
          << cfg.training.seed << '\n';
  }
  fs::create_directories(cfg.paths.out_dir);
  const auto mode = resuming ? std::ios::app : std::ios::trunc;
  std::ofstream metrics(cfg.paths.out_dir / "metrics.jsonl", mode);
  std::ofstream validation(cfg.paths.out_dir / "validation.jsonl", mode);
  if (!metrics || !validation) throw IoError("cannot write logs under " + cfg.paths.out_dir.string());
  data.vocab.save(cfg.paths.out_dir / "vocab.txt");
  json snapshot = cfg.to_json();
  snapshot.erase("paths");
  const fs::path ckpt_path = cfg.paths.out_dir / "checkpoint.ckpt";
  LoopIo io;
  io.metrics = &metrics;
  io.validation = &validation;
  io.checkpoint = [&](const Trainer& t) { save_checkpoint(t.to_checkpoint(snapshot, data.vocab.tokens()), ckpt_path); };
  TrainLoopResult res;
  try {
    res = trainer.run(data.train, data.valid, io);
  } catch (const DivergenceError&) {
    save_checkpoint(trainer.to_checkpoint(snapshot, data.vocab.tokens()), cfg.paths.out_dir / "diverged.ckpt");
    throw;
  }
  json summary{{"status", "ok"}, {"iterations", trainer.iteration()}, {"checkpoint", ckpt_path.string()}};
  if (!res.validations.empty()) {
    const auto& v = res.validations.back();
    summary["validation"] = {{"iter", v.iter},
                             {"diffusion_loss", v.diffusion_loss},
                             {"seq_accuracy", v.seq_accuracy},
                             {"length_accuracy", v.length_accuracy},
                             {"nfe", cfg.training.validation_nfe},
                             {"examples", v.examples}};
  }
  out << summary.dump() << '\n';
  return kExitOk;
}

// ---- generate --------------------------------------------------------------

struct GenFlags {
  std::string checkpoint;
  std::string input = "-";
  std::optional<int> nfe;
  std::optional<std::string> sc_mode;
  std::optional<int> length_beam;
  std::optional<int> noise_beam;
  std::optional<std::uint64_t> seed;
  std::string dump_trajectory;
  std::string dump_candidates;
};

void add_generation_flags(CLI::App* cmd, std::optional<std::string>& sc_mode, std::optional<int>& lb,
                          std::optional<int>& nb, std::optional<std::uint64_t>& seed) {
  cmd->add_option("--sc-mode", sc_mode, "self-conditioning: none, reused or corrected")
      ->check(CLI::IsMember({"none", "reused", "corrected"}));
  cmd->add_option("--length-beam", lb, "top-k predicted lengths per input");
  cmd->add_option("--noise-beam", nb, "noise seeds per length");
  cmd->add_option("--seed", seed, "master seed");
}

GenerationConfig generation_config(const RunConfig& cfg, const std::optional<std::string>& sc_mode,
                                   const std::optional<int>& lb, const std::optional<int>& nb,
                                   const std::optional<std::uint64_t>& seed) {
  GenerationConfig g = cfg.generation;
  g.t_floor = cfg.noise.t_floor;
  if (sc_mode) g.sc_mode = sc_mode_from_string(*sc_mode);
  if (lb) g.length_beam = *lb;
  if (nb) g.noise_beam = *nb;
  if (seed) g.seed = *seed;
  try {
    g.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  return g;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

int cmd_generate(const GenFlags& f, std::istream& in, std::ostream& out) {
  const LoadedModel m = load_model(f.checkpoint);
  GenerationConfig g = generation_config(m.cfg, f.sc_mode, f.length_beam, f.noise_beam, f.seed);
  if (f.nfe) g.nfe = *f.nfe;
  if (g.nfe < 1) throw UsageError("--nfe must be >= 1");

  std::vector<std::string> lines;
  {
    std::ifstream file;
    std::istream* src = &in;
    if (f.input != "-") {
      file.open(f.input);
      if (!file) throw IoError("cannot open input '" + f.input + "'");
      src = &file;
    }
    std::string line;
    while (std::getline(*src, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(line);
    }
  }

  const TokenizeMode mode = m.cfg.task.tokenize;
  const RngStreams streams(g.seed);
  std::vector<std::optional<MbrResult>> results(lines.size());
  parallel_for(lines.size(), [&](std::size_t i) {
    const TokenSeq c = m.vocab.encode(lines[i], mode);
    if (c.empty()) return;
    GenerationConfig gi = g;
    gi.seed = streams.derive("generate", i);
    results[i] = mbr_decode(*m.model, c, gi, m.cfg.noise);
  });

  Sink cand_sink(f.dump_candidates, out);
  Sink traj_sink(f.dump_trajectory, out);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& r = results[i];
    out << (r ? m.vocab.decode(r->best, mode) : std::string()) << '\n';
    if (!r) continue;
    if (!f.dump_candidates.empty()) {
      json cands = json::array();
      for (const auto& c : r->candidates)
        cands.push_back({{"length", c.length}, {"seed", c.seed}, {"text", m.vocab.decode(c.tokens, mode)}});
      *cand_sink << json{{"line", i}, {"selected", r->index}, {"denoiser_calls", r->denoiser_calls},
                         {"candidates", cands}}
                        .dump()
                 << '\n';
    }
    if (!f.dump_trajectory.empty()) {
      const auto& best = r->candidates[r->index];
      GenerationConfig gi = g;
      const auto res = generate(*m.model, m.model->encode(m.vocab.encode(lines[i], mode)), best.length,
                                gi, m.cfg.noise, best.seed);
      json steps = json::array();
      for (const auto& s : res.trajectory.steps)
        steps.push_back({{"t", s.t},
                         {"z", matrix_json(s.z)},
                         {"prediction", matrix_json(s.prediction)},
                         {"tokens", round_to_tokens(s.prediction, m.model->codebook())}});
      *traj_sink << json{{"line", i}, {"length", best.length}, {"seed", best.seed},
                         {"sc_mode", to_string(g.sc_mode)}, {"nfe", g.nfe}, {"steps", steps}}
                        .dump()
                 << '\n';
    }
  }
  return kExitOk;
}

// ---- eval ----------------------------------------------------------------

struct EvalFlags {
  std::string checkpoint;
  DataFlags data;
  std::vector<int> nfe;
  std::optional<std::string> sc_mode;
  std::optional<int> length_beam;
  std::optional<int> noise_beam;
  std::optional<std::uint64_t> seed;
};

int cmd_eval(const EvalFlags& f, std::ostream& out) {
  const LoadedModel m = load_model(f.checkpoint);
  const GenerationConfig base = generation_config(m.cfg, f.sc_mode, f.length_beam, f.noise_beam, f.seed);
  const Dataset data = select_data(m, f.data);
  std::vector<int> sweep = f.nfe.empty() ? std::vector<int>{base.nfe} : f.nfe;
  for (int nfe : sweep)
    if (nfe < 1) throw UsageError("--nfe values must be >= 1");
  const RngStreams streams(base.seed);
  for (int nfe : sweep) {
    GenerationConfig g = base;
    g.nfe = nfe;
    std::vector<double> bleu(data.size());
    std::vector<int> exact(data.size()), calls(data.size()), cands(data.size());
    const auto start = std::chrono::steady_clock::now();
    parallel_for(data.size(), [&](std::size_t i) {
      GenerationConfig gi = g;
      gi.seed = streams.derive("eval", i);
      const MbrResult r = mbr_decode(*m.model, data[i].source, gi, m.cfg.noise);
      bleu[i] = sentence_bleu(r.best, data[i].target);
      exact[i] = r.best == data[i].target ? 1 : 0;
      calls[i] = r.denoiser_calls;
      cands[i] = static_cast<int>(r.candidates.size());
    });
    const double wall =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    double b = 0.0, acc = 0.0, c = 0.0, k = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      b += bleu[i];
      acc += exact[i];
      c += calls[i];
      k += cands[i];
    }
    const double n = static_cast<double>(data.size());
    out << json{{"nfe", nfe},
                {"sc_mode", to_string(g.sc_mode)},
                {"length_beam", g.length_beam},
                {"noise_beam", g.noise_beam},
                {"examples", data.size()},
                {"bleu", b / n},
                {"seq_accuracy", acc / n},
                {"mean_denoiser_calls", c / n},
                {"denoiser_calls_per_candidate", c / k},
                {"wall_ms", wall}}
               .dump()
        << '\n';
  }
  return kExitOk;
}

// ---- analyze -------------------------------------------------------------

struct AnalyzeFlags {
  std::string checkpoint;
  DataFlags data;
  std::vector<int> nfe;
  std::uint64_t seed = 0;
  std::string out;
  int bootstrap = 200;
  int sw_samples = 50;
};

void add_analyze_flags(CLI::App* cmd, AnalyzeFlags& f, const char* default_nfe) {
  cmd->add_option("--checkpoint", f.checkpoint, "trained checkpoint")->required();
  add_data_flags(cmd, f.data);
  cmd->add_option("--nfe", f.nfe, "comma-separated NFE sweep")->delimiter(',')->default_str(default_nfe);
  cmd->add_option("--seed", f.seed, "analysis seed");
  cmd->add_option("--out", f.out, "CSV output path (default: stdout)");
}

std::vector<int> nfe_list(const AnalyzeFlags& f, std::vector<int> fallback) {
  return f.nfe.empty() ? fallback : f.nfe;
}

AnalysisOptions analysis_options(const LoadedModel& m, int nfe, std::uint64_t seed) {
  AnalysisOptions o;
  o.nfe = nfe;
  o.seed = seed;
  o.t_floor = m.cfg.noise.t_floor;
  return o;
}

int cmd_analyze_gap(const AnalyzeFlags& f, std::ostream& out) {
  const auto sweep = nfe_list(f, {5, 20});
  for (int nfe : sweep)
    if (nfe < 3)
      throw UsageError("analyze gap: --nfe " + std::to_string(nfe) +
                       " is too small; the gap compares reused and step-matched conditions at "
                       "interior steps, which requires nfe >= 3");
  const LoadedModel m = load_model(f.checkpoint);
  const Dataset data = select_data(m, f.data);
  Sink sink(f.out, out);
  *sink << "nfe,step,t,gap,sup,sup_stderr\n";
  for (int nfe : sweep) {
    const GapReport rep = estimation_gap(*m.model, data, m.cfg.noise, analysis_options(m, nfe, f.seed));
    const double se = data.size() >= 2 ? bootstrap_sup_stderr(rep, f.bootstrap, f.seed) : 0.0;
    for (std::size_t j = 0; j < rep.steps.size(); ++j)
      *sink << nfe << ',' << rep.steps[j] << ',' << format_double(rep.step_times[j]) << ','
            << format_double(rep.step_means[j]) << ',' << format_double(rep.sup) << ','
            << format_double(se) << '\n';
  }
  return kExitOk;
}

int cmd_analyze_residuals(const AnalyzeFlags& f, std::ostream& out) {
  const auto sweep = nfe_list(f, {20});
  for (int nfe : sweep)
    if (nfe < 2) throw UsageError("analyze residuals: --nfe must be >= 2");
  const LoadedModel m = load_model(f.checkpoint);
  const Dataset data = select_data(m, f.data);
  Sink sink(f.out, out);
  *sink << "nfe,step,t,dim,mu,sigma,lambda,gamma,W,p\n";
  for (int nfe : sweep) {
    const auto rows =
        residual_analysis(*m.model, data, m.cfg.noise, analysis_options(m, nfe, f.seed), f.sw_samples);
    for (const auto& r : rows)
      *sink << nfe << ',' << r.step << ',' << format_double(r.t) << ',' << r.dim << ','
            << format_double(r.mu) << ',' << format_double(r.sigma) << ',' << format_double(r.lambda)
            << ',' << format_double(r.gamma) << ',' << format_double(r.w) << ',' << format_double(r.p)
            << '\n';
  }
  return kExitOk;
}

int cmd_analyze_sc_compare(const AnalyzeFlags& f, std::ostream& out) {
  const auto sweep = nfe_list(f, {5, 20, 50});
  for (int nfe : sweep)
    if (nfe < 1) throw UsageError("analyze sc-compare: --nfe must be >= 1");
  const LoadedModel m = load_model(f.checkpoint);
  const Dataset data = select_data(m, f.data);
  Sink sink(f.out, out);
  *sink << "nfe,bleu_reused,bleu_corrected\n";
  for (int nfe : sweep) {
    const auto r = sc_bleu_compare(*m.model, data, m.cfg.noise, analysis_options(m, nfe, f.seed));
    *sink << nfe << ',' << format_double(r.bleu_reused) << ',' << format_double(r.bleu_corrected) << '\n';
  }
  return kExitOk;
}

// ---- dump-schedule / make-data --------------------------------------------

struct ScheduleFlags {
  std::string config;
  std::optional<std::string> kind;
  int points = 1000;
  std::uint64_t seed = 0;
};

int cmd_dump_schedule(const ScheduleFlags& f, std::ostream& out) {
  RunConfig cfg;
  if (!f.config.empty()) cfg = load_run_config(f.config);
  NoiseSchedule sched = cfg.noise;
  if (f.kind) sched = NoiseSchedule::make(noise_kind_from_string(*f.kind));
  if (f.points < 2) throw UsageError("--points must be >= 2");
  out << "t,alpha,sigma,lambda,gamma\n";
  for (int i = 0; i < f.points; ++i) {
    const double t = sched.t_floor + (1.0 - sched.t_floor) * i / (f.points - 1);
    const auto as = sched.alpha_sigma(t);
    const auto lg = scp_lambda_gamma(cfg.training.scp, t);
    out << format_double(t) << ',' << format_double(as.alpha) << ',' << format_double(as.sigma) << ','
        << format_double(lg.lambda) << ',' << format_double(lg.gamma) << '\n';
  }
  return kExitOk;
}

struct MakeDataFlags {
  std::string task = "copy";
  SynthTaskSpec spec;
  std::string split = "all";
  std::string out;
};

int cmd_make_data(MakeDataFlags f, std::ostream& out) {
  f.spec.kind = synth_kind_from_string(f.task);
  try {
    f.spec.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const Vocabulary vocab = synth_vocabulary(f.spec);
  Dataset all = generate_synth(f.spec);
  Dataset data;
  if (f.split == "all") {
    data = std::move(all);
  } else {
    auto s = split_dataset(all);
    data = f.split == "train" ? std::move(s.train) : f.split == "valid" ? std::move(s.valid) : std::move(s.test);
  }
  Sink sink(f.out, out);
  for (const auto& ex : data) *sink << vocab.decode(ex.source) << '\t' << vocab.decode(ex.target) << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"textdiff: continuous embedding-space diffusion for sequence-to-sequence text"};
  app.require_subcommand(1);

  TrainFlags train;
  auto* c_train = app.add_subcommand("train", "train a denoiser from a JSON run configuration");
  c_train->add_option("--config", train.config, "run configuration file")->required();
  c_train->add_option("--iterations", train.iterations, "override training.iterations");
  c_train->add_option("--seed", train.seed, "override training.seed");
  c_train->add_option("--resume", train.resume, "continue from this checkpoint");
  c_train->add_option("--out-dir", train.out_dir, "override paths.out_dir");

  GenFlags gen;
  auto* c_gen = app.add_subcommand("generate", "decode one output line per input line");
  c_gen->add_option("--checkpoint", gen.checkpoint, "trained checkpoint")->required();
  c_gen->add_option("--input", gen.input, "input file, '-' for stdin");
  c_gen->add_option("--nfe", gen.nfe, "denoising steps");
  add_generation_flags(c_gen, gen.sc_mode, gen.length_beam, gen.noise_beam, gen.seed);
  c_gen->add_option("--dump-trajectory", gen.dump_trajectory, "JSONL trajectory of each selected output");
  c_gen->add_option("--dump-candidates", gen.dump_candidates, "JSONL of every MBR candidate");

  EvalFlags ev;
  auto* c_eval = app.add_subcommand("eval", "BLEU and accuracy over a test set, one JSON line per NFE");
  c_eval->add_option("--checkpoint", ev.checkpoint, "trained checkpoint")->required();
  add_data_flags(c_eval, ev.data);
  c_eval->add_option("--nfe", ev.nfe, "comma-separated NFE sweep")->delimiter(',');
  add_generation_flags(c_eval, ev.sc_mode, ev.length_beam, ev.noise_beam, ev.seed);

  auto* c_an = app.add_subcommand("analyze", "self-conditioning diagnostics as CSV");
  c_an->require_subcommand(1);
  AnalyzeFlags gap, res, scc;
  auto* c_gap = c_an->add_subcommand("gap", "reused vs step-matched estimation gap per interior step");
  add_analyze_flags(c_gap, gap, "5,20");
  c_gap->add_option("--bootstrap", gap.bootstrap, "bootstrap rounds for the sup standard error");
  auto* c_res = c_an->add_subcommand("residuals", "per-dimension residual fits and normality tests");
  add_analyze_flags(c_res, res, "20");
  c_res->add_option("--sw-samples", res.sw_samples, "standardized residuals per Shapiro-Wilk test");
  auto* c_scc = c_an->add_subcommand("sc-compare", "BLEU under reused vs corrected self-conditioning");
  add_analyze_flags(c_scc, scc, "5,20,50");

  ScheduleFlags sch;
  auto* c_sch = app.add_subcommand("dump-schedule", "CSV table of t, alpha, sigma, lambda, gamma");
  c_sch->add_option("--config", sch.config, "take schedules from this run configuration");
  c_sch->add_option("--kind", sch.kind, "noise schedule kind")->check(CLI::IsMember({"sqrt", "linear", "cosine"}));
  c_sch->add_option("--points", sch.points, "grid points over [t_floor, 1]");
  c_sch->add_option("--seed", sch.seed, "accepted for interface uniformity; the table is deterministic");

  MakeDataFlags md;
  auto* c_md = app.add_subcommand("make-data", "write a synthetic task as TSV");
  c_md->add_option("--task", md.task, "copy, reverse, sort or add-mod")
      ->check(CLI::IsMember({"copy", "reverse", "sort", "add-mod"}));
  c_md->add_option("--vocab-size", md.spec.vocab_size, "vocabulary size including reserved ids");
  c_md->add_option("--min-len", md.spec.min_len, "shortest target");
  c_md->add_option("--max-len", md.spec.max_len, "longest target");
  c_md->add_option("--count", md.spec.count, "number of examples");
  c_md->add_option("--seed", md.spec.seed, "generator seed");
  c_md->add_option("--split", md.split, "all, train, valid or test")
      ->check(CLI::IsMember({"all", "train", "valid", "test"}));
  c_md->add_option("--out", md.out, "output path (default: stdout)");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (c_train->parsed()) return cmd_train(train, out, err);
    if (c_gen->parsed()) return cmd_generate(gen, in, out);
    if (c_eval->parsed()) return cmd_eval(ev, out);
    if (c_gap->parsed()) return cmd_analyze_gap(gap, out);
    if (c_res->parsed()) return cmd_analyze_residuals(res, out);
    if (c_scc->parsed()) return cmd_analyze_sc_compare(scc, out);
    if (c_sch->parsed()) return cmd_dump_schedule(sch, out);
    if (c_md->parsed()) return cmd_make_data(md, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace textdiff
