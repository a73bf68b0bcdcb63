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

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (capped at 100).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "textdiff/analysis.hpp"
#include "textdiff/bleu.hpp"
#include "textdiff/cli.hpp"
#include "textdiff/diffusion.hpp"
#include "textdiff/rng.hpp"
#include "textdiff/sampler.hpp"
#include "textdiff/schedules.hpp"
#include "textdiff/stats.hpp"
#include "textdiff/trainer.hpp"
#include "textdiff/vocab_embed.hpp"

using namespace textdiff;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Settings {
  fs::path work;
  fs::path configs;
};

constexpr NoiseKind kKinds[] = {NoiseKind::kSqrt, NoiseKind::kLinear, NoiseKind::kCosine};

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

struct CliResult {
  int code;
  std::string out, err;
};

CliResult cli(const std::vector<std::string>& args, const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out, err;
  const int code = run_cli(args, in, out, err);
  return {code, out.str(), err.str()};
}

CliResult cli_checked(const std::vector<std::string>& args, const std::string& input = "") {
  auto r = cli(args, input);
  if (r.code != kExitOk) {
    std::string cmd;
    for (const auto& a : args) cmd += a + " ";
    throw std::runtime_error("command failed (" + std::to_string(r.code) + "): " + cmd + ": " + r.err);
  }
  return r;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Closed-form moment check: the mean error is measured against the larger of
// |mean| and the standard deviation, so near-zero means stay well posed.
struct MomentCheck {
  double mean_err = 0.0;
  double var_err = 0.0;
};

MomentCheck moments(const std::vector<double>& x, double mean, double var) {
  double s = 0.0;
  for (double v : x) s += v;
  const double m = s / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  const double vhat = ss / static_cast<double>(x.size() - 1);
  return {std::abs(m - mean) / std::max(std::abs(mean), std::sqrt(var)), std::abs(vhat - var) / var};
}

// 1. Schedule algebra.
Outcome schedule_algebra(const Settings&) {
  double worst = 0.0;
  bool monotone = true;
  for (NoiseKind kind : kKinds) {
    const auto s = NoiseSchedule::make(kind);
    double pa = 2.0, ps = -1.0;
    for (int i = 0; i < 1000; ++i) {
      const double t = s.t_floor + (1.0 - s.t_floor) * i / 999.0;
      const auto as = s.alpha_sigma(t);
      worst = std::max(worst, std::abs(as.alpha * as.alpha + as.sigma * as.sigma - 1.0));
      monotone = monotone && as.alpha < pa && as.sigma > ps;
      pa = as.alpha;
      ps = as.sigma;
    }
  }
  return {worst < 1e-9 && monotone, "max |a^2+s^2-1| = " + fmt(worst) + ", strictly monotone: " +
                                        (monotone ? "yes" : "no")};
}

// 2. Forward moments of the plain and perturbed kernels.
Outcome forward_moments(const Settings&) {
  const auto sched = NoiseSchedule::make(NoiseKind::kSqrt);
  const ScpSchedule scp;
  std::mt19937_64 pick(2);
  std::uniform_real_distribution<double> ut(sched.t_floor, 1.0);
  const double z = 0.8;
  const int n = 200000;
  double worst = 0.0;
  Rng rng(7);
  for (int k = 0; k < 5; ++k) {
    const double t = ut(pick);
    const auto as = sched.alpha_sigma(t);
    const auto lg = scp_lambda_gamma(scp, t);
    const LatentSeq z0 = LatentSeq::Constant(n, 1, z);
    const TimeVec tv = constant_times(n, t);
    const Matrix e1 = gaussian_matrix(n, 1, rng), e2 = gaussian_matrix(n, 1, rng);
    const LatentSeq a = forward_sample(z0, tv, e1, sched);
    const LatentSeq b = scp_forward_sample(z0, tv, e2, sched, scp);
    const auto ma = moments({a.data(), a.data() + n}, as.alpha * z, as.sigma * as.sigma);
    const auto mb = moments({b.data(), b.data() + n}, as.alpha * lg.lambda * z,
                            as.sigma * as.sigma * (1.0 + lg.gamma * lg.gamma));
    worst = std::max({worst, ma.mean_err, ma.var_err, mb.mean_err, mb.var_err});
  }
  return {worst <= 0.01, "5 times x 2 kernels at 2e5 samples, worst relative error " + fmt(worst)};
}

// 3. Forward to t then posterior to s reproduces q(z_s | z0).
Outcome posterior_chain(const Settings&) {
  const auto sched = NoiseSchedule::make(NoiseKind::kSqrt);
  std::mt19937_64 pick(3);
  std::uniform_real_distribution<double> ut(sched.t_floor, 1.0);
  const double z = 0.8;
  const int n = 100000;
  double worst = 0.0;
  Rng rng(9);
  for (int k = 0; k < 10; ++k) {
    double s = ut(pick), t = ut(pick);
    if (s > t) std::swap(s, t);
    const LatentSeq z0 = LatentSeq::Constant(n, 1, z);
    const TimeVec tv = constant_times(n, t), sv = constant_times(n, s);
    const LatentSeq zt = forward_sample(z0, tv, gaussian_matrix(n, 1, rng), sched);
    const LatentSeq zs = reverse_step(zt, z0, sv, tv, gaussian_matrix(n, 1, rng), sched);
    const auto as = sched.alpha_sigma(s);
    const auto m = moments({zs.data(), zs.data() + n}, as.alpha * z, as.sigma * as.sigma);
    worst = std::max({worst, m.mean_err, m.var_err});
  }
  return {worst <= 0.01, "10 (s, t) pairs at 1e5 samples, worst relative error " + fmt(worst)};
}

// 4. Identity perturbation equals the plain forward.
Outcome scp_reduction(const Settings&) {
  Rng rng(4);
  double worst = 0.0;
  for (NoiseKind kind : kKinds) {
    const auto sched = NoiseSchedule::make(kind);
    for (int k = 0; k < 20; ++k) {
      const LatentSeq z0 = gaussian_matrix(7, 5, rng);
      const Matrix noise = gaussian_matrix(7, 5, rng);
      TimeVec t(7);
      for (auto& v : t) v = sched.t_floor + (1.0 - sched.t_floor) * uniform01(rng);
      const LatentSeq a = forward_sample(z0, t, noise, sched);
      const LatentSeq b = scp_forward_sample(z0, t, noise, sched, ScpSchedule::identity());
      worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
    }
  }
  return {worst <= 1e-12, "max |difference| = " + fmt(worst)};
}

// 5. Full-parameter central differences of the training loss.
Outcome gradient_oracle(const Settings&) {
  DenoiserConfig mc;
  mc.enc_layers = 1;
  mc.dec_layers = 1;
  mc.width = 12;
  mc.heads = 2;
  mc.ffn = 24;
  mc.latent = 6;
  mc.max_len = 8;
  mc.vocab = 12;
  const auto sched = NoiseSchedule::make(NoiseKind::kSqrt);
  const ParallelExample ex{{4, 9, 6, 11}, {7, 5, 10, 4, 8}};
  const LossOptions opts;
  double worst = 0.0;
  std::size_t count = 0;
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    TransformerDenoiser m(mc, seed);
    count = m.params().scalar_count();
    Rng rng(seed);
    ExampleDraws d;
    for (std::size_t l = 0; l < ex.target.size(); ++l) d.t.push_back(0.05 + 0.9 * uniform01(rng));
    d.noise = gaussian_matrix(static_cast<Eigen::Index>(ex.target.size()), mc.latent, rng);
    Gradients analytic = zero_gradients(m.params());
    example_loss(m, ex, d, opts, sched, ScpSchedule{}, &analytic);
    auto& entries = m.params().entries();
    for (std::size_t k = 0; k < entries.size(); ++k) {
      Matrix& w = entries[k].value;
      for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double keep = w.data()[i];
        const double h = 1e-5;
        w.data()[i] = keep + h;
        const double up = example_loss(m, ex, d, opts, sched, ScpSchedule{}, nullptr).total;
        w.data()[i] = keep - h;
        const double down = example_loss(m, ex, d, opts, sched, ScpSchedule{}, nullptr).total;
        w.data()[i] = keep;
        const double num = (up - down) / (2 * h);
        const double a = analytic[k].data()[i];
        worst = std::max(worst, std::abs(a - num) / std::max({std::abs(a), std::abs(num), 1e-6}));
      }
    }
  }
  return {worst < 1e-3 && count <= 5000,
          std::to_string(count) + " parameters, 3 initializations, max relative error " + fmt(worst)};
}

// 6. Copy task quickstart.
Outcome copy_learnability(const Settings& st) {
  const auto start = std::chrono::steady_clock::now();
  const fs::path out = st.work / "copy";
  fs::remove_all(out);
  cli_checked({"train", "--config", (st.configs / "copy.json").string(), "--out-dir", out.string()});
  const double minutes =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 60.0;
  std::ifstream f(out / "validation.jsonl");
  double best = 0.0, last = 0.0;
  std::int64_t at = -1;
  for (std::string line; std::getline(f, line);) {
    const auto j = json::parse(line);
    if (j["iter"].get<std::int64_t>() > 3000) break;
    last = j["seq_accuracy"].get<double>();
    if (last >= 0.99 && at < 0) at = j["iter"].get<std::int64_t>();
    best = std::max(best, last);
  }
  return {at > 0 && minutes < 10.0, "validation accuracy at NFE=5: first >= 0.99 at iteration " +
                                        std::to_string(at) + ", final " + fmt(last) + ", wall " +
                                        fmt(minutes, 3) + " min"};
}

// Reverse-task runs shared by criteria 7 to 9.
struct ReverseRun {
  fs::path checkpoint;
  double final_diffusion_loss = 0.0;
};

ReverseRun reverse_run(const Settings& st, const std::string& config, int seed) {
  static std::map<std::string, ReverseRun> done;
  const std::string name = fs::path(config).stem().string() + "_seed" + std::to_string(seed);
  if (const auto it = done.find(name); it != done.end()) return it->second;
  const fs::path out = st.work / name;
  fs::remove_all(out);
  const auto r = cli_checked({"train", "--config", (st.configs / config).string(), "--seed",
                              std::to_string(seed), "--out-dir", out.string()});
  const auto j = json::parse(r.out);
  return done[name] = {out / "checkpoint.ckpt", j["validation"]["diffusion_loss"].get<double>()};
}

const int kSeeds[] = {1, 2, 3};

// 7. Corrected vs reused self-conditioning BLEU.
Outcome sc_bleu_direction(const Settings& st) {
  bool ok = true;
  std::string detail;
  for (int seed : kSeeds) {
    const auto run = reverse_run(st, "reverse.json", seed);
    const auto rows = csv_rows(cli_checked({"analyze", "sc-compare", "--checkpoint", run.checkpoint.string(),
                                            "--split", "valid", "--nfe", "5,50"})
                                   .out);
    const double r5 = std::stod(rows[0][1]), c5 = std::stod(rows[0][2]);
    const double r50 = std::stod(rows[1][1]), c50 = std::stod(rows[1][2]);
    ok = ok && c5 >= r5 && std::abs(c50 - r50) <= 0.01;
    detail += "seed " + std::to_string(seed) + ": NFE5 reused " + fmt(r5) + " corrected " + fmt(c5) +
              ", NFE50 |diff| " + fmt(std::abs(c50 - r50)) + "; ";
  }
  return {ok, detail};
}

// 8. Estimation gap shrinks with more steps.
Outcome gap_trend(const Settings& st) {
  bool ok = true;
  std::string detail;
  for (int seed : kSeeds) {
    const auto run = reverse_run(st, "reverse.json", seed);
    const auto rows = csv_rows(cli_checked({"analyze", "gap", "--checkpoint", run.checkpoint.string(),
                                            "--split", "valid", "--nfe", "5,20"})
                                   .out);
    double sup5 = -1.0, sup20 = -1.0, at5 = -1.0, at20 = -1.0;
    for (const auto& r : rows) {
      (r[0] == "5" ? sup5 : sup20) = std::stod(r[4]);
      if (std::abs(std::stod(r[2]) - 0.6004) < 1e-9) (r[0] == "5" ? at5 : at20) = std::stod(r[3]);
    }
    ok = ok && sup5 > sup20;
    detail += "seed " + std::to_string(seed) + ": sup gap NFE5 " + fmt(sup5) + " NFE20 " + fmt(sup20) +
              " (at t=0.6004: " + fmt(at5) + " vs " + fmt(at20) + "); ";
  }
  return {ok, detail};
}

// 9. MANS against the uniform baseline.
Outcome mans_direction(const Settings& st) {
  double base = 0.0, mans = 0.0;
  std::string detail;
  for (int seed : kSeeds) {
    const double b = reverse_run(st, "reverse.json", seed).final_diffusion_loss;
    const double m = reverse_run(st, "reverse_mans.json", seed).final_diffusion_loss;
    base += b / 3.0;
    mans += m / 3.0;
    detail += "seed " + std::to_string(seed) + ": " + fmt(m) + " vs " + fmt(b) + "; ";
  }
  return {mans <= base, "final validation diffusion loss, MANS mean " + fmt(mans) + " vs uniform mean " +
                            fmt(base) + " (" + detail + ")"};
}

// 10. BLEU reference cases.
Outcome bleu_oracle(const Settings&) {
  Vocabulary v;
  auto w = [&](const std::string& s) {
    TokenSeq out;
    for (const auto& tok : split_tokens(s, TokenizeMode::kWhitespace)) out.push_back(v.add(tok));
    return out;
  };
  struct Case {
    const char* hyp;
    const char* ref;
    double bleu;
  };
  const Case cases[] = {{"a b c d", "a b c d e", 0.77880078307140487},
                        {"a b c d", "a b x d", 0.45180100180492242},
                        {"the the the the", "the cat sat on", 0.31947155212313624},
                        {"a b c d e f", "a b c d", 0.50813274815461474},
                        {"a b", "a b c", 0.60653065971263342}};
  double worst = 0.0;
  for (const auto& c : cases) worst = std::max(worst, std::abs(sentence_bleu(w(c.hyp), w(c.ref)) - c.bleu));
  const bool identity = sentence_bleu(w("x y z q r"), w("x y z q r")) == 1.0;
  const bool empty = sentence_bleu({}, w("x y")) == 0.0;
  return {worst <= 1e-9 && identity && empty,
          "max |error| over 5 cases " + fmt(worst) + ", identity exact: " + (identity ? "yes" : "no") +
              ", empty exact: " + (empty ? "yes" : "no")};
}

// 11. Shapiro-Wilk size and power.
Outcome shapiro_calibration(const Settings&) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  const int batches = 10000;
  int rej_normal = 0, rej_uniform = 0, rej_uniform50 = 0;
  std::vector<double> x(50), u(200);
  for (int b = 0; b < batches; ++b) {
    for (auto& v : x) v = normal(rng);
    rej_normal += shapiro_wilk(x).p < 0.05;
  }
  for (int b = 0; b < batches; ++b) {
    for (auto& v : u) v = uniform(rng);
    rej_uniform += shapiro_wilk(u).p < 0.05;
    for (auto& v : x) v = uniform(rng);
    rej_uniform50 += shapiro_wilk(x).p < 0.05;
  }
  const double rn = rej_normal / double(batches), ru = rej_uniform / double(batches);
  return {rn >= 0.04 && rn <= 0.06 && ru > 0.99,
          "normal n=50 rejection " + fmt(rn) + ", uniform n=200 rejection " + fmt(ru) +
              " (uniform n=50: " + fmt(rej_uniform50 / double(batches)) + ")"};
}

// 12. Planted leakage recovery.
Outcome residual_recovery(const Settings&) {
  const auto sched = NoiseSchedule::make(NoiseKind::kSqrt);
  const double s = 0.35;
  const auto as = sched.alpha_sigma(s);
  const std::vector<double> lambda{0.9, 0.95, 1.1, 0.8}, gamma{0.2, 0.35, 0.1, 0.5};
  const int dims = 4, rows = 1000, pairs_n = 100;  // 1e5 samples per dimension
  std::mt19937_64 rng(12);
  std::normal_distribution<double> normal;
  std::vector<ResidualPair> pairs;
  for (int p = 0; p < pairs_n; ++p) {
    LatentSeq m(rows, dims), r(rows, dims);
    for (int i = 0; i < rows; ++i)
      for (int d = 0; d < dims; ++d) {
        const double mu = 1.0 / lambda[d];
        const double sd = gamma[d] * mu * as.sigma / as.alpha;
        m(i, d) = normal(rng);
        r(i, d) = mu * m(i, d) + sd * normal(rng);
      }
    pairs.push_back({r, m});
  }
  const auto lg = empirical_lambda_gamma(fit_residual_stats(pairs), s, sched);
  double worst = 0.0;
  for (int d = 0; d < dims; ++d)
    worst = std::max({worst, std::abs(lg.lambda(d) - lambda[d]) / lambda[d],
                      std::abs(lg.gamma(d) - gamma[d]) / gamma[d]});
  return {worst <= 0.03, "4 dimensions at 1e5 samples, worst relative error " + fmt(worst)};
}

// 13. MBR against exhaustive search.
Outcome mbr_oracle(const Settings&) {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> size(1, 6), len(1, 7), tok(4, 7);
  int agree = 0;
  for (int c = 0; c < 50; ++c) {
    std::vector<TokenSeq> cands(static_cast<std::size_t>(size(rng)));
    for (auto& s : cands) {
      s.resize(static_cast<std::size_t>(len(rng)));
      for (auto& t : s) t = tok(rng);
    }
    std::vector<double> u(cands.size(), 0.0);
    for (std::size_t i = 0; i < cands.size(); ++i)
      for (std::size_t j = 0; j < cands.size(); ++j)
        if (i != j) u[i] += sentence_bleu(cands[i], cands[j]);
    const auto best = static_cast<std::size_t>(std::max_element(u.begin(), u.end()) - u.begin());
    agree += mbr_select(cands) == best;
  }
  return {agree == 50, std::to_string(agree) + "/50 candidate sets agree"};
}

// 14. train -> generate -> analyze twice, and once through a resume.
Outcome reproducibility(const Settings& st) {
  const fs::path root = st.work / "repro";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path cfg = root / "run.json";
  std::ofstream(cfg) << R"({
    "task": {"type": "synth", "kind": "reverse", "vocab_size": 10, "min_len": 1, "max_len": 5, "count": 400, "seed": 5},
    "model": {"enc_layers": 1, "dec_layers": 1, "width": 16, "heads": 2, "ffn": 32, "latent": 8, "max_len": 8},
    "schedules": {"mans": {"milestones": [20, 40, 60]}},
    "training": {"batch_size": 8, "iterations": 60, "seed": 4, "validation_interval": 20,
                 "validation_examples": 10, "log_interval": 5}
  })";
  const std::string input = "4 5 6\n7 8\n\n9 4 5 6 7\n";
  auto strip_wall = [](const std::string& text) {
    std::string out;
    std::istringstream is(text);
    for (std::string line; std::getline(is, line);) {
      auto j = json::parse(line);
      j.erase("wall_ms");
      out += j.dump() + "\n";
    }
    return out;
  };
  auto pipeline = [&](const std::string& name, bool resume) {
    const fs::path dir = root / name;
    if (resume) {
      cli_checked({"train", "--config", cfg.string(), "--out-dir", dir.string(), "--iterations", "40"});
      cli_checked({"train", "--config", cfg.string(), "--out-dir", dir.string(), "--resume",
                   (dir / "checkpoint.ckpt").string()});
    } else {
      cli_checked({"train", "--config", cfg.string(), "--out-dir", dir.string()});
    }
    const std::string ckpt = (dir / "checkpoint.ckpt").string();
    std::string record = read_file(ckpt);
    record += strip_wall(read_file(dir / "metrics.jsonl"));
    record += read_file(dir / "validation.jsonl");
    record += cli_checked({"generate", "--checkpoint", ckpt, "--nfe", "6", "--length-beam", "2", "--noise-beam",
                           "2", "--dump-candidates", (dir / "cand.jsonl").string(), "--dump-trajectory",
                           (dir / "traj.jsonl").string()},
                          input)
                  .out;
    record += read_file(dir / "cand.jsonl") + read_file(dir / "traj.jsonl");
    const std::vector<std::string> data{"--checkpoint", ckpt, "--split", "valid"};
    auto with = [&](std::vector<std::string> head, std::vector<std::string> tail) {
      head.insert(head.end(), data.begin(), data.end());
      head.insert(head.end(), tail.begin(), tail.end());
      return head;
    };
    record += cli_checked(with({"analyze", "gap"}, {"--nfe", "3,6"})).out;
    record += cli_checked(with({"analyze", "residuals"}, {"--nfe", "4"})).out;
    record += cli_checked(with({"analyze", "sc-compare"}, {"--nfe", "2,5"})).out;
    return record;
  };
  const std::string a = pipeline("a", false), b = pipeline("b", false), c = pipeline("c", true);
  return {a == b && a == c, "two fresh runs identical: " + std::string(a == b ? "yes" : "no") +
                                ", resumed run identical: " + (a == c ? "yes" : "no") + " (" +
                                std::to_string(a.size()) + " bytes compared)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"textdiff acceptance suite"};
  Settings st;
  std::string work = (fs::temp_directory_path() / "textdiff_acceptance").string();
  std::string configs = TEXTDIFF_CONFIG_DIR;
  std::vector<int> only;
  app.add_option("--work-dir", work, "scratch directory for training runs");
  app.add_option("--configs", configs, "directory holding copy.json, reverse.json, reverse_mans.json");
  app.add_option("--only", only, "run only these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  st.work = work;
  st.configs = configs;
  fs::create_directories(st.work);

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome(const Settings&)> run;
  };
  const std::vector<Criterion> all{
      {1, "schedule algebra", schedule_algebra},
      {2, "forward moments", forward_moments},
      {3, "posterior consistency", posterior_chain},
      {4, "perturbation reduction", scp_reduction},
      {5, "gradient oracle", gradient_oracle},
      {6, "copy task learnability", copy_learnability},
      {7, "self-conditioning BLEU direction", sc_bleu_direction},
      {8, "estimation gap trend", gap_trend},
      {9, "noise scaling direction", mans_direction},
      {10, "BLEU oracle", bleu_oracle},
      {11, "Shapiro-Wilk calibration", shapiro_calibration},
      {12, "residual pipeline recovery", residual_recovery},
      {13, "MBR oracle", mbr_oracle},
      {14, "reproducibility", reproducibility},
  };
  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(st);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail << " ("
              << fmt(secs, 3) << " s)" << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return std::min(failed, 100);
}
