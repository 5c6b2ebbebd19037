// Copyright 2026 The sghmer Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sghmer/checkpoint.hpp"
#include "sghmer/gradcheck.hpp"
#include "sghmer/ops.hpp"
#include "sghmer/optim.hpp"
#include "sghmer/sam.hpp"
#include "sghmer/semgraph.hpp"
#include "sghmer/synth.hpp"
#include "sghmer/trainer.hpp"

namespace fs = std::filesystem;
using namespace sghmer;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, a);
  return buf;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Context {
  fs::path config_dir;
  fs::path work_dir;
  bool verbose = false;

  TrainConfig profile(const std::string& name, const std::string& run) const {
    TrainConfig c = TrainConfig::load(config_dir / (name + ".cfg"));
    c.out_dir = (work_dir / run).string();
    fs::remove_all(c.out_dir);
    return c;
  }

  TrainOptions options() const {
    TrainOptions o;
    if (verbose) o.log = [](const std::string& line) { std::fprintf(stderr, "    %s\n", line.c_str()); };
    return o;
  }
};

Verdict gradients(const Context&) {
  const auto start = Clock::now();
  double primitive = 0;
  std::string worst;
  for (const auto& r : check_all_primitives(1)) {
    if (r.max_rel_error >= primitive) {
      primitive = r.max_rel_error;
      worst = r.name;
    }
  }
  double model = 0;
  for (int kernel : {1, 3}) model = std::max(model, end_to_end_grad_check(1, kernel));
  const double elapsed = seconds_since(start);
  return {primitive < 1e-4 && model < 1e-3 && elapsed < 60,
          "primitives max rel err " + fmt("%.2e", primitive) + " (" + worst + "), end-to-end " + fmt("%.2e", model) +
              ", " + fmt("%.1f", elapsed) + " s"};
}

// Symmetrized conditional co-occurrence computed directly from per-expression
// symbol sets.
Eigen::MatrixXd graph_oracle(const std::vector<TokenList>& corpus, const Vocab& vocab) {
  const int n = vocab.size();
  std::vector<std::set<int>> sets;
  for (const auto& e : corpus) {
    std::set<int> s{Vocab::kEos};
    for (const auto& t : e) s.insert(vocab.id(t));
    sets.push_back(std::move(s));
  }
  auto count = [&](int i, int j) {
    double c = 0;
    for (const auto& s : sets) c += (s.count(i) && s.count(j)) ? 1 : 0;
    return c;
  };
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double ni = count(i, i);
    for (int j = 0; j < n; ++j) {
      const double nj = count(j, j), nij = count(i, j);
      out(i, j) = 0.5 * ((nj > 0 ? nij / nj : 0.0) + (ni > 0 ? nij / ni : 0.0));
    }
  }
  return out;
}

Verdict graph(const Context&) {
  const std::vector<std::string>& alphabet = synth_alphabet();
  double worst = 0;
  bool structural = true;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(1000 + seed);
    // Up to 30 symbols including the three reserved ones; a few stay unused.
    std::vector<std::string> symbols = alphabet;
    rng.shuffle(symbols);
    symbols.resize(1 + rng.below(30 - Vocab::kReserved));
    const Vocab vocab(symbols);
    const size_t used = 1 + rng.below(symbols.size());
    std::vector<TokenList> corpus(1 + rng.below(200));
    for (auto& e : corpus) {
      const size_t len = rng.below(13);
      for (size_t k = 0; k < len; ++k) e.push_back(symbols[rng.below(used)]);
    }
    const SemanticGraph g = build_graph(corpus, vocab);
    worst = std::max(worst, (g.r - graph_oracle(corpus, vocab)).cwiseAbs().maxCoeff());
    structural = structural && g.r == g.r.transpose() && symmetrize(g.r) == g.r && g.r.minCoeff() >= 0 &&
                 g.r.maxCoeff() <= 1;
  }
  return {worst <= 1e-12 && structural, "50 corpora, max |R - oracle| " + fmt("%.1e", worst) +
                                            (structural ? ", symmetric, idempotent, in [0,1]" : ", structure WRONG")};
}

Verdict sam_fixtures(const Context&) {
  using T = Tensor<double>;
  Eigen::MatrixXd g(2, 2);
  g << 1, 0.5, 0.5, 1;
  const double loss = sam_loss<double>({T::from({2, 2}, {1, 0, 1, 1})}, {g}, LossReduction::kMean).item();
  const double same = pairwise_cosine(T::from({2, 3}, {1, 2, 3, 2, 4, 6})).values()[1];
  const double ortho = pairwise_cosine(T::from({2, 2}, {1, 0, 0, 1})).values()[1];
  const double diag = pairwise_cosine(T::from({2, 2}, {1, 0, 1, 1})).values()[1];
  const bool pass = std::abs(loss - 0.021447) <= 1e-5 && std::abs(same - 1) <= 1e-12 && std::abs(ortho) <= 1e-12 &&
                    std::abs(diag - 1 / std::numbers::sqrt2) <= 1e-12;
  return {pass, "loss " + fmt("%.6f", loss) + ", cos " + fmt("%.6f", same) + " / " + fmt("%.6f", ortho) + " / " +
                    fmt("%.6f", diag)};
}

Verdict overfit(const Context& ctx) {
  const auto start = Clock::now();
  TrainConfig c = ctx.profile("overfit32", "overfit32");
  c.monitor_sam_gap = true;
  const TrainResult r = train(c, ctx.options());
  const double elapsed = seconds_since(start);

  long first_low_ce = -1;
  for (const auto& e : r.epochs) {
    if (e.l_symbol < 0.01) {
      first_low_ce = e.step;
      break;
    }
  }
  long first_perfect = -1;
  for (const auto& e : r.epochs) {
    if (e.exprate == 100.0) {
      first_perfect = e.step;
      break;
    }
  }
  const double drop_vis = 1 - r.gap_vis_final / r.gap_vis_initial;
  const double drop_cls = 1 - r.gap_cls_final / r.gap_cls_initial;
  const bool pass = r.steps <= 2000 && first_perfect > 0 && first_low_ce > 0 && drop_vis >= 0.5 &&
                    drop_cls >= 0.5 && elapsed < 15 * 60;
  return {pass, "100% ExpRate at step " + std::to_string(first_perfect) + ", L_symbol<0.01 at step " +
                    std::to_string(first_low_ce) + ", gap drop vis " + fmt("%.0f%%", 100 * drop_vis) + " cls " +
                    fmt("%.0f%%", 100 * drop_cls) + ", " + fmt("%.0f", elapsed) + " s"};
}

Verdict parity(const Context& ctx) {
  TrainConfig c = ctx.profile("overfit32", "parity");
  c.epochs = 20;
  const TrainResult r = train(c, ctx.options());

  Checkpoint stripped = Checkpoint::load(r.last_checkpoint);
  const size_t removed = stripped.erase_prefix("sam.") + stripped.erase_prefix("opt.sam.");
  const fs::path stripped_path = fs::path(c.out_dir) / "no_sam.ckpt";
  stripped.save(stripped_path);

  std::vector<Sample> samples = synth_corpus(100, 4242);
  for (auto& s : samples) s.label.clear();
  LoadedModel full = load_model(r.last_checkpoint);
  LoadedModel bare = load_model(stripped_path);
  const GreedyResult a = recognize(*full.model, samples, full.vocab, 8, c.max_decode_len, true);
  const GreedyResult b = recognize(*bare.model, samples, bare.vocab, 8, c.max_decode_len, true);
  int same = 0;
  for (size_t i = 0; i < samples.size(); ++i) {
    bool eq = a.tokens[i] == b.tokens[i] && a.alphas[i].size() == b.alphas[i].size();
    for (size_t t = 0; eq && t < a.alphas[i].size(); ++t) eq = (a.alphas[i][t] == b.alphas[i][t]).all();
    same += eq ? 1 : 0;
  }
  return {removed > 0 && same == 100,
          std::to_string(removed) + " sam records removed, " + std::to_string(same) +
              "/100 samples with identical tokens and attention"};
}

Verdict ablation(const Context& ctx) {
  const auto start = Clock::now();
  struct Arm {
    const char* name;
    bool vis, cls;
  };
  const std::vector<Arm> arms = {{"baseline", false, false}, {"vis", true, false}, {"cls", false, true}, {"sam", true, true}};
  std::map<std::string, double> mean;
  std::string detail;
  for (const auto& arm : arms) {
    double sum = 0;
    std::string runs;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      TrainConfig c = ctx.profile("synth-small", std::string("ablation_") + arm.name + "_" + std::to_string(seed));
      c.seed = seed;
      c.sam.enable_vis = arm.vis;
      c.sam.enable_cls = arm.cls;
      const TrainResult r = train(c, ctx.options());
      const double rate = r.epochs.back().exprate;
      sum += rate;
      runs += (runs.empty() ? "" : "/") + fmt("%.1f", rate);
      std::fprintf(stderr, "  ablation %s seed %llu: final ExpRate %.2f (%.0f s elapsed)\n", arm.name,
                   static_cast<unsigned long long>(seed), rate, seconds_since(start));
    }
    mean[arm.name] = sum / 3;
    detail += std::string(detail.empty() ? "" : ", ") + arm.name + " " + fmt("%.2f", mean[arm.name]) + " (" + runs + ")";
  }
  const double elapsed = seconds_since(start);
  const double base = mean["baseline"];
  const bool pass = mean["sam"] >= base && mean["vis"] >= base - 0.5 && mean["cls"] >= base - 0.5 && elapsed < 7200;
  return {pass, detail + ", " + fmt("%.0f", elapsed) + " s"};
}

Verdict schedule(const Context&) {
  const long spe = 250, epochs = 18;
  const bool endpoints = lr_schedule(0, spe, epochs) == 0.0 && lr_schedule(spe, spe, epochs) == 1.0 &&
                         lr_schedule(spe * epochs, spe, epochs) == 0.0;
  ParamSet<float> params;
  Tensor<float> w = params.add("w", Tensor<float>::zeros({1}, true));
  w.grad()[0] = 1.0f;
  Adadelta<float> opt(0.95, 1e-6);
  opt.step(params, 1.0);
  const double first = w.values()[0];
  return {endpoints && std::abs(first - -0.0044721) <= 1e-6,
          std::string(endpoints ? "lr endpoints 0/1/0 exact" : "lr endpoints WRONG") + ", Adadelta first step " +
              fmt("%.7f", first)};
}

Verdict determinism(const Context& ctx) {
  std::vector<std::string> best, last;
  for (const char* run : {"determinism_a", "determinism_b"}) {
    TrainConfig c = ctx.profile("overfit32", run);
    c.epochs = 30;
    const TrainResult r = train(c, ctx.options());
    best.push_back(slurp(r.best_checkpoint));
    last.push_back(slurp(r.last_checkpoint));
  }
  const bool pass = !last[0].empty() && best[0] == best[1] && last[0] == last[1];
  return {pass, "two 30-epoch runs: best.ckpt " + std::string(best[0] == best[1] ? "identical" : "DIFFERS") +
                    ", last.ckpt " + (last[0] == last[1] ? "identical" : "DIFFERS") + " (" +
                    std::to_string(last[0].size()) + " bytes)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria", "acceptance"};
  Context ctx;
  ctx.config_dir = SGHMER_CONFIG_DIR;
  ctx.work_dir = "acceptance_runs";
  std::vector<int> only;
  app.add_option("--config-dir", ctx.config_dir, "Directory holding the profile configs");
  app.add_option("--work-dir", ctx.work_dir, "Scratch directory for training runs");
  app.add_option("--only", only, "Run only these criteria")->check(CLI::Range(1, 8));
  app.add_flag("--verbose", ctx.verbose, "Echo training progress to stderr");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, std::function<Verdict(const Context&)>>> criteria = {
      {"gradient checks", gradients},
      {"semantic graph oracle", graph},
      {"SAM loss and cosine fixtures", sam_fixtures},
      {"overfit32", overfit},
      {"inference without SAM weights", parity},
      {"synth-small ablation", ablation},
      {"schedule and optimizer step", schedule},
      {"deterministic checkpoints", determinism},
  };
  fs::create_directories(ctx.work_dir);
  bool all = true;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Verdict v;
    try {
      v = criteria[i].second(ctx);
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    all = all && v.pass;
    std::printf("criterion %d %s: %s: %s\n", id, v.pass ? "PASS" : "FAIL", criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
