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

// Command-line front end: build-graph, synth, train, eval, infer, gradcheck,
// dump-attention. Exit status 0 on success, 1 on usage errors, 2 when the
// command itself fails.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sghmer/checkpoint.hpp"
#include "sghmer/dataset_io.hpp"
#include "sghmer/gradcheck.hpp"
#include "sghmer/optim.hpp"
#include "sghmer/semgraph.hpp"
#include "sghmer/synth.hpp"
#include "sghmer/trainer.hpp"

namespace fs = std::filesystem;
using namespace sghmer;

namespace {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

int run_build_graph(const std::string& manifest, const std::string& out, const std::string& vocab_path) {
  std::vector<TokenList> labels;
  for (auto& e : read_manifest(manifest)) labels.push_back(std::move(e.tokens));
  const Vocab vocab = vocab_path.empty() ? build_vocab(labels) : Vocab::load(vocab_path);
  const SemanticGraph graph = build_graph(labels, vocab);
  save_graph(graph, out);
  std::printf("graph: %d symbols from %zu expressions -> %s\n", vocab.size(), labels.size(), out.c_str());
  return 0;
}

int run_synth(int n, std::uint64_t seed, const std::string& out) {
  if (n < 1) throw UsageError("--n must be positive");
  write_dataset(out, synth_corpus(n, seed));
  std::printf("wrote %d samples to %s\n", n, out.c_str());
  return 0;
}

int run_train(const std::string& config_path, const std::vector<std::string>& overrides, bool resume) {
  TrainConfig config;
  try {
    config = TrainConfig::load(config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
      config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  TrainOptions options;
  options.resume = resume;
  options.log = [](const std::string& line) { std::cout << line << std::endl; };
  std::cout << "epoch,step,L_symbol,L_vis,L_cls,ExpRate(val)" << std::endl;
  const TrainResult result = train(config, options);
  std::printf("best ExpRate %.2f at epoch %d: %s\n", result.best_exprate, result.best_epoch,
              result.best_checkpoint.string().c_str());
  return 0;
}

int run_eval(const std::string& ckpt, const std::string& manifest, int batch_size) {
  LoadedModel loaded = load_model(ckpt);
  const std::vector<Sample> samples = load_samples(manifest);
  if (samples.empty()) throw std::runtime_error("manifest has no samples");
  std::vector<std::vector<int>> refs;
  for (const auto& s : samples) refs.push_back(loaded.vocab.encode(s.label));
  const GreedyResult out =
      recognize(*loaded.model, samples, loaded.vocab, batch_size, loaded.config.max_decode_len);
  std::printf("ExpRate: %.2f\n", exprate(out.tokens, refs));
  return 0;
}

std::vector<Sample> inputs_from(const std::string& manifest, const std::vector<std::string>& images) {
  if (!manifest.empty()) return load_samples(manifest);
  std::vector<Sample> samples;
  for (const auto& path : images) {
    Sample s;
    s.image = read_pgm(path);
    s.name = fs::path(path).stem().string();
    s.source = SampleSource::kManifest;
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw UsageError("give --manifest or at least one --image");
  return samples;
}

int run_infer(const std::string& ckpt, const std::string& manifest, const std::vector<std::string>& images,
              int batch_size) {
  LoadedModel loaded = load_model(ckpt);
  const std::vector<Sample> samples = inputs_from(manifest, images);
  // Labels are irrelevant here; batching only needs them to be encodable.
  std::vector<Sample> unlabeled = samples;
  for (auto& s : unlabeled) s.label.clear();
  const GreedyResult out = recognize(*loaded.model, unlabeled, loaded.vocab, batch_size, loaded.config.max_decode_len);
  for (size_t i = 0; i < samples.size(); ++i) {
    std::printf("%s\t%s\n", samples[i].name.c_str(), join_tokens(loaded.vocab.decode(out.tokens[i])).c_str());
  }
  return 0;
}

int run_gradcheck(std::uint64_t seed) {
  bool ok = true;
  for (const auto& r : check_all_primitives(seed)) {
    const bool pass = r.max_rel_error < 1e-4;
    ok = ok && pass;
    std::printf("%-28s %.3e %s\n", r.name.c_str(), r.max_rel_error, pass ? "ok" : "FAIL");
  }
  for (int kernel : {1, 3}) {
    const double err = end_to_end_grad_check(seed, kernel);
    const bool pass = err < 1e-3;
    ok = ok && pass;
    std::printf("%-28s %.3e %s\n", ("end_to_end(coverage k=" + std::to_string(kernel) + ")").c_str(), err,
                pass ? "ok" : "FAIL");
  }
  return ok ? 0 : 2;
}

int run_dump_attention(const std::string& ckpt, const std::string& manifest, const std::vector<std::string>& images,
                       const std::string& out, int limit) {
  LoadedModel loaded = load_model(ckpt);
  std::vector<Sample> samples = inputs_from(manifest, images);
  if (limit > 0 && static_cast<int>(samples.size()) > limit) samples.resize(static_cast<size_t>(limit));
  for (auto& s : samples) s.label.clear();
  // One sample per batch so each map covers exactly that sample's grid.
  for (const auto& s : samples) {
    const GreedyResult r = recognize(*loaded.model, {s}, loaded.vocab, 1, loaded.config.max_decode_len, true);
    const int h = round_up_to_multiple(static_cast<int>(s.image.rows())) / kDownsample;
    const int w = round_up_to_multiple(static_cast<int>(s.image.cols())) / kDownsample;
    dump_attention(out, s.name, r.alphas[0], h, w);
    std::printf("%s\t%zu maps\t%s\n", s.name.c_str(), r.alphas[0].size(),
                join_tokens(loaded.vocab.decode(r.tokens[0])).c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic-graph-regularized handwritten math expression recognizer", "sghmer"};
  app.require_subcommand(1);

  std::string manifest, out, vocab_path, config_path, ckpt;
  std::vector<std::string> overrides, images;
  int n = 0, batch_size = 8, limit = 0;
  std::uint64_t seed = 1;
  bool resume = false;

  auto* build_graph_cmd = app.add_subcommand("build-graph", "Build the symbol co-occurrence graph of a manifest");
  build_graph_cmd->add_option("--manifest", manifest, "Training manifest")->required();
  build_graph_cmd->add_option("--out", out, "Graph file to write")->required();
  build_graph_cmd->add_option("--vocab", vocab_path, "Use this vocab file instead of the manifest's symbols");

  auto* synth_cmd = app.add_subcommand("synth", "Render a synthetic dataset");
  synth_cmd->add_option("--n", n, "Number of samples")->required();
  synth_cmd->add_option("--seed", seed, "Random seed")->required();
  synth_cmd->add_option("--out", out, "Output directory")->required();

  auto* train_cmd = app.add_subcommand("train", "Train a recognizer");
  train_cmd->add_option("--config", config_path, "Config file")->required();
  train_cmd->add_option("--set", overrides, "Override a config key (key=value)");
  train_cmd->add_flag("--resume", resume, "Continue from out_dir/last.ckpt");

  auto* eval_cmd = app.add_subcommand("eval", "Report ExpRate of a checkpoint on a manifest");
  eval_cmd->add_option("--ckpt", ckpt, "Checkpoint")->required();
  eval_cmd->add_option("--manifest", manifest, "Labeled manifest")->required();
  eval_cmd->add_option("--batch-size", batch_size, "Decoding batch size");

  auto* infer_cmd = app.add_subcommand("infer", "Recognize images");
  infer_cmd->add_option("--ckpt", ckpt, "Checkpoint")->required();
  infer_cmd->add_option("--manifest", manifest, "Manifest of images");
  infer_cmd->add_option("--image", images, "PGM image (repeatable)");
  infer_cmd->add_option("--batch-size", batch_size, "Decoding batch size");

  auto* gradcheck_cmd = app.add_subcommand("gradcheck", "Finite-difference check of every primitive and the model");
  gradcheck_cmd->add_option("--seed", seed, "Random seed");

  auto* dump_cmd = app.add_subcommand("dump-attention", "Write per-step attention heatmaps");
  dump_cmd->add_option("--ckpt", ckpt, "Checkpoint")->required();
  dump_cmd->add_option("--manifest", manifest, "Manifest of images");
  dump_cmd->add_option("--image", images, "PGM image (repeatable)");
  dump_cmd->add_option("--out", out, "Output directory")->required();
  dump_cmd->add_option("--limit", limit, "Only the first N samples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (build_graph_cmd->parsed()) return run_build_graph(manifest, out, vocab_path);
    if (synth_cmd->parsed()) return run_synth(n, seed, out);
    if (train_cmd->parsed()) return run_train(config_path, overrides, resume);
    if (eval_cmd->parsed()) return run_eval(ckpt, manifest, batch_size);
    if (infer_cmd->parsed()) return run_infer(ckpt, manifest, images, batch_size);
    if (gradcheck_cmd->parsed()) return run_gradcheck(seed);
    if (dump_cmd->parsed()) return run_dump_attention(ckpt, manifest, images, out, limit);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n" << app.help();
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
