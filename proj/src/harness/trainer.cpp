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

#include "sghmer/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "sghmer/checkpoint.hpp"
#include "sghmer/dataset_io.hpp"
#include "sghmer/optim.hpp"
#include "sghmer/sam.hpp"
#include "sghmer/synth.hpp"

namespace sghmer {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kStateDivider = "--- state ---\n";
constexpr const char* kLogHeader = "epoch,step,L_symbol,L_vis,L_cls,ExpRate(val)";

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string log_row(const EpochLog& e) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d,%ld,%.6f,%.6f,%.6f,%.2f", e.epoch, e.step, e.l_symbol, e.l_vis, e.l_cls,
                e.exprate);
  return buf;
}

struct TrainerState {
  int epoch = 0;  // last completed epoch
  long global_step = 0;
  double best_exprate = -1;
  int best_epoch = 0;

  std::string to_text() const {
    return "epoch = " + std::to_string(epoch) + "\nglobal_step = " + std::to_string(global_step) +
           "\nbest_exprate = " + format_double(best_exprate) + "\nbest_epoch = " + std::to_string(best_epoch) + "\n";
  }

  static TrainerState parse(const std::string& text) {
    TrainerState s;
    std::istringstream in(text);
    std::string key, eq, value;
    while (in >> key >> eq >> value) {
      if (key == "epoch") s.epoch = std::stoi(value);
      else if (key == "global_step") s.global_step = std::stol(value);
      else if (key == "best_exprate") s.best_exprate = std::stod(value);
      else if (key == "best_epoch") s.best_epoch = std::stoi(value);
      else throw std::runtime_error("checkpoint state: unknown key '" + key + "'");
    }
    return s;
  }
};

std::vector<Sample> load_split(const std::string& manifest, int synth_count, std::uint64_t seed, const char* split) {
  if (!manifest.empty()) return load_samples(manifest);
  if (synth_count > 0) return synth_corpus(synth_count, seed);
  throw std::invalid_argument(std::string("config: no ") + split + " data (set data." + split + "_manifest or data." +
                              split + "_synth)");
}

std::vector<TokenList> labels_of(const std::vector<Sample>& samples) {
  std::vector<TokenList> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.label);
  return out;
}

std::vector<std::vector<int>> encode_all(const std::vector<Sample>& samples, const Vocab& vocab) {
  std::vector<std::vector<int>> out;
  for (const auto& s : samples) out.push_back(vocab.encode(s.label));
  return out;
}

// The output directory is left out so a checkpoint does not depend on where
// it was written.
std::string stored_config_text(TrainConfig config) {
  config.out_dir.clear();
  return config.to_text();
}

Checkpoint snapshot(const ParamSet<float>& params, const Adadelta<float>& opt, const TrainConfig& config,
                    const TrainerState& state, const Vocab& vocab) {
  Checkpoint ckpt = Checkpoint::from_params(params);
  opt.save_to(ckpt, params);
  ckpt.config = stored_config_text(config) + std::string(kStateDivider) + state.to_text();
  ckpt.vocab = vocab.to_text();
  return ckpt;
}

std::vector<std::vector<const Sample*>> batches_in_order(const std::vector<Sample>& samples,
                                                         const std::vector<size_t>& order, int batch_size) {
  std::vector<std::vector<const Sample*>> out;
  for (size_t i = 0; i < order.size(); i += static_cast<size_t>(batch_size)) {
    std::vector<const Sample*> chunk;
    for (size_t j = i; j < std::min(order.size(), i + static_cast<size_t>(batch_size)); ++j) {
      chunk.push_back(&samples[order[j]]);
    }
    out.push_back(std::move(chunk));
  }
  return out;
}

// Mean |cos - G| of each SAM branch over every training pair, with the
// parameters frozen and batchnorm statistics restored afterwards.
std::pair<double, double> probe_sam_gap(Recognizer<float>& model, SemanticAwareModule<float>& sam,
                                        const std::vector<Sample>& samples, const Vocab& vocab,
                                        const CorrelationMatrix& r, int batch_size) {
  NoGradGuard no_grad;
  std::vector<std::pair<Tensor<float>, Tensor<float>::Vector>> saved;
  for (const ParamSet<float>* set : {&model.params(), &sam.params()}) {
    for (const auto& [name, t] : set->entries()) {
      if (!t.requires_grad()) saved.emplace_back(t, t.values());
    }
  }
  std::vector<size_t> order(samples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  double vis = 0, cls = 0, weight = 0;
  for (const auto& chunk : batches_in_order(samples, order, batch_size)) {
    const Batch batch = make_batch(chunk, vocab);
    const TeacherForced<float> tf = model.forward_teacher_forced(batch, model.encode(batch, BnMode::kTrain));
    const SamTargets targets = build_sam_targets(batch, r);
    const SamOutput<float> out = sam.losses(tf, batch, targets);
    double pairs = 0;
    for (Index n : targets.counts) pairs += static_cast<double>(n * n);
    vis += out.gap_vis * pairs;
    cls += out.gap_cls * pairs;
    weight += pairs;
  }
  for (auto& [t, v] : saved) t.values() = v;
  return {vis / weight, cls / weight};
}

}  // namespace

std::pair<std::string, std::string> split_config_block(const std::string& block) {
  const auto at = block.find(kStateDivider);
  if (at == std::string::npos) return {block, std::string()};
  return {block.substr(0, at), block.substr(at + kStateDivider.size())};
}

ModelConfig model_config(const TrainConfig& config, int vocab_size) {
  ModelConfig m;
  m.vocab_size = vocab_size;
  m.encoder = config.encoder;
  m.decoder = config.decoder;
  return m;
}

Dataset prepare_dataset(const TrainConfig& config) {
  Dataset ds;
  ds.train = load_split(config.train_manifest, config.train_synth, config.synth_seed, "train");
  if (ds.train.empty()) throw std::invalid_argument("training set is empty");
  ds.val = config.val_is_train ? ds.train : load_split(config.val_manifest, config.val_synth, config.synth_seed + 1, "val");
  if (ds.val.empty()) throw std::invalid_argument("validation set is empty");

  if (!config.graph.empty()) {
    ds.graph = load_graph(config.graph);
    ds.vocab = ds.graph.vocab;
    for (const auto* split : {&ds.train, &ds.val}) {
      for (const auto& s : *split) {
        for (const auto& tok : s.label) {
          if (!ds.vocab.contains(tok) || ds.vocab.id(tok) < Vocab::kReserved) {
            throw std::invalid_argument("vocab mismatch: dataset symbol '" + tok + "' is not in graph " + config.graph);
          }
        }
      }
    }
  } else {
    std::vector<TokenList> all = labels_of(ds.train);
    const std::vector<TokenList> val = labels_of(ds.val);
    all.insert(all.end(), val.begin(), val.end());
    ds.vocab = build_vocab(all);
    ds.graph = build_graph(labels_of(ds.train), ds.vocab);
  }
  return ds;
}

GreedyResult recognize(Recognizer<float>& model, const std::vector<Sample>& samples, const Vocab& vocab,
                       int batch_size, int max_len, bool record_alpha) {
  GreedyResult all;
  std::vector<size_t> order(samples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (const auto& chunk : batches_in_order(samples, order, batch_size)) {
    const Batch batch = make_batch(chunk, vocab);
    FeatureMap<float> fm;
    {
      NoGradGuard no_grad;
      fm = model.encode(batch, BnMode::kEval);
    }
    GreedyResult part = model.decode_greedy(fm, max_len, record_alpha);
    for (auto& t : part.tokens) all.tokens.push_back(std::move(t));
    for (auto& a : part.alphas) all.alphas.push_back(std::move(a));
  }
  return all;
}

LoadedModel load_model(const fs::path& path) {
  const Checkpoint ckpt = Checkpoint::load(path);
  LoadedModel out;
  out.config = TrainConfig::parse(split_config_block(ckpt.config).first);
  out.vocab = Vocab::from_text(ckpt.vocab);
  out.model = std::make_unique<Recognizer<float>>(model_config(out.config, out.vocab.size()), out.config.seed);
  load_into(out.model->params(), ckpt);
  return out;
}

TrainResult train(const TrainConfig& config, const TrainOptions& options) {
  auto log = [&](const std::string& line) {
    if (options.log) options.log(line);
  };
  const fs::path out_dir = config.out_dir;
  fs::create_directories(out_dir);
  const Dataset ds = prepare_dataset(config);
  save_graph(ds.graph, out_dir / "graph.txt");
  const SemanticGraph graph = load_graph(out_dir / "graph.txt");

  Recognizer<float> model(model_config(config, ds.vocab.size()), config.seed);
  SemanticAwareModule<float> sam(config.sam, config.encoder.out_channels, config.decoder.cls_dim, config.seed + 1);
  ParamSet<float> all = model.params();
  all.merge(sam.params());
  Adadelta<float> opt(config.rho, config.eps);

  TrainResult result;
  result.best_checkpoint = out_dir / "best.ckpt";
  result.last_checkpoint = out_dir / "last.ckpt";
  TrainerState state;
  std::vector<std::string> log_rows;
  if (options.resume) {
    const Checkpoint ckpt = Checkpoint::load(result.last_checkpoint);
    const auto [config_text, state_text] = split_config_block(ckpt.config);
    if (config_text != stored_config_text(config)) throw std::invalid_argument("resume: configuration differs from checkpoint");
    if (Vocab::from_text(ckpt.vocab) != ds.vocab) throw std::invalid_argument("resume: vocab differs from checkpoint");
    load_into(all, ckpt);
    opt.load_from(ckpt, all);
    state = TrainerState::parse(state_text);
    std::ifstream in(out_dir / "train_log.csv");
    std::string line;
    std::getline(in, line);
    while (static_cast<int>(log_rows.size()) < state.epoch && std::getline(in, line)) log_rows.push_back(line);
    log("resuming after epoch " + std::to_string(state.epoch) + " at step " + std::to_string(state.global_step));
  }

  const bool probe = config.monitor_sam_gap && sam.params().size() > 0;
  if (probe && state.global_step == 0) {
    std::tie(result.gap_vis_initial, result.gap_cls_initial) =
        probe_sam_gap(model, sam, ds.train, ds.vocab, graph.r, config.batch_size);
  }

  const long steps_per_epoch = static_cast<long>((ds.train.size() + config.batch_size - 1) / config.batch_size);
  const std::vector<std::vector<int>> val_refs = encode_all(ds.val, ds.vocab);
  for (int epoch = state.epoch + 1; epoch <= config.epochs; ++epoch) {
    std::vector<size_t> order(ds.train.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng(config.seed * 1000003ull + static_cast<std::uint64_t>(epoch)).shuffle(order);

    EpochLog row;
    row.epoch = epoch;
    for (const auto& chunk : batches_in_order(ds.train, order, config.batch_size)) {
      const Batch batch = make_batch(chunk, ds.vocab);
      const TeacherForced<float> tf = model.forward_teacher_forced(batch, model.encode(batch, BnMode::kTrain));
      const Tensor<float> ce = cross_entropy(tf.logits, batch.targets, batch.target_mask);
      const SamOutput<float> so = sam.losses(tf, batch, build_sam_targets(batch, graph.r));
      const Tensor<float> loss = total_loss(ce, so.l_vis, so.l_cls);
      all.zero_grad();
      backward(loss);
      const double norm = clip_grad_norm(all, config.clip_norm);
      if (norm > config.clip_norm) {
        ++result.clipped_steps;
        log("step " + std::to_string(state.global_step + 1) + ": gradient norm " + format_double(norm) +
            " clipped to " + format_double(config.clip_norm));
      }
      if (!opt.step(all, lr_schedule(state.global_step + 1, steps_per_epoch, config.epochs))) {
        ++result.rejected_steps;
        log("step " + std::to_string(state.global_step + 1) + ": non-finite gradient, update skipped");
      }
      ++state.global_step;
      row.l_symbol += ce.item();
      row.l_vis += so.l_vis.item();
      row.l_cls += so.l_cls.item();
    }
    const double n = static_cast<double>(steps_per_epoch);
    row.l_symbol /= n;
    row.l_vis /= n;
    row.l_cls /= n;
    row.step = state.global_step;
    row.exprate = exprate(recognize(model, ds.val, ds.vocab, config.batch_size, config.max_decode_len).tokens, val_refs);
    result.epochs.push_back(row);
    log_rows.push_back(log_row(row));
    log(log_row(row));

    state.epoch = epoch;
    if (row.exprate > state.best_exprate) {
      state.best_exprate = row.exprate;
      state.best_epoch = epoch;
      snapshot(all, opt, config, state, ds.vocab).save(result.best_checkpoint);
    }
    snapshot(all, opt, config, state, ds.vocab).save(result.last_checkpoint);
    std::ofstream csv(out_dir / "train_log.csv", std::ios::binary);
    csv << kLogHeader << "\n";
    for (const auto& r : log_rows) csv << r << "\n";
    if (!csv) throw std::runtime_error("cannot write " + (out_dir / "train_log.csv").string());
    if (options.stop_after_epoch != 0 && epoch >= options.stop_after_epoch) break;
  }

  if (probe) {
    std::tie(result.gap_vis_final, result.gap_cls_final) =
        probe_sam_gap(model, sam, ds.train, ds.vocab, graph.r, config.batch_size);
  }
  result.best_exprate = state.best_exprate;
  result.best_epoch = state.best_epoch;
  result.steps = state.global_step;
  return result;
}

}  // namespace sghmer
