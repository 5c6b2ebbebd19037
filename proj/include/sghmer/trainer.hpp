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

#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "sghmer/config.hpp"
#include "sghmer/model.hpp"
#include "sghmer/render.hpp"
#include "sghmer/semgraph.hpp"

namespace sghmer {

struct EpochLog {
  int epoch = 0;
  long step = 0;
  double l_symbol = 0;
  double l_vis = 0;
  double l_cls = 0;
  double exprate = 0;
};

struct TrainResult {
  std::filesystem::path best_checkpoint;
  std::filesystem::path last_checkpoint;
  std::vector<EpochLog> epochs;
  double best_exprate = 0;
  int best_epoch = 0;
  long steps = 0;
  long clipped_steps = 0;
  long rejected_steps = 0;
  // Mean |cos - G| over all training pairs before the first and after the
  // last update, per SAM branch (only with train.monitor_sam_gap).
  double gap_vis_initial = 0, gap_vis_final = 0;
  double gap_cls_initial = 0, gap_cls_final = 0;
};

struct TrainOptions {
  bool resume = false;  // continue from out_dir/last.ckpt
  int stop_after_epoch = 0;  // nonzero: return early after this epoch
  std::function<void(const std::string&)> log;  // progress lines; may be empty
};

struct Dataset {
  std::vector<Sample> train;
  std::vector<Sample> val;
  Vocab vocab;
  SemanticGraph graph;
};

// Loads or renders both splits, then takes the vocab and graph from the
// configured graph file (dataset symbols must all be in its vocab) or builds
// them from the labels.
Dataset prepare_dataset(const TrainConfig& config);

ModelConfig model_config(const TrainConfig& config, int vocab_size);

// Writes out_dir/{graph.txt, train_log.csv, best.ckpt, last.ckpt}.
TrainResult train(const TrainConfig& config, const TrainOptions& options = {});

// Greedy decoding of samples in fixed batches of batch_size.
GreedyResult recognize(Recognizer<float>& model, const std::vector<Sample>& samples, const Vocab& vocab,
                       int batch_size, int max_len, bool record_alpha = false);

struct LoadedModel {
  TrainConfig config;
  Vocab vocab;
  std::unique_ptr<Recognizer<float>> model;
};

// Rebuilds the recognizer stored in a checkpoint; "sam.*" and "opt.*"
// records are not needed.
LoadedModel load_model(const std::filesystem::path& checkpoint);

// Splits a checkpoint's config block into configuration and trainer state.
std::pair<std::string, std::string> split_config_block(const std::string& block);

}  // namespace sghmer
