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

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "sghmer/model.hpp"
#include "sghmer/sam.hpp"

namespace sghmer {

// Training configuration. Text form is one "key = value" per line; '#'
// starts a comment. Unknown keys and malformed values are errors.
struct TrainConfig {
  std::uint64_t seed = 1;
  std::string train_manifest;  // empty: render train_synth samples instead
  std::string val_manifest;    // empty: render val_synth samples instead
  int train_synth = 0;
  int val_synth = 0;
  std::uint64_t synth_seed = 7;
  bool val_is_train = false;   // validate on the training set
  std::string graph;           // empty: build from the training labels
  std::string out_dir = "run";

  int epochs = 10;
  int batch_size = 8;
  double rho = 0.95;
  double eps = 1e-6;
  double clip_norm = 100.0;
  int max_decode_len = 200;
  bool monitor_sam_gap = false;

  EncoderConfig encoder;
  DecoderConfig decoder;
  SamConfig sam;

  // Applies one "key = value" assignment.
  void set(std::string_view key, std::string_view value);
  // Canonical text with every key, in a fixed order.
  std::string to_text() const;

  static TrainConfig parse(std::string_view text);
  static TrainConfig load(const std::filesystem::path& path);
};

}  // namespace sghmer
