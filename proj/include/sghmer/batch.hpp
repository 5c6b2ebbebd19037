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

#include <vector>

#include <Eigen/Core>

#include "sghmer/render.hpp"
#include "sghmer/vocab.hpp"

namespace sghmer {

inline constexpr int kSizeMultiple = 16;

// Images are padded with background to common extents that are multiples of
// 16. Targets hold each label followed by eos, then pad ids.
struct Batch {
  int size = 0;
  int height = 0;
  int width = 0;
  int steps = 0;                   // longest label + 1
  Eigen::ArrayXf images;           // [size, 1, height, width]
  Eigen::ArrayXf image_mask;       // [size, height, width]
  std::vector<int> targets;        // [size, steps]
  std::vector<float> target_mask;  // [size, steps]
  std::vector<int> lengths;        // label length per sample, eos excluded

  int target(int b, int t) const { return targets[static_cast<size_t>(b * steps + t)]; }
  bool valid(int b, int t) const { return target_mask[static_cast<size_t>(b * steps + t)] != 0.0f; }
};

int round_up_to_multiple(int value, int multiple = kSizeMultiple);

// Throws if samples is empty or a label contains a token outside vocab.
Batch make_batch(const std::vector<const Sample*>& samples, const Vocab& vocab);
Batch make_batch(const std::vector<Sample>& samples, const Vocab& vocab);

}  // namespace sghmer
