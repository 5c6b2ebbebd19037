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

#include "sghmer/batch.hpp"

#include <algorithm>
#include <stdexcept>

namespace sghmer {

int round_up_to_multiple(int value, int multiple) { return (value + multiple - 1) / multiple * multiple; }

Batch make_batch(const std::vector<const Sample*>& samples, const Vocab& vocab) {
  if (samples.empty()) throw std::invalid_argument("make_batch: no samples");
  Batch batch;
  batch.size = static_cast<int>(samples.size());
  int max_h = 0, max_w = 0, max_len = 0;
  std::vector<std::vector<int>> ids;
  for (const Sample* s : samples) {
    max_h = std::max(max_h, static_cast<int>(s->image.rows()));
    max_w = std::max(max_w, static_cast<int>(s->image.cols()));
    ids.push_back(vocab.encode(s->label));
    max_len = std::max(max_len, static_cast<int>(ids.back().size()));
  }
  batch.height = round_up_to_multiple(max_h);
  batch.width = round_up_to_multiple(max_w);
  batch.steps = max_len + 1;

  const Eigen::Index plane = static_cast<Eigen::Index>(batch.height) * batch.width;
  batch.images = Eigen::ArrayXf::Zero(batch.size * plane);
  batch.image_mask = Eigen::ArrayXf::Zero(batch.size * plane);
  batch.targets.assign(static_cast<size_t>(batch.size * batch.steps), Vocab::kPad);
  batch.target_mask.assign(static_cast<size_t>(batch.size * batch.steps), 0.0f);
  for (int b = 0; b < batch.size; ++b) {
    const Image& img = samples[static_cast<size_t>(b)]->image;
    for (Eigen::Index r = 0; r < img.rows(); ++r) {
      const Eigen::Index offset = b * plane + r * batch.width;
      batch.images.segment(offset, img.cols()) = img.row(r).transpose();
      batch.image_mask.segment(offset, img.cols()).setOnes();
    }
    const auto& row = ids[static_cast<size_t>(b)];
    const size_t base = static_cast<size_t>(b * batch.steps);
    std::copy(row.begin(), row.end(), batch.targets.begin() + static_cast<std::ptrdiff_t>(base));
    batch.targets[base + row.size()] = Vocab::kEos;
    std::fill_n(batch.target_mask.begin() + static_cast<std::ptrdiff_t>(base), row.size() + 1, 1.0f);
    batch.lengths.push_back(static_cast<int>(row.size()));
  }
  return batch;
}

Batch make_batch(const std::vector<Sample>& samples, const Vocab& vocab) {
  std::vector<const Sample*> ptrs;
  for (const auto& s : samples) ptrs.push_back(&s);
  return make_batch(ptrs, vocab);
}

}  // namespace sghmer
