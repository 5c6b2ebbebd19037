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
#include <string>
#include <vector>

#include "sghmer/batch.hpp"
#include "sghmer/ops.hpp"
#include "sghmer/param_set.hpp"

namespace sghmer {

struct EncoderConfig {
  int stem_channels = 24;
  int growth = 12;
  int layers_per_block = 4;
  int out_channels = 128;  // C
};

struct DecoderConfig {
  int embed_dim = 256;
  int hidden_dim = 256;
  int attention_dim = 512;
  int cls_dim = 256;
  int coverage_kernel = 1;  // 1 maps each position's coverage independently
};

struct ModelConfig {
  int vocab_size = 0;
  EncoderConfig encoder;
  DecoderConfig decoder;
};

inline constexpr int kDownsample = 16;

// Encoder output. Positions are flattened row-major over the H' x W' grid.
template <typename S>
struct FeatureMap {
  using Mask = Eigen::Array<S, Eigen::Dynamic, 1>;

  int batch = 0, height = 0, width = 0, channels = 0;
  Tensor<S> map;       // [B, C, H', W']
  Tensor<S> features;  // [B, P, C]
  Tensor<S> keys;      // [B, P, A]: W_f F + b
  Mask mask;           // [B, P]: 16x16 max pool of the image mask

  int positions() const { return height * width; }
};

template <typename S>
struct DecoderState {
  Tensor<S> h;         // [B, hidden]
  Tensor<S> coverage;  // [B, P]: sum of all earlier attention maps
  int step = 0;
};

template <typename S>
struct StepOutput {
  Tensor<S> logits;  // [B, N]; p_symbol = softmax(logits)
  Tensor<S> v_vis;   // [B, C]
  Tensor<S> v_cls;   // [B, cls]
  Tensor<S> alpha;   // [B, P]
  DecoderState<S> state;
};

template <typename S>
struct TeacherForced {
  Tensor<S> logits;               // [B * steps, N], sample-major
  std::vector<Tensor<S>> v_vis;   // per step, [B, C]
  std::vector<Tensor<S>> v_cls;   // per step, [B, cls]
  std::vector<Tensor<S>> alphas;  // per step, [B, P]
};

struct GreedyResult {
  std::vector<std::vector<int>> tokens;  // eos excluded
  // alphas[b][t] holds the attention map of sample b at step t when recorded.
  std::vector<std::vector<Eigen::ArrayXd>> alphas;
};

// DenseNet-lite encoder plus the coverage-attention two-GRU decoder. All
// parameters live in one ParamSet under "encoder." and "decoder.".
template <typename S>
class Recognizer {
 public:
  Recognizer(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  ParamSet<S>& params() { return params_; }
  const ParamSet<S>& params() const { return params_; }

  // images [B, 1, H, W] with H and W multiples of 16; image_mask [B * H * W].
  FeatureMap<S> encode(const Tensor<S>& images, const Eigen::ArrayXf& image_mask, BnMode mode);
  FeatureMap<S> encode(const Batch& batch, BnMode mode);

  DecoderState<S> initial_state(const FeatureMap<S>& fm) const;
  Tensor<S> attention(const Tensor<S>& query_h, const FeatureMap<S>& fm, const Tensor<S>& coverage) const;
  StepOutput<S> decode_step(const std::vector<int>& y_prev, const DecoderState<S>& state,
                            const FeatureMap<S>& fm) const;
  TeacherForced<S> forward_teacher_forced(const Batch& batch, const FeatureMap<S>& fm) const;
  GreedyResult decode_greedy(const FeatureMap<S>& fm, int max_len = 200, bool record_alpha = false) const;

 private:
  Tensor<S> bn_relu(const std::string& prefix, const Tensor<S>& x, BnMode mode);
  void add_bn(const std::string& prefix, Index features);
  void add_conv(const std::string& name, Index out, Index in, Index k, Rng& rng);
  void add_linear(const std::string& prefix, Index out, Index in, Rng& rng, bool bias = true);
  const Tensor<S>& p(const std::string& name) const { return params_.at(name); }

  ModelConfig config_;
  ParamSet<S> params_;
  std::map<std::string, BatchNormStats<S>> bn_;
  std::vector<int> block_widths_;
};

Eigen::ArrayXf pooled_mask(const Eigen::ArrayXf& image_mask, int batch, int height, int width);

// One P5 heatmap per step named "<name>_<t>.pgm", pixel = round(255·α / max α).
void dump_attention(const std::filesystem::path& dir, const std::string& name,
                    const std::vector<Eigen::ArrayXd>& alphas, int height, int width);

// Tiny 64-bit model (C = 8, 2x2 feature map, N = 5, T = 2) on random
// images: largest relative error between the analytic and finite-difference
// gradients of the total cross-entropy over every trainable parameter.
double end_to_end_grad_check(std::uint64_t seed = 1, int coverage_kernel = 1);

extern template class Recognizer<float>;
extern template class Recognizer<double>;

}  // namespace sghmer
