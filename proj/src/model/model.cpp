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

#include "sghmer/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "sghmer/gradcheck.hpp"

namespace sghmer {

namespace {

std::string block_layer(int block, int layer) {
  return "encoder.block" + std::to_string(block) + ".layer" + std::to_string(layer);
}

}  // namespace

template <typename S>
Recognizer<S>::Recognizer(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  if (config.vocab_size <= Vocab::kReserved) throw std::invalid_argument("Recognizer: vocab_size too small");
  const EncoderConfig& e = config.encoder;
  const DecoderConfig& d = config.decoder;
  if (d.coverage_kernel < 1 || d.coverage_kernel % 2 == 0) {
    throw std::invalid_argument("Recognizer: coverage kernel must be odd and positive");
  }
  Rng rng(seed);

  add_conv("encoder.stem.conv", e.stem_channels, 1, 3, rng);
  Index channels = e.stem_channels;
  for (int block = 1; block <= 3; ++block) {
    for (int layer = 1; layer <= e.layers_per_block; ++layer) {
      const std::string name = block_layer(block, layer);
      add_bn(name + ".bn", channels);
      add_conv(name + ".conv", e.growth, channels, 3, rng);
      channels += e.growth;
    }
    block_widths_.push_back(static_cast<int>(channels));
    if (block < 3) {
      const std::string name = "encoder.trans" + std::to_string(block);
      const Index reduced = std::max<Index>(1, channels / 2);
      add_bn(name + ".bn", channels);
      add_conv(name + ".conv", reduced, channels, 1, rng);
      channels = reduced;
    }
  }
  add_bn("encoder.out.bn", channels);
  add_conv("encoder.out.conv", e.out_channels, channels, 1, rng);

  const Index C = e.out_channels, A = d.attention_dim, H = d.hidden_dim, N = config.vocab_size;
  params_.add("decoder.embed", xavier_uniform<S>({N, d.embed_dim}, N, d.embed_dim, rng));
  add_linear("decoder.init", H, C, rng);
  params_.add("decoder.gru1.w", xavier_uniform<S>({3 * H, d.embed_dim}, d.embed_dim, H, rng));
  params_.add("decoder.gru1.u", xavier_uniform<S>({3 * H, H}, H, H, rng));
  params_.add("decoder.gru1.b", Tensor<S>::zeros({3 * H}, true));
  params_.add("decoder.att.w_f", xavier_uniform<S>({A, C}, C, A, rng));
  params_.add("decoder.att.b", Tensor<S>::zeros({A}, true));
  params_.add("decoder.att.w_q", xavier_uniform<S>({A, H}, H, A, rng));
  const Index k = d.coverage_kernel;
  params_.add("decoder.att.w_cov", xavier_uniform<S>({A, 1, k, k}, k * k, A, rng));
  params_.add("decoder.att.w_omega", xavier_uniform<S>({A}, A, 1, rng));
  params_.add("decoder.gru2.w", xavier_uniform<S>({3 * H, C}, C, H, rng));
  params_.add("decoder.gru2.u", xavier_uniform<S>({3 * H, H}, H, H, rng));
  params_.add("decoder.gru2.b", Tensor<S>::zeros({3 * H}, true));
  params_.add("decoder.cls.w_e", xavier_uniform<S>({d.cls_dim, d.embed_dim}, d.embed_dim, d.cls_dim, rng));
  params_.add("decoder.cls.w_h", xavier_uniform<S>({d.cls_dim, H}, H, d.cls_dim, rng));
  params_.add("decoder.cls.w_v", xavier_uniform<S>({d.cls_dim, C}, C, d.cls_dim, rng));
  params_.add("decoder.cls.b", Tensor<S>::zeros({d.cls_dim}, true));
  add_linear("decoder.out", N, d.cls_dim, rng);
}

template <typename S>
void Recognizer<S>::add_bn(const std::string& prefix, Index features) {
  params_.add(prefix + ".gamma", Tensor<S>::full({features}, S(1), true));
  params_.add(prefix + ".beta", Tensor<S>::zeros({features}, true));
  BatchNormStats<S> stats(features);
  params_.add(prefix + ".running_mean", stats.running_mean);
  params_.add(prefix + ".running_var", stats.running_var);
  bn_.emplace(prefix, std::move(stats));
}

template <typename S>
void Recognizer<S>::add_conv(const std::string& name, Index out, Index in, Index k, Rng& rng) {
  params_.add(name, xavier_uniform<S>({out, in, k, k}, in * k * k, out * k * k, rng));
}

template <typename S>
void Recognizer<S>::add_linear(const std::string& prefix, Index out, Index in, Rng& rng, bool bias) {
  params_.add(prefix + ".w", xavier_uniform<S>({out, in}, in, out, rng));
  if (bias) params_.add(prefix + ".b", Tensor<S>::zeros({out}, true));
}

template <typename S>
Tensor<S> Recognizer<S>::bn_relu(const std::string& prefix, const Tensor<S>& x, BnMode mode) {
  return relu(batchnorm(x, p(prefix + ".gamma"), p(prefix + ".beta"), bn_.at(prefix), mode));
}

Eigen::ArrayXf pooled_mask(const Eigen::ArrayXf& image_mask, int batch, int height, int width) {
  const int ph = height / kDownsample, pw = width / kDownsample;
  Eigen::ArrayXf out = Eigen::ArrayXf::Zero(static_cast<Index>(batch) * ph * pw);
  for (int b = 0; b < batch; ++b) {
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const float v = image_mask[(static_cast<Index>(b) * height + y) * width + x];
        float& cell = out[(static_cast<Index>(b) * ph + y / kDownsample) * pw + x / kDownsample];
        cell = std::max(cell, v);
      }
    }
  }
  return out;
}

template <typename S>
FeatureMap<S> Recognizer<S>::encode(const Tensor<S>& images, const Eigen::ArrayXf& image_mask, BnMode mode) {
  if (images.rank() != 4 || images.dim(1) != 1) {
    throw std::invalid_argument("encode: expected images [B,1,H,W], got " + shape_string(images.shape()));
  }
  const Index B = images.dim(0), H = images.dim(2), W = images.dim(3);
  if (H % kDownsample != 0 || W % kDownsample != 0) {
    throw std::invalid_argument("encode: image extents must be multiples of 16, got " + shape_string(images.shape()));
  }
  if (image_mask.size() != B * H * W) throw std::invalid_argument("encode: image mask size mismatch");

  Tensor<S> x = conv2d(images, p("encoder.stem.conv"), 2, 1);
  x = avg_pool2d(x, 2);
  for (int block = 1; block <= 3; ++block) {
    for (int layer = 1; layer <= config_.encoder.layers_per_block; ++layer) {
      const std::string name = block_layer(block, layer);
      Tensor<S> y = conv2d(bn_relu(name + ".bn", x, mode), p(name + ".conv"), 1, 1);
      x = concat<S>({x, y}, 1);
    }
    if (block < 3) {
      const std::string name = "encoder.trans" + std::to_string(block);
      x = avg_pool2d(conv2d(bn_relu(name + ".bn", x, mode), p(name + ".conv"), 1, 0), 2);
    }
  }
  x = conv2d(bn_relu("encoder.out.bn", x, mode), p("encoder.out.conv"), 1, 0);

  FeatureMap<S> fm;
  fm.batch = static_cast<int>(B);
  fm.channels = static_cast<int>(x.dim(1));
  fm.height = static_cast<int>(x.dim(2));
  fm.width = static_cast<int>(x.dim(3));
  fm.map = x;
  fm.features = permute(reshape(x, {B, fm.channels, fm.positions()}), {0, 2, 1});
  fm.keys = linear(fm.features, p("decoder.att.w_f"), p("decoder.att.b"));
  fm.mask = pooled_mask(image_mask, static_cast<int>(B), static_cast<int>(H), static_cast<int>(W)).cast<S>();
  return fm;
}

template <typename S>
FeatureMap<S> Recognizer<S>::encode(const Batch& batch, BnMode mode) {
  Tensor<S> images({batch.size, 1, batch.height, batch.width}, batch.images.cast<S>().matrix());
  return encode(images, batch.image_mask, mode);
}

template <typename S>
DecoderState<S> Recognizer<S>::initial_state(const FeatureMap<S>& fm) const {
  const Index B = fm.batch, P = fm.positions();
  // Masked mean of F as an attention map that is uniform over valid positions.
  typename Tensor<S>::Vector weights(B * P);
  for (Index b = 0; b < B; ++b) {
    const auto row = fm.mask.segment(b * P, P);
    const S count = row.sum();
    if (count <= 0) throw std::invalid_argument("initial_state: sample " + std::to_string(b) + " has no valid position");
    weights.segment(b * P, P) = (row / count).matrix();
  }
  const Tensor<S> mean_f = attend(Tensor<S>({B, P}, std::move(weights)), fm.features);
  DecoderState<S> state;
  state.h = tanh(linear(mean_f, p("decoder.init.w"), p("decoder.init.b")));
  state.coverage = Tensor<S>::zeros({B, P});
  return state;
}

template <typename S>
Tensor<S> Recognizer<S>::attention(const Tensor<S>& query_h, const FeatureMap<S>& fm,
                                   const Tensor<S>& coverage) const {
  const Index B = fm.batch, P = fm.positions(), A = config_.decoder.attention_dim;
  const Index k = config_.decoder.coverage_kernel;
  Tensor<S> cov_feat;
  if (k == 1) {
    cov_feat = linear(reshape(coverage, {B, P, 1}), reshape(p("decoder.att.w_cov"), {A, 1}));
  } else {
    Tensor<S> grid = reshape(coverage, {B, 1, fm.height, fm.width});
    Tensor<S> conv = conv2d(grid, p("decoder.att.w_cov"), 1, k / 2);
    cov_feat = permute(reshape(conv, {B, A, P}), {0, 2, 1});
  }
  Tensor<S> query = linear(query_h, p("decoder.att.w_q"));
  Tensor<S> energy = attention_energy(fm.keys, query, cov_feat, p("decoder.att.w_omega"));
  return masked_softmax(energy, fm.mask);
}

template <typename S>
StepOutput<S> Recognizer<S>::decode_step(const std::vector<int>& y_prev, const DecoderState<S>& state,
                                         const FeatureMap<S>& fm) const {
  if (static_cast<int>(y_prev.size()) != fm.batch) throw std::invalid_argument("decode_step: batch size mismatch");
  for (int y : y_prev) {
    if (y < 0 || y >= config_.vocab_size) {
      throw std::out_of_range("decode_step: symbol id " + std::to_string(y) + " outside vocab");
    }
  }
  const Tensor<S> emb = embedding(p("decoder.embed"), y_prev);
  const Tensor<S> h1 = gru_cell(emb, state.h, p("decoder.gru1.w"), p("decoder.gru1.u"), p("decoder.gru1.b"));
  StepOutput<S> out;
  out.alpha = attention(h1, fm, state.coverage);
  out.v_vis = attend(out.alpha, fm.features);
  const Tensor<S> h2 = gru_cell(out.v_vis, h1, p("decoder.gru2.w"), p("decoder.gru2.u"), p("decoder.gru2.b"));
  out.v_cls = add(add(linear(emb, p("decoder.cls.w_e")), linear(h2, p("decoder.cls.w_h"))),
                  linear(out.v_vis, p("decoder.cls.w_v"), p("decoder.cls.b")));
  out.logits = linear(out.v_cls, p("decoder.out.w"), p("decoder.out.b"));
  out.state.h = h2;
  out.state.coverage = add(state.coverage, out.alpha);
  out.state.step = state.step + 1;
  return out;
}

template <typename S>
TeacherForced<S> Recognizer<S>::forward_teacher_forced(const Batch& batch, const FeatureMap<S>& fm) const {
  if (batch.size != fm.batch) throw std::invalid_argument("forward_teacher_forced: batch size mismatch");
  TeacherForced<S> out;
  DecoderState<S> state = initial_state(fm);
  std::vector<Tensor<S>> logits;
  std::vector<int> y_prev(static_cast<size_t>(batch.size), Vocab::kSos);
  for (int t = 0; t < batch.steps; ++t) {
    StepOutput<S> step = decode_step(y_prev, state, fm);
    logits.push_back(step.logits);
    out.v_vis.push_back(step.v_vis);
    out.v_cls.push_back(step.v_cls);
    out.alphas.push_back(step.alpha);
    state = std::move(step.state);
    for (int b = 0; b < batch.size; ++b) y_prev[static_cast<size_t>(b)] = batch.target(b, t);
  }
  const Index N = config_.vocab_size;
  out.logits = reshape(permute(stack(logits), {1, 0, 2}), {static_cast<Index>(batch.size) * batch.steps, N});
  return out;
}

template <typename S>
GreedyResult Recognizer<S>::decode_greedy(const FeatureMap<S>& fm, int max_len, bool record_alpha) const {
  if (max_len < 1) throw std::invalid_argument("decode_greedy: max_len must be at least 1");
  NoGradGuard no_grad;
  const int B = fm.batch;
  const Index P = fm.positions();
  GreedyResult result;
  result.tokens.resize(static_cast<size_t>(B));
  result.alphas.resize(static_cast<size_t>(B));
  std::vector<char> done(static_cast<size_t>(B), 0);
  std::vector<int> y_prev(static_cast<size_t>(B), Vocab::kSos);
  DecoderState<S> state = initial_state(fm);
  const int N = config_.vocab_size;
  for (int t = 0; t < max_len; ++t) {
    StepOutput<S> step = decode_step(y_prev, state, fm);
    state = std::move(step.state);
    const auto logits = step.logits.matrix(B, N);
    bool all_done = true;
    for (int b = 0; b < B; ++b) {
      if (done[static_cast<size_t>(b)]) continue;
      // Lowest id wins ties; pad and sos are never emitted.
      int best = Vocab::kEos;
      for (int n = Vocab::kEos + 1; n < N; ++n) {
        if (logits(b, n) > logits(b, best)) best = n;
      }
      if (record_alpha) {
        result.alphas[static_cast<size_t>(b)].push_back(step.alpha.values().segment(b * P, P).template cast<double>().array());
      }
      if (best == Vocab::kEos) {
        done[static_cast<size_t>(b)] = 1;
      } else {
        result.tokens[static_cast<size_t>(b)].push_back(best);
        all_done = false;
      }
      y_prev[static_cast<size_t>(b)] = best;
    }
    if (all_done) break;
  }
  return result;
}

void dump_attention(const std::filesystem::path& dir, const std::string& name,
                    const std::vector<Eigen::ArrayXd>& alphas, int height, int width) {
  std::filesystem::create_directories(dir);
  for (size_t t = 0; t < alphas.size(); ++t) {
    const Eigen::ArrayXd& a = alphas[t];
    if (a.size() != static_cast<Index>(height) * width) throw std::invalid_argument("dump_attention: size mismatch");
    const double peak = a.maxCoeff();
    std::string bytes(static_cast<size_t>(a.size()), '\0');
    for (Index i = 0; i < a.size(); ++i) {
      const long v = peak > 0 ? std::lround(255.0 * a[i] / peak) : 0;
      bytes[static_cast<size_t>(i)] = static_cast<char>(std::clamp<long>(v, 0, 255));
    }
    const auto path = dir / (name + "_" + std::to_string(t) + ".pgm");
    std::ofstream out(path, std::ios::binary);
    out << "P5\n" << width << ' ' << height << "\n255\n";
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("cannot write " + path.string());
  }
}

double end_to_end_grad_check(std::uint64_t seed, int coverage_kernel) {
  ModelConfig config;
  config.vocab_size = 5;
  config.encoder = {4, 2, 1, 8};
  config.decoder = {6, 6, 5, 6, coverage_kernel};
  Recognizer<double> model(config, seed);

  Rng rng(seed + 1000);
  Batch batch;
  batch.size = 2;
  batch.height = 32;
  batch.width = 32;
  batch.steps = 2;
  batch.images = Eigen::ArrayXf::NullaryExpr(2 * 32 * 32, [&] { return static_cast<float>(rng.uniform()); });
  batch.image_mask = Eigen::ArrayXf::Ones(2 * 32 * 32);
  batch.targets = {3, Vocab::kEos, 4, Vocab::kEos};
  batch.target_mask = {1, 1, 1, 1};
  batch.lengths = {1, 1};

  auto loss = [&] {
    FeatureMap<double> fm = model.encode(batch, BnMode::kTrain);
    TeacherForced<double> tf = model.forward_teacher_forced(batch, fm);
    return cross_entropy(tf.logits, batch.targets, std::vector<double>(batch.target_mask.begin(), batch.target_mask.end()));
  };
  return grad_check<double>(loss, model.params().trainable());
}

template class Recognizer<float>;
template class Recognizer<double>;

}  // namespace sghmer
