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
#include "sghmer/synth.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

namespace sghmer {
namespace {

using Model = Recognizer<double>;

ModelConfig small_config(int vocab_size, int coverage_kernel = 1) {
  ModelConfig c;
  c.vocab_size = vocab_size;
  c.encoder = {6, 4, 2, 10};
  c.decoder = {8, 8, 7, 8, coverage_kernel};
  return c;
}

Batch image_batch(int size, int height, int width, std::uint64_t seed) {
  Rng rng(seed);
  Batch b;
  b.size = size;
  b.height = height;
  b.width = width;
  b.steps = 3;
  const Index n = static_cast<Index>(size) * height * width;
  b.images = Eigen::ArrayXf::NullaryExpr(n, [&] { return static_cast<float>(rng.uniform()); });
  b.image_mask = Eigen::ArrayXf::Ones(n);
  for (int i = 0; i < size; ++i) {
    const int t1 = 3 + static_cast<int>(rng.below(4));
    b.targets.insert(b.targets.end(), {t1, 3, Vocab::kEos});
    b.target_mask.insert(b.target_mask.end(), {1, 1, 1});
    b.lengths.push_back(2);
  }
  return b;
}

TEST(Encoder, Downsamples48To3) {
  Model m(small_config(7), 1);
  FeatureMap<double> fm = m.encode(image_batch(2, 48, 48, 1), BnMode::kTrain);
  EXPECT_EQ(fm.map.shape(), (Shape{2, 10, 3, 3}));
  EXPECT_EQ(fm.features.shape(), (Shape{2, 9, 10}));
  EXPECT_EQ(fm.keys.shape(), (Shape{2, 9, 7}));
}

TEST(Encoder, AllZeroImageIsFiniteInEvalMode) {
  Model m(small_config(7), 2);
  m.encode(image_batch(3, 32, 64, 2), BnMode::kTrain);  // populate running stats
  Batch zero = image_batch(1, 32, 32, 3);
  zero.images.setZero();
  FeatureMap<double> fm = m.encode(zero, BnMode::kEval);
  EXPECT_TRUE(fm.map.values().allFinite());
}

TEST(Encoder, RejectsExtentsNotMultipleOf16) {
  Model m(small_config(7), 1);
  Tensor<double> img = Tensor<double>::zeros({1, 1, 40, 48});
  EXPECT_THROW(m.encode(img, Eigen::ArrayXf::Ones(40 * 48), BnMode::kEval), std::invalid_argument);
}

TEST(Encoder, PooledMaskMatchesBlockMaxOracle) {
  const int B = 2, H = 48, W = 64;
  Eigen::ArrayXf mask = Eigen::ArrayXf::Zero(B * H * W);
  const int valid_h[2] = {40, 17}, valid_w[2] = {33, 64};
  for (int b = 0; b < B; ++b)
    for (int y = 0; y < valid_h[b]; ++y)
      for (int x = 0; x < valid_w[b]; ++x) mask[(b * H + y) * W + x] = 1;
  const Eigen::ArrayXf pooled = pooled_mask(mask, B, H, W);
  for (int b = 0; b < B; ++b) {
    Eigen::Map<const Eigen::Array<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> plane(
        mask.data() + b * H * W, H, W);
    for (int i = 0; i < H / 16; ++i) {
      for (int j = 0; j < W / 16; ++j) {
        EXPECT_EQ(pooled[(b * (H / 16) + i) * (W / 16) + j], plane.block(16 * i, 16 * j, 16, 16).maxCoeff());
      }
    }
  }
  // Sample 0: rows 0..2 by cols 0..2 valid; sample 1: rows 0..1 all cols.
  EXPECT_EQ(pooled.segment(0, 12).sum(), 9.0f);
  EXPECT_EQ(pooled.segment(12, 12).sum(), 8.0f);
}

TEST(Attention, ZeroEnergyProjectionGivesUniformAlpha) {
  Model m(small_config(7), 3);
  m.params().at("decoder.att.w_omega").values().setZero();
  Batch b = image_batch(2, 32, 64, 4);
  FeatureMap<double> fm = m.encode(b, BnMode::kTrain);
  fm.mask[1] = 0;  // one invalid position in sample 0
  DecoderState<double> s = m.initial_state(fm);
  Tensor<double> alpha = m.attention(s.h, fm, s.coverage);
  for (int p = 0; p < 8; ++p) {
    EXPECT_NEAR(alpha.values()[p], p == 1 ? 0.0 : 1.0 / 7, 1e-15);
    EXPECT_NEAR(alpha.values()[8 + p], 1.0 / 8, 1e-15);
  }
}

TEST(Attention, SingleValidPositionTakesAllWeight) {
  Model m(small_config(7), 3);
  Batch b = image_batch(1, 32, 48, 5);
  FeatureMap<double> fm = m.encode(b, BnMode::kTrain);
  fm.mask.setZero();
  fm.mask[4] = 1;
  DecoderState<double> s = m.initial_state(fm);
  StepOutput<double> out = m.decode_step({Vocab::kSos}, s, fm);
  for (int p = 0; p < 6; ++p) EXPECT_EQ(out.alpha.values()[p], p == 4 ? 1.0 : 0.0);
  // One-hot attention reads the feature column exactly.
  for (int c = 0; c < fm.channels; ++c) EXPECT_EQ(out.v_vis.values()[c], fm.features.values()[4 * fm.channels + c]);
}

TEST(Attention, NoValidPositionIsRejected) {
  Model m(small_config(7), 3);
  FeatureMap<double> fm = m.encode(image_batch(1, 32, 32, 5), BnMode::kTrain);
  DecoderState<double> s = m.initial_state(fm);
  fm.mask.setZero();
  EXPECT_THROW(m.attention(s.h, fm, s.coverage), std::invalid_argument);
}

TEST(Attention, AlphaNormalizedOverRandomDraws) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    Model m(small_config(7, seed % 2 ? 3 : 1), seed);
    Batch b = image_batch(2, 32, 16 * (1 + static_cast<int>(rng.below(4))), seed);
    FeatureMap<double> fm = m.encode(b, BnMode::kTrain);
    for (Index i = 0; i < fm.mask.size(); ++i) fm.mask[i] = rng.coin(0.6) ? 1 : 0;
    fm.mask[0] = 1;
    fm.mask[fm.positions()] = 1;
    DecoderState<double> s = m.initial_state(fm);
    StepOutput<double> out = m.decode_step({Vocab::kSos, 4}, s, fm);
    const Index P = fm.positions();
    for (int bb = 0; bb < 2; ++bb) {
      const auto a = out.alpha.values().segment(bb * P, P).array();
      ASSERT_NEAR(a.sum(), 1.0, 1e-6);
      for (Index p = 0; p < P; ++p) {
        if (fm.mask[bb * P + p] == 0) {
          ASSERT_EQ(a[p], 0.0);
        }
      }
      const auto probs = softmax(out.logits).values().segment(bb * 7, 7);
      ASSERT_NEAR(probs.sum(), 1.0, 1e-5);
    }
  }
}

TEST(Decoder, UniformAlphaReadsMaskedMean) {
  Model m(small_config(7), 6);
  m.params().at("decoder.att.w_omega").values().setZero();
  FeatureMap<double> fm = m.encode(image_batch(1, 32, 64, 6), BnMode::kTrain);
  fm.mask[0] = 0;
  StepOutput<double> out = m.decode_step({Vocab::kSos}, m.initial_state(fm), fm);
  for (int c = 0; c < fm.channels; ++c) {
    double mean = 0;
    for (int p = 1; p < 8; ++p) mean += fm.features.values()[p * fm.channels + c];
    EXPECT_NEAR(out.v_vis.values()[c], mean / 7, 1e-14);
  }
}

TEST(Decoder, CoverageAccumulatesAttention) {
  Model m(small_config(7, 3), 7);
  FeatureMap<double> fm = m.encode(image_batch(2, 48, 48, 7), BnMode::kTrain);
  DecoderState<double> s = m.initial_state(fm);
  EXPECT_EQ(s.coverage.values().cwiseAbs().sum(), 0.0);
  Eigen::VectorXd expect = Eigen::VectorXd::Zero(s.coverage.size());
  std::vector<int> y = {Vocab::kSos, Vocab::kSos};
  for (int t = 0; t < 3; ++t) {
    StepOutput<double> out = m.decode_step(y, s, fm);
    expect += out.alpha.values();
    s = out.state;
    y = {3 + t, 4};
  }
  EXPECT_EQ(s.step, 3);
  EXPECT_EQ(s.coverage.values(), expect);
  EXPECT_GE(s.coverage.values().minCoeff(), 0.0);
}

TEST(Decoder, RejectsOutOfVocabInput) {
  Model m(small_config(7), 1);
  FeatureMap<double> fm = m.encode(image_batch(1, 32, 32, 1), BnMode::kTrain);
  EXPECT_THROW(m.decode_step({7}, m.initial_state(fm), fm), std::out_of_range);
}

TEST(TeacherForcing, SingleSymbolGivesTwoSteps) {
  Model m(small_config(7), 8);
  Batch b = image_batch(3, 32, 32, 8);
  b.steps = 2;
  b.targets = {3, 2, 4, 2, 5, 2};
  b.target_mask = {1, 1, 1, 1, 1, 1};
  b.lengths = {1, 1, 1};
  TeacherForced<double> tf = m.forward_teacher_forced(b, m.encode(b, BnMode::kTrain));
  EXPECT_EQ(tf.logits.shape(), (Shape{3 * 2, 7}));
  EXPECT_EQ(tf.v_vis.size(), 2u);
  EXPECT_EQ(tf.v_cls[0].shape(), (Shape{3, 8}));
}

TEST(TeacherForcing, BatchPermutationPermutesOutputs) {
  Model m(small_config(7), 9);
  m.encode(image_batch(4, 32, 48, 1), BnMode::kTrain);
  Batch b = image_batch(2, 32, 48, 9);
  Batch swapped = b;
  const Index plane = 32 * 48;
  swapped.images.segment(0, plane) = b.images.segment(plane, plane);
  swapped.images.segment(plane, plane) = b.images.segment(0, plane);
  std::swap_ranges(swapped.targets.begin(), swapped.targets.begin() + 3, swapped.targets.begin() + 3);
  TeacherForced<double> a = m.forward_teacher_forced(b, m.encode(b, BnMode::kEval));
  TeacherForced<double> c = m.forward_teacher_forced(swapped, m.encode(swapped, BnMode::kEval));
  const auto la = a.logits.matrix(6, 7), lc = c.logits.matrix(6, 7);
  EXPECT_LE((la.topRows(3) - lc.bottomRows(3)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((la.bottomRows(3) - lc.topRows(3)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Greedy, MaxLenBoundsOutputAndIsDeterministic) {
  Model m(small_config(7), 10);
  Batch b = image_batch(3, 32, 64, 10);
  FeatureMap<double> fm = m.encode(b, BnMode::kEval);
  GreedyResult one = m.decode_greedy(fm, 1);
  for (const auto& seq : one.tokens) EXPECT_LE(seq.size(), 1u);
  GreedyResult a = m.decode_greedy(fm, 30, true);
  GreedyResult c = m.decode_greedy(m.encode(b, BnMode::kEval), 30, true);
  EXPECT_EQ(a.tokens, c.tokens);
  for (const auto& seq : a.tokens) {
    EXPECT_LE(seq.size(), 30u);
    for (int id : seq) {
      EXPECT_GE(id, Vocab::kReserved);
      EXPECT_LT(id, 7);
    }
  }
  EXPECT_THROW(m.decode_greedy(fm, 0), std::invalid_argument);
}

TEST(Greedy, AttentionDumpWritesScaledHeatmaps) {
  const auto dir = std::filesystem::temp_directory_path() / "sghmer_attention_dump";
  std::filesystem::remove_all(dir);
  Eigen::ArrayXd a(4);
  a << 0.1, 0.2, 0.3, 0.4;
  dump_attention(dir, "s0", {a, a.reverse()}, 2, 2);
  std::ifstream in(dir / "s0_1.pgm", std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string header = "P5\n2 2\n255\n";
  ASSERT_EQ(content.size(), header.size() + 4);
  EXPECT_EQ(content.substr(0, header.size()), header);
  const unsigned char expect[4] = {255, 191, 128, 64};
  for (int i = 0; i < 4; ++i) EXPECT_EQ(static_cast<unsigned char>(content[header.size() + i]), expect[i]);
}

TEST(GradCheck, EndToEndTinyModel) {
  const auto start = std::chrono::steady_clock::now();
  EXPECT_LT(end_to_end_grad_check(1, 1), 1e-3);
  EXPECT_LT(end_to_end_grad_check(2, 3), 1e-3);
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 60.0);
}

TEST(Recognizer, DefaultProfileDimensions) {
  ModelConfig c;
  c.vocab_size = 40;
  Recognizer<float> m(c, 1);
  EXPECT_EQ(m.params().at("decoder.embed").shape(), (Shape{40, 256}));
  EXPECT_EQ(m.params().at("decoder.cls.w_h").shape(), (Shape{256, 256}));
  EXPECT_EQ(m.params().at("decoder.att.w_f").shape(), (Shape{512, 128}));
  for (const auto& name : m.params().names()) {
    EXPECT_TRUE(name.rfind("encoder.", 0) == 0 || name.rfind("decoder.", 0) == 0) << name;
  }
}

}  // namespace
}  // namespace sghmer
