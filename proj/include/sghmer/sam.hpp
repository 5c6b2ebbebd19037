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
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sghmer/batch.hpp"
#include "sghmer/model.hpp"
#include "sghmer/ops.hpp"
#include "sghmer/param_set.hpp"
#include "sghmer/semgraph.hpp"

namespace sghmer {

enum class LossReduction { kMean, kSum };

struct SamConfig {
  bool enable_vis = true;
  bool enable_cls = true;
  int hidden = 512;
  int dim = 256;
  LossReduction reduction = LossReduction::kMean;
};

// Linear -> BN -> ReLU -> Linear -> BN -> ReLU -> Linear, registered in a
// ParamSet under `prefix` ("sam.vis." or "sam.cls.").
template <typename S>
class SamBranch {
 public:
  SamBranch(ParamSet<S>& params, std::string prefix, Index in_dim, Index hidden, Index dim, Rng& rng);

  // v [rows, in_dim] -> [rows, dim]. Train mode needs at least two rows.
  Tensor<S> project(const Tensor<S>& v, BnMode mode);

 private:
  const Tensor<S>& p(const std::string& name) const { return params_->at(prefix_ + name); }

  ParamSet<S>* params_;
  std::string prefix_;
  BatchNormStats<S> bn1_, bn2_;
};

// Valid timesteps of a batch (real tokens plus eos), in sample-major order,
// and the target similarity matrix of each sample: G[i][j] = R'[y_i][y_j].
struct SamTargets {
  std::vector<Index> rows;             // indices into the [B * steps] grid
  std::vector<Index> counts;           // valid timesteps per sample
  std::vector<Eigen::MatrixXd> g;      // per sample, counts[b] x counts[b]
};

SamTargets build_sam_targets(const Batch& batch, const CorrelationMatrix& r);

// Squared differences between pairwise cosines of each sample's rows and its
// target matrix, over every (i, j) pair including the diagonal. Mean
// reduction divides by the number of pairs in the batch. A sample without
// valid rows is passed as an undefined tensor. With no pairs the
// result is zero and *no_pairs (if given) is set.
template <typename S>
Tensor<S> sam_loss(const std::vector<Tensor<S>>& per_sample, const std::vector<Eigen::MatrixXd>& g,
                   LossReduction reduction, bool* no_pairs = nullptr);

// Same, with the samples' rows stacked in `projected` according to targets.
template <typename S>
Tensor<S> sam_loss(const Tensor<S>& projected, const SamTargets& targets, LossReduction reduction,
                   bool* no_pairs = nullptr);

// Mean |cos - G| over the same pairs; a monitoring statistic, not recorded.
template <typename S>
double mean_abs_gap(const Tensor<S>& projected, const SamTargets& targets);

// L_symbol + L_vis + L_cls. Throws naming the first non-finite component.
template <typename S>
Tensor<S> total_loss(const Tensor<S>& ce, const Tensor<S>& l_vis, const Tensor<S>& l_cls);

template <typename S>
struct SamOutput {
  Tensor<S> l_vis;  // scalar, zero when the branch is off
  Tensor<S> l_cls;
  double gap_vis = 0;  // mean |cos - G| of each enabled branch
  double gap_cls = 0;
  bool no_pairs = false;
};

// Both projection branches. Parameters are named "sam.vis.*" and "sam.cls.*"
// and exist only for enabled branches; the recognizer never reads them.
template <typename S>
class SemanticAwareModule {
 public:
  SemanticAwareModule(const SamConfig& config, Index vis_dim, Index cls_dim, std::uint64_t seed);

  const SamConfig& config() const { return config_; }
  ParamSet<S>& params() { return params_; }
  const ParamSet<S>& params() const { return params_; }

  SamOutput<S> losses(const TeacherForced<S>& tf, const Batch& batch, const SamTargets& targets);

 private:
  SamConfig config_;
  ParamSet<S> params_;
  std::unique_ptr<SamBranch<S>> vis_, cls_;
};

extern template class SamBranch<float>;
extern template class SamBranch<double>;
extern template class SemanticAwareModule<float>;
extern template class SemanticAwareModule<double>;

}  // namespace sghmer
