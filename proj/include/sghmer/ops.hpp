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

// Differentiable primitives. Every function here records a backward closure
// when its inputs require gradients; all are checked against central finite
// differences by the gradcheck suite.

#pragma once

#include "sghmer/tensor.hpp"

#include <vector>

namespace sghmer {

template <typename S> Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b);
template <typename S> Tensor<S> sub(const Tensor<S>& a, const Tensor<S>& b);
template <typename S> Tensor<S> mul(const Tensor<S>& a, const Tensor<S>& b);
template <typename S> Tensor<S> scale(const Tensor<S>& a, S factor);
template <typename S> Tensor<S> sum(const Tensor<S>& a);
template <typename S> Tensor<S> mean(const Tensor<S>& a);

// ReLU uses subgradient 0 at the kink.
template <typename S> Tensor<S> relu(const Tensor<S>& a);
template <typename S> Tensor<S> sigmoid(const Tensor<S>& a);
template <typename S> Tensor<S> tanh(const Tensor<S>& a);

template <typename S> Tensor<S> reshape(const Tensor<S>& a, Shape shape);
// out.dim(i) == a.dim(perm[i])
template <typename S> Tensor<S> permute(const Tensor<S>& a, const std::vector<int>& perm);
// Stacks equally shaped tensors along a new leading axis.
template <typename S> Tensor<S> stack(const std::vector<Tensor<S>>& parts);
template <typename S> Tensor<S> concat(const std::vector<Tensor<S>>& parts, int axis);
template <typename S> Tensor<S> slice_rows(const Tensor<S>& a, Index begin, Index count);
template <typename S> Tensor<S> gather_rows(const Tensor<S>& a, const std::vector<Index>& rows);

// y = x·wᵀ + b over the last axis of x.
template <typename S> Tensor<S> linear(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b);
template <typename S> Tensor<S> linear(const Tensor<S>& x, const Tensor<S>& w);

enum class BnMode { kTrain, kEval };

// Running statistics of one batchnorm layer, stored as (non-trainable)
// tensors so they checkpoint with the parameters.
template <typename S>
struct BatchNormStats {
  Tensor<S> running_mean;
  Tensor<S> running_var;
  S momentum = S(0.9);
  S eps = S(1e-5);

  explicit BatchNormStats(Index features = 1)
      : running_mean(Tensor<S>::zeros({features})), running_var(Tensor<S>::full({features}, S(1))) {}
};

// Normalizes axis 1 of x ([batch, feat, ...]) over all other axes.
// Train mode needs at least two reduced elements per feature and updates the
// running statistics: running = momentum·running + (1 − momentum)·batch.
template <typename S>
Tensor<S> batchnorm(const Tensor<S>& x, const Tensor<S>& gamma, const Tensor<S>& beta, BatchNormStats<S>& stats,
                    BnMode mode);

// x [b,c,h,w], kernel [o,c,kh,kw] with odd kh, kw. No bias.
template <typename S> Tensor<S> conv2d(const Tensor<S>& x, const Tensor<S>& kernel, Index stride, Index padding);
// Non-overlapping window×window average pooling; spatial extents must divide.
template <typename S> Tensor<S> avg_pool2d(const Tensor<S>& x, Index window);

// Softmax over the last axis, max-subtracted. Rejects non-finite input.
template <typename S> Tensor<S> softmax(const Tensor<S>& x);
// Softmax over the last axis restricted to positions where mask != 0; masked
// positions are exactly zero. mask is laid out like x. Every row needs at
// least one valid position.
template <typename S>
Tensor<S> masked_softmax(const Tensor<S>& x, const Eigen::Array<S, Eigen::Dynamic, 1>& mask);

// Mean negative log-likelihood of targets under softmax(logits) over rows
// with weight != 0. logits is [rows, classes]. Returns 0 if no row is valid.
template <typename S>
Tensor<S> cross_entropy(const Tensor<S>& logits, const std::vector<int>& targets, const std::vector<S>& weights);

// table [n, d], ids → [ids.size(), d]
template <typename S> Tensor<S> embedding(const Tensor<S>& table, const std::vector<int>& ids);

// One GRU step. Packed gate order in w [3h, in], u [3h, h], b [3h] is
// update (z), reset (r), candidate:
//   z = σ(W_z x + U_z h + b_z), r = σ(W_r x + U_r h + b_r)
//   c = tanh(W_c x + U_c (r ⊙ h) + b_c), h' = (1 − z) ⊙ h + z ⊙ c
template <typename S>
Tensor<S> gru_cell(const Tensor<S>& x, const Tensor<S>& h, const Tensor<S>& w, const Tensor<S>& u,
                   const Tensor<S>& b);

// Additive attention energies e[b,p] = Σ_a w[a]·tanh(keys[b,p,a] + query[b,a] + coverage[b,p,a]).
template <typename S>
Tensor<S> attention_energy(const Tensor<S>& keys, const Tensor<S>& query, const Tensor<S>& coverage,
                           const Tensor<S>& w);

// out[b,:] = Σ_p alpha[b,p]·features[b,p,:]
template <typename S> Tensor<S> attend(const Tensor<S>& alpha, const Tensor<S>& features);

// C[i,j] = <v_i, v_j> / (max(|v_i|, eps)·max(|v_j|, eps)) for the rows of v [t, d].
template <typename S> Tensor<S> pairwise_cosine(const Tensor<S>& v, S eps = S(1e-8));

}  // namespace sghmer
