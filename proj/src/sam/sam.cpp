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

#include "sghmer/sam.hpp"

#include <cmath>
#include <stdexcept>

namespace sghmer {

template <typename S>
SamBranch<S>::SamBranch(ParamSet<S>& params, std::string prefix, Index in_dim, Index hidden, Index dim, Rng& rng)
    : params_(&params), prefix_(std::move(prefix)), bn1_(hidden), bn2_(hidden) {
  params.add(prefix_ + "w1", xavier_uniform<S>({hidden, in_dim}, in_dim, hidden, rng));
  params.add(prefix_ + "b1", Tensor<S>::zeros({hidden}, true));
  params.add(prefix_ + "bn1.gamma", Tensor<S>::full({hidden}, S(1), true));
  params.add(prefix_ + "bn1.beta", Tensor<S>::zeros({hidden}, true));
  params.add(prefix_ + "bn1.running_mean", bn1_.running_mean);
  params.add(prefix_ + "bn1.running_var", bn1_.running_var);
  params.add(prefix_ + "w2", xavier_uniform<S>({hidden, hidden}, hidden, hidden, rng));
  params.add(prefix_ + "b2", Tensor<S>::zeros({hidden}, true));
  params.add(prefix_ + "bn2.gamma", Tensor<S>::full({hidden}, S(1), true));
  params.add(prefix_ + "bn2.beta", Tensor<S>::zeros({hidden}, true));
  params.add(prefix_ + "bn2.running_mean", bn2_.running_mean);
  params.add(prefix_ + "bn2.running_var", bn2_.running_var);
  params.add(prefix_ + "w3", xavier_uniform<S>({dim, hidden}, hidden, dim, rng));
  params.add(prefix_ + "b3", Tensor<S>::zeros({dim}, true));
}

template <typename S>
Tensor<S> SamBranch<S>::project(const Tensor<S>& v, BnMode mode) {
  Tensor<S> x = linear(v, p("w1"), p("b1"));
  x = relu(batchnorm(x, p("bn1.gamma"), p("bn1.beta"), bn1_, mode));
  x = linear(x, p("w2"), p("b2"));
  x = relu(batchnorm(x, p("bn2.gamma"), p("bn2.beta"), bn2_, mode));
  return linear(x, p("w3"), p("b3"));
}

SamTargets build_sam_targets(const Batch& batch, const CorrelationMatrix& r) {
  SamTargets targets;
  std::vector<int> ids;
  for (int b = 0; b < batch.size; ++b) {
    ids.clear();
    for (int t = 0; t < batch.steps; ++t) {
      if (!batch.valid(b, t)) continue;
      const int id = batch.target(b, t);
      if (id < 0 || id >= r.rows()) throw std::out_of_range("build_sam_targets: symbol outside semantic graph");
      targets.rows.push_back(static_cast<Index>(b) * batch.steps + t);
      ids.push_back(id);
    }
    const Index n = static_cast<Index>(ids.size());
    Eigen::MatrixXd g(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) g(i, j) = r(ids[static_cast<size_t>(i)], ids[static_cast<size_t>(j)]);
    targets.counts.push_back(n);
    targets.g.push_back(std::move(g));
  }
  return targets;
}

template <typename S>
Tensor<S> sam_loss(const std::vector<Tensor<S>>& per_sample, const std::vector<Eigen::MatrixXd>& g,
                   LossReduction reduction, bool* no_pairs) {
  if (per_sample.size() != g.size()) throw std::invalid_argument("sam_loss: sample and target counts differ");
  Tensor<S> total;
  Index pairs = 0;
  for (size_t b = 0; b < per_sample.size(); ++b) {
    const Index n = per_sample[b].defined() ? per_sample[b].dim(0) : 0;
    if (g[b].rows() != n || g[b].cols() != n) {
      throw std::invalid_argument("sam_loss: target of sample " + std::to_string(b) + " is " +
                                  std::to_string(g[b].rows()) + "x" + std::to_string(g[b].cols()) + " for " +
                                  std::to_string(n) + " rows");
    }
    if (n == 0) continue;
    const typename Tensor<S>::Matrix gm = g[b].template cast<S>();
    const Tensor<S> target({n, n}, Eigen::Map<const typename Tensor<S>::Vector>(gm.data(), n * n));
    const Tensor<S> diff = sub(pairwise_cosine(per_sample[b]), target);
    const Tensor<S> part = sum(mul(diff, diff));
    total = total.defined() ? add(total, part) : part;
    pairs += n * n;
  }
  if (no_pairs) *no_pairs = pairs == 0;
  if (pairs == 0) return Tensor<S>::scalar(S(0));
  return reduction == LossReduction::kMean ? scale(total, S(1) / static_cast<S>(pairs)) : total;
}

template <typename S>
Tensor<S> sam_loss(const Tensor<S>& projected, const SamTargets& targets, LossReduction reduction, bool* no_pairs) {
  std::vector<Tensor<S>> per_sample;
  Index offset = 0;
  for (Index n : targets.counts) {
    per_sample.push_back(n > 0 ? slice_rows(projected, offset, n) : Tensor<S>());
    offset += n;
  }
  if (offset != projected.dim(0)) throw std::invalid_argument("sam_loss: row count does not match targets");
  return sam_loss(per_sample, targets.g, reduction, no_pairs);
}

template <typename S>
double mean_abs_gap(const Tensor<S>& projected, const SamTargets& targets) {
  NoGradGuard no_grad;
  double total = 0;
  Index pairs = 0, offset = 0;
  for (size_t b = 0; b < targets.counts.size(); ++b) {
    const Index n = targets.counts[b];
    if (n == 0) continue;
    const Tensor<S> c = pairwise_cosine(slice_rows(projected, offset, n));
    const auto cm = c.matrix(n, n).template cast<double>();
    total += (cm - targets.g[b]).cwiseAbs().sum();
    pairs += n * n;
    offset += n;
  }
  return pairs == 0 ? 0.0 : total / static_cast<double>(pairs);
}

template <typename S>
Tensor<S> total_loss(const Tensor<S>& ce, const Tensor<S>& l_vis, const Tensor<S>& l_cls) {
  const std::pair<const char*, const Tensor<S>*> parts[] = {{"L_symbol", &ce}, {"L_vis", &l_vis}, {"L_cls", &l_cls}};
  for (const auto& [name, t] : parts) {
    if (t->size() != 1) throw std::invalid_argument(std::string("total_loss: ") + name + " is not a scalar");
    if (!std::isfinite(static_cast<double>(t->item()))) {
      throw std::domain_error(std::string("total_loss: ") + name + " is not finite");
    }
  }
  return add(add(ce, l_vis), l_cls);
}

template <typename S>
SemanticAwareModule<S>::SemanticAwareModule(const SamConfig& config, Index vis_dim, Index cls_dim,
                                            std::uint64_t seed)
    : config_(config) {
  Rng rng(seed);
  if (config.enable_vis) {
    vis_ = std::make_unique<SamBranch<S>>(params_, "sam.vis.", vis_dim, config.hidden, config.dim, rng);
  }
  if (config.enable_cls) {
    cls_ = std::make_unique<SamBranch<S>>(params_, "sam.cls.", cls_dim, config.hidden, config.dim, rng);
  }
}

namespace {

// Per-step [B, d] tensors -> the valid rows of the sample-major [B * T, d] grid.
template <typename S>
Tensor<S> valid_rows(const std::vector<Tensor<S>>& steps, const std::vector<Index>& rows) {
  const Tensor<S> grid = permute(stack(steps), {1, 0, 2});
  return gather_rows(reshape(grid, {grid.dim(0) * grid.dim(1), grid.dim(2)}), rows);
}

}  // namespace

template <typename S>
SamOutput<S> SemanticAwareModule<S>::losses(const TeacherForced<S>& tf, const Batch& batch,
                                            const SamTargets& targets) {
  SamOutput<S> out;
  out.l_vis = Tensor<S>::scalar(S(0));
  out.l_cls = Tensor<S>::scalar(S(0));
  if (static_cast<int>(tf.v_vis.size()) != batch.steps) {
    throw std::invalid_argument("SemanticAwareModule: step count does not match batch");
  }
  bool empty = false;
  if (vis_) {
    const Tensor<S> projected = vis_->project(valid_rows(tf.v_vis, targets.rows), BnMode::kTrain);
    out.l_vis = sam_loss(projected, targets, config_.reduction, &empty);
    out.gap_vis = mean_abs_gap(projected, targets);
  }
  if (cls_) {
    const Tensor<S> projected = cls_->project(valid_rows(tf.v_cls, targets.rows), BnMode::kTrain);
    out.l_cls = sam_loss(projected, targets, config_.reduction, &empty);
    out.gap_cls = mean_abs_gap(projected, targets);
  }
  out.no_pairs = empty;
  return out;
}

#define SGHMER_INSTANTIATE_SAM(S)                                                                            \
  template class SamBranch<S>;                                                                               \
  template class SemanticAwareModule<S>;                                                                     \
  template Tensor<S> sam_loss<S>(const std::vector<Tensor<S>>&, const std::vector<Eigen::MatrixXd>&,         \
                                 LossReduction, bool*);                                                      \
  template Tensor<S> sam_loss<S>(const Tensor<S>&, const SamTargets&, LossReduction, bool*);                 \
  template double mean_abs_gap<S>(const Tensor<S>&, const SamTargets&);                                      \
  template Tensor<S> total_loss<S>(const Tensor<S>&, const Tensor<S>&, const Tensor<S>&);

SGHMER_INSTANTIATE_SAM(float)
SGHMER_INSTANTIATE_SAM(double)

}  // namespace sghmer
