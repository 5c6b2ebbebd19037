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

#include "sghmer/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sghmer/vocab.hpp"

namespace sghmer {

template <typename S>
bool Adadelta<S>::step(ParamSet<S>& params, double lr_mult) {
  for (const auto& [name, t] : params.entries()) {
    if (t.requires_grad() && !t.grad().allFinite()) return false;
  }
  const S lr = static_cast<S>(lr_mult);
  for (const auto& [name, t] : params.entries()) {
    if (!t.requires_grad()) continue;
    auto [it, fresh] = slots_.try_emplace(name);
    Slot& slot = it->second;
    if (fresh) {
      slot.sq_grad = Tensor<S>::Vector::Zero(t.size());
      slot.sq_delta = Tensor<S>::Vector::Zero(t.size());
    }
    const auto g = t.grad().array();
    slot.sq_grad = (rho_ * slot.sq_grad.array() + (S(1) - rho_) * g.square()).matrix();
    const auto delta = (-((slot.sq_delta.array() + eps_).sqrt() / (slot.sq_grad.array() + eps_).sqrt()) * g).eval();
    slot.sq_delta = (rho_ * slot.sq_delta.array() + (S(1) - rho_) * delta.square()).matrix();
    t.values().array() += lr * delta;
  }
  return true;
}

template <typename S>
void Adadelta<S>::save_to(Checkpoint& checkpoint, const ParamSet<S>& params) const {
  for (const auto& [name, slot] : slots_) {
    const Shape& shape = params.at(name).shape();
    checkpoint.records.push_back(
        {"opt." + name + ".sq_grad", shape, std::vector<float>(slot.sq_grad.data(), slot.sq_grad.data() + slot.sq_grad.size())});
    checkpoint.records.push_back(
        {"opt." + name + ".sq_delta", shape, std::vector<float>(slot.sq_delta.data(), slot.sq_delta.data() + slot.sq_delta.size())});
  }
}

template <typename S>
void Adadelta<S>::load_from(const Checkpoint& checkpoint, const ParamSet<S>& params) {
  slots_.clear();
  for (const auto& [name, t] : params.entries()) {
    if (!t.requires_grad()) continue;
    const TensorRecord* g = checkpoint.find("opt." + name + ".sq_grad");
    const TensorRecord* d = checkpoint.find("opt." + name + ".sq_delta");
    if (!g && !d) continue;
    if (!g || !d || g->shape != t.shape() || d->shape != t.shape()) {
      throw std::runtime_error("checkpoint has incomplete optimizer state for '" + name + "'");
    }
    Slot slot;
    slot.sq_grad = Eigen::Map<const Eigen::VectorXf>(g->values.data(), t.size()).template cast<S>();
    slot.sq_delta = Eigen::Map<const Eigen::VectorXf>(d->values.data(), t.size()).template cast<S>();
    slots_.emplace(name, std::move(slot));
  }
}

template <typename S>
double clip_grad_norm(ParamSet<S>& params, double max_norm) {
  double sq = 0;
  for (const auto& [name, t] : params.entries()) {
    if (t.requires_grad()) sq += t.grad().template cast<double>().squaredNorm();
  }
  const double norm = std::sqrt(sq);
  if (std::isfinite(norm) && norm > max_norm) {
    const S factor = static_cast<S>(max_norm / norm);
    for (const auto& [name, t] : params.entries()) {
      if (t.requires_grad()) t.grad() *= factor;
    }
  }
  return norm;
}

double lr_schedule(long global_step, long steps_per_epoch, long total_epochs) {
  if (steps_per_epoch < 1 || total_epochs < 1 || global_step < 0) {
    throw std::invalid_argument("lr_schedule: arguments must be positive");
  }
  if (global_step <= steps_per_epoch) {
    return static_cast<double>(global_step) / static_cast<double>(steps_per_epoch);
  }
  if (total_epochs == 1) return 1.0;
  const double span = static_cast<double>(steps_per_epoch) * static_cast<double>(total_epochs - 1);
  const double progress = std::min(1.0, static_cast<double>(global_step - steps_per_epoch) / span);
  return 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

double exprate(const std::vector<std::vector<int>>& predictions, const std::vector<std::vector<int>>& references) {
  if (predictions.empty()) throw std::invalid_argument("exprate: empty evaluation set");
  if (predictions.size() != references.size()) {
    throw std::invalid_argument("exprate: " + std::to_string(predictions.size()) + " predictions for " +
                                std::to_string(references.size()) + " references");
  }
  auto strip = [](const std::vector<int>& ids) {
    std::vector<int> out;
    for (int id : ids) {
      if (id != Vocab::kPad && id != Vocab::kEos) out.push_back(id);
    }
    return out;
  };
  size_t hits = 0;
  for (size_t i = 0; i < predictions.size(); ++i) hits += strip(predictions[i]) == strip(references[i]) ? 1 : 0;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(predictions.size());
}

template class Adadelta<float>;
template class Adadelta<double>;
template double clip_grad_norm<float>(ParamSet<float>&, double);
template double clip_grad_norm<double>(ParamSet<double>&, double);

}  // namespace sghmer
