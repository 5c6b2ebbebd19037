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

#include <map>
#include <string>
#include <vector>

#include "sghmer/checkpoint.hpp"
#include "sghmer/param_set.hpp"

namespace sghmer {

// Adadelta with an external learning-rate multiplier:
//   E[g²] ← ρE[g²] + (1−ρ)g²
//   Δ = −sqrt(E[Δx²] + ε) / sqrt(E[g²] + ε) · g
//   E[Δx²] ← ρE[Δx²] + (1−ρ)Δ²
//   p ← p + lr_mult·Δ
template <typename S>
class Adadelta {
 public:
  struct Slot {
    typename Tensor<S>::Vector sq_grad;
    typename Tensor<S>::Vector sq_delta;
  };

  explicit Adadelta(double rho = 0.95, double eps = 1e-6) : rho_(static_cast<S>(rho)), eps_(static_cast<S>(eps)) {}

  // Updates every trainable tensor of params from its grad. Returns false
  // (touching nothing) when any gradient is non-finite.
  bool step(ParamSet<S>& params, double lr_mult);

  const std::map<std::string, Slot>& slots() const { return slots_; }

  // Accumulators as checkpoint records "opt.<name>.sq_grad" / ".sq_delta".
  void save_to(Checkpoint& checkpoint, const ParamSet<S>& params) const;
  void load_from(const Checkpoint& checkpoint, const ParamSet<S>& params);

 private:
  S rho_, eps_;
  std::map<std::string, Slot> slots_;
};

// Rescales all gradients so their global L2 norm is at most max_norm.
// Returns the norm before clipping.
template <typename S>
double clip_grad_norm(ParamSet<S>& params, double max_norm);

// Multiplier for the given global step: linear from 0 to 1 over the first
// epoch, then 0.5·(1 + cos(π·progress)) with progress running over the
// remaining epochs to 1. A single-epoch schedule is only the ramp.
double lr_schedule(long global_step, long steps_per_epoch, long total_epochs);

// Percentage of exact sequence matches after dropping pad and eos ids.
double exprate(const std::vector<std::vector<int>>& predictions, const std::vector<std::vector<int>>& references);

extern template class Adadelta<float>;
extern template class Adadelta<double>;

}  // namespace sghmer
