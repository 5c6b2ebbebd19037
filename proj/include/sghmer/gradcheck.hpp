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

#include "sghmer/tensor.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace sghmer {

// Compares the analytic gradient of a scalar function against central
// differences, coordinate by coordinate, over every tensor in `leaves`.
// Returns the largest |a − n| / max(|a|, |n|, 1e-8).
template <typename S>
S grad_check(const std::function<Tensor<S>()>& f, std::vector<Tensor<S>> leaves, S eps = S(1e-5));

template <typename S>
S grad_check(const std::function<Tensor<S>(const Tensor<S>&)>& f, Tensor<S> x, S eps = S(1e-5));

struct GradCheckResult {
  std::string name;
  double max_rel_error = 0;
};

// Every registered primitive on random 64-bit inputs.
std::vector<GradCheckResult> check_all_primitives(std::uint64_t seed = 1);

}  // namespace sghmer
