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

#include "sghmer/rng.hpp"
#include "sghmer/tensor.hpp"

#include <map>
#include <string>
#include <vector>

namespace sghmer {

// Named tensors of one model, iterated in name order.
template <typename S>
class ParamSet {
 public:
  // Throws on duplicate names.
  Tensor<S>& add(const std::string& name, Tensor<S> tensor);
  bool contains(const std::string& name) const { return entries_.count(name) != 0; }
  Tensor<S>& at(const std::string& name);
  const Tensor<S>& at(const std::string& name) const;

  const std::map<std::string, Tensor<S>>& entries() const { return entries_; }
  std::vector<std::string> names() const;
  size_t size() const { return entries_.size(); }

  // Tensors that receive gradients, in name order.
  std::vector<Tensor<S>> trainable() const;
  void zero_grad();
  // Adds every entry of `other`; names must not collide.
  void merge(const ParamSet& other);
  size_t erase_prefix(const std::string& prefix);

 private:
  std::map<std::string, Tensor<S>> entries_;
};

// Weights uniform in ±sqrt(6 / (fan_in + fan_out)).
template <typename S>
Tensor<S> xavier_uniform(Shape shape, Index fan_in, Index fan_out, Rng& rng);

extern template class ParamSet<float>;
extern template class ParamSet<double>;

}  // namespace sghmer
