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

#include "sghmer/param_set.hpp"

#include <cmath>
#include <stdexcept>

namespace sghmer {

template <typename S>
Tensor<S>& ParamSet<S>::add(const std::string& name, Tensor<S> tensor) {
  if (name.empty()) throw std::invalid_argument("parameter name must not be empty");
  auto [it, inserted] = entries_.emplace(name, std::move(tensor));
  if (!inserted) throw std::invalid_argument("duplicate parameter name '" + name + "'");
  return it->second;
}

template <typename S>
Tensor<S>& ParamSet<S>::at(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::out_of_range("no parameter named '" + name + "'");
  return it->second;
}

template <typename S>
const Tensor<S>& ParamSet<S>::at(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::out_of_range("no parameter named '" + name + "'");
  return it->second;
}

template <typename S>
std::vector<std::string> ParamSet<S>::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, _] : entries_) out.push_back(name);
  return out;
}

template <typename S>
std::vector<Tensor<S>> ParamSet<S>::trainable() const {
  std::vector<Tensor<S>> out;
  for (const auto& [_, t] : entries_) {
    if (t.requires_grad()) out.push_back(t);
  }
  return out;
}

template <typename S>
void ParamSet<S>::zero_grad() {
  for (auto& [_, t] : entries_) t.zero_grad();
}

template <typename S>
void ParamSet<S>::merge(const ParamSet& other) {
  for (const auto& [name, t] : other.entries_) add(name, t);
}

template <typename S>
size_t ParamSet<S>::erase_prefix(const std::string& prefix) {
  size_t removed = 0;
  for (auto it = entries_.begin(); it != entries_.end();) {
    if (it->first.compare(0, prefix.size(), prefix) == 0) {
      it = entries_.erase(it);
      ++removed;
    } else {
      ++it;
    }
  }
  return removed;
}

template <typename S>
Tensor<S> xavier_uniform(Shape shape, Index fan_in, Index fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  typename Tensor<S>::Vector v(shape_size(shape));
  for (Index i = 0; i < v.size(); ++i) v[i] = static_cast<S>(rng.uniform(-limit, limit));
  return Tensor<S>(std::move(shape), std::move(v), true);
}

template class ParamSet<float>;
template class ParamSet<double>;
template Tensor<float> xavier_uniform<float>(Shape, Index, Index, Rng&);
template Tensor<double> xavier_uniform<double>(Shape, Index, Index, Rng&);

}  // namespace sghmer
