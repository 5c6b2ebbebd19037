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

#include "sghmer/tensor.hpp"

#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace sghmer {

Index shape_size(const Shape& shape) {
  Index n = 1;
  for (Index d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

template <typename Scalar>
Tensor<Scalar>::Tensor(Shape shape, Vector values, bool requires_grad) {
  for (Index d : shape) {
    if (d <= 0) throw std::invalid_argument("tensor extents must be positive, got " + shape_string(shape));
  }
  if (values.size() != shape_size(shape)) {
    throw std::invalid_argument("tensor of shape " + shape_string(shape) + " given " +
                                std::to_string(values.size()) + " values");
  }
  node_ = std::make_shared<NodeType>();
  node_->shape = std::move(shape);
  node_->value = std::move(values);
  set_requires_grad(requires_grad);
}

template <typename Scalar>
Tensor<Scalar> Tensor<Scalar>::zeros(Shape shape, bool requires_grad) {
  const Index n = shape_size(shape);
  return Tensor(std::move(shape), Vector::Zero(n), requires_grad);
}

template <typename Scalar>
Tensor<Scalar> Tensor<Scalar>::full(Shape shape, Scalar value, bool requires_grad) {
  const Index n = shape_size(shape);
  return Tensor(std::move(shape), Vector::Constant(n, value), requires_grad);
}

template <typename Scalar>
Tensor<Scalar> Tensor<Scalar>::from(Shape shape, std::initializer_list<Scalar> values, bool requires_grad) {
  Vector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (Scalar x : values) v[i++] = x;
  return Tensor(std::move(shape), std::move(v), requires_grad);
}

template <typename Scalar>
Index Tensor<Scalar>::dim(int axis) const {
  const int r = rank();
  const int a = axis < 0 ? axis + r : axis;
  if (a < 0 || a >= r) {
    throw std::out_of_range("axis " + std::to_string(axis) + " out of range for shape " + shape_string(shape()));
  }
  return node_->shape[a];
}

template <typename Scalar>
Scalar Tensor<Scalar>::item() const {
  if (size() != 1) throw std::invalid_argument("item() on tensor of shape " + shape_string(shape()));
  return node_->value[0];
}

template <typename Scalar>
void Tensor<Scalar>::set_requires_grad(bool on) {
  node_->requires_grad = on;
  if (on && node_->grad.size() != node_->value.size()) node_->grad = Vector::Zero(node_->value.size());
  if (!on) node_->grad.resize(0);
}

template <typename Scalar>
void Tensor<Scalar>::zero_grad() {
  if (node_->requires_grad) node_->grad.setZero();
}

template <typename Scalar>
typename Tensor<Scalar>::ConstMatrixMap Tensor<Scalar>::matrix() const {
  const Index cols = rank() == 0 ? 1 : shape().back();
  return matrix(size() / cols, cols);
}

template <typename Scalar>
typename Tensor<Scalar>::ConstMatrixMap Tensor<Scalar>::matrix(Index rows, Index cols) const {
  if (rows * cols != size()) {
    throw std::invalid_argument("cannot view " + shape_string(shape()) + " as " + std::to_string(rows) + "x" +
                                std::to_string(cols));
  }
  return ConstMatrixMap(node_->value.data(), rows, cols);
}

template <typename Scalar>
typename Tensor<Scalar>::MatrixMap Tensor<Scalar>::mutable_matrix(Index rows, Index cols) const {
  if (rows * cols != size()) {
    throw std::invalid_argument("cannot view " + shape_string(shape()) + " as " + std::to_string(rows) + "x" +
                                std::to_string(cols));
  }
  return MatrixMap(node_->value.data(), rows, cols);
}

template <typename Scalar>
Tensor<Scalar> Tensor<Scalar>::detach() const {
  return Tensor(shape(), values(), false);
}

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

template <typename Scalar>
Tensor<Scalar> record(const char* op, Shape shape, typename Tensor<Scalar>::Vector value,
                      const std::vector<Tensor<Scalar>>& inputs,
                      typename detail::Node<Scalar>::BackwardFn backward) {
  auto node = std::make_shared<detail::Node<Scalar>>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  bool needs_grad = false;
  if (g_grad_enabled) {
    for (const auto& in : inputs) needs_grad = needs_grad || in.requires_grad();
  }
  if (needs_grad) {
    node->requires_grad = true;
    node->op = op;
    node->inputs.reserve(inputs.size());
    for (const auto& in : inputs) node->inputs.push_back(in.node());
    node->backward = std::move(backward);
  }
  return Tensor<Scalar>::from_node(std::move(node));
}

template <typename Scalar>
void backward(const Tensor<Scalar>& loss) {
  using NodeT = detail::Node<Scalar>;
  if (loss.size() != 1) {
    throw std::invalid_argument("backward() needs a scalar loss, got shape " + shape_string(loss.shape()));
  }
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS; graphs from unrolled decoders are deep.
  std::vector<NodeT*> order;
  std::unordered_set<NodeT*> seen;
  std::vector<std::pair<NodeT*, size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      NodeT* child = node->inputs[next++].get();
      if (child->requires_grad && !seen.count(child)) {
        seen.insert(child);
        stack.emplace_back(child, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (NodeT* node : order) {
    if (node->op != nullptr) node->grad = NodeT::Vector::Zero(node->value.size());
  }
  loss.node()->grad[0] += Scalar(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    NodeT* node = *it;
    if (node->op != nullptr && node->backward) node->backward(node->grad, node->value);
  }
}

template class Tensor<float>;
template class Tensor<double>;

template Tensor<float> record<float>(const char*, Shape, Tensor<float>::Vector, const std::vector<Tensor<float>>&,
                                     detail::Node<float>::BackwardFn);
template Tensor<double> record<double>(const char*, Shape, Tensor<double>::Vector,
                                       const std::vector<Tensor<double>>&, detail::Node<double>::BackwardFn);
template void backward<float>(const Tensor<float>&);
template void backward<double>(const Tensor<double>&);

}  // namespace sghmer
