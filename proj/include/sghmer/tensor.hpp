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

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace sghmer {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

Index shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

namespace detail {

template <typename Scalar>
struct Node {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using BackwardFn = std::function<void(const Vector& grad_out, const Vector& value_out)>;

  Shape shape;
  Vector value;
  Vector grad;
  bool requires_grad = false;
  const char* op = nullptr;  // nullptr marks a leaf
  std::vector<std::shared_ptr<Node>> inputs;
  BackwardFn backward;
};

}  // namespace detail

// Dense row-major n-d array with an optional record of how it was produced.
// Copies are shallow: two Tensor handles may refer to the same node.
template <typename Scalar_>
class Tensor {
 public:
  using Scalar = Scalar_;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using MatrixMap = Eigen::Map<Matrix>;
  using ConstMatrixMap = Eigen::Map<const Matrix>;
  using NodeType = detail::Node<Scalar>;

  Tensor() = default;
  Tensor(Shape shape, Vector values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, Scalar value, bool requires_grad = false);
  static Tensor from(Shape shape, std::initializer_list<Scalar> values, bool requires_grad = false);
  static Tensor scalar(Scalar value) { return full({}, value); }
  static Tensor from_node(std::shared_ptr<NodeType> node) {
    Tensor t;
    t.node_ = std::move(node);
    return t;
  }

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const { return node_->shape; }
  int rank() const { return static_cast<int>(node_->shape.size()); }
  // Negative axes count from the back.
  Index dim(int axis) const;
  Index size() const { return node_->value.size(); }

  // Handle semantics: constness of the handle does not extend to the data.
  Vector& values() const { return node_->value; }
  Vector& grad() const { return node_->grad; }
  Scalar item() const;

  bool requires_grad() const { return node_->requires_grad; }
  bool is_leaf() const { return node_->op == nullptr; }
  const char* op_name() const { return node_->op ? node_->op : "leaf"; }

  void set_requires_grad(bool on);
  void zero_grad();

  // [size / last_dim, last_dim] view; rank-0 and rank-1 tensors view as one row.
  ConstMatrixMap matrix() const;
  ConstMatrixMap matrix(Index rows, Index cols) const;
  MatrixMap mutable_matrix(Index rows, Index cols) const;

  // Leaf copy of the values with no history.
  Tensor detach() const;

  const std::shared_ptr<NodeType>& node() const { return node_; }

 private:
  std::shared_ptr<NodeType> node_;
};

// Graph recording is on by default; a guard turns it off on this thread.
bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Creates the output of a primitive. The node (and backward closure) is kept
// only when recording is enabled and some input requires a gradient.
template <typename Scalar>
Tensor<Scalar> record(const char* op, Shape shape, typename Tensor<Scalar>::Vector value,
                      const std::vector<Tensor<Scalar>>& inputs,
                      typename detail::Node<Scalar>::BackwardFn backward);

// Accumulates d(loss)/d(leaf) into every requires-grad leaf reachable from
// `loss`. Leaf gradients add up across calls; intermediate ones do not.
template <typename Scalar>
void backward(const Tensor<Scalar>& loss);

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace sghmer
