// Copyright 2026 The inrvc Authors. All Rights Reserved.
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

// Dense row-major tensors with tape-free reverse-mode differentiation.
//
// A Tensor is a shared handle onto an immutable node. Nodes produced by an op
// whose inputs require gradients keep references to those inputs together
// with a closure that propagates the output gradient backwards. Calling
// backward() on a scalar visits that implicit graph once in reverse
// topological order. Tensors that do not require gradients never record
// anything, so evaluation-only code pays no bookkeeping cost.
//
// Everything is templated on the scalar type; the codec uses float and the
// gradient checks instantiate the same code with double.

#ifndef INRVC_TENSOR_HPP_
#define INRVC_TENSOR_HPP_

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <string>
#include <vector>

namespace inrvc {

using Index = std::int64_t;
using Shape = std::vector<Index>;

Index numel(const Shape& shape);
std::string to_string(const Shape& shape);

template <typename Scalar>
using ArrayX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixRM =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using MapRM = Eigen::Map<MatrixRM<Scalar>>;
template <typename Scalar>
using ConstMapRM = Eigen::Map<const MatrixRM<Scalar>>;

namespace detail {

template <typename Scalar>
struct Node {
  Shape shape;
  ArrayX<Scalar> value;
  ArrayX<Scalar> grad;
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;

  ArrayX<Scalar>& grad_buffer() {
    if (grad.size() != value.size()) grad = ArrayX<Scalar>::Zero(value.size());
    return grad;
  }
};

}  // namespace detail

template <typename Scalar>
class Tensor {
 public:
  using Array = ArrayX<Scalar>;
  using NodeT = detail::Node<Scalar>;

  Tensor() = default;
  Tensor(Shape shape, Array values, bool requires_grad = false);

  static Tensor zeros(const Shape& shape, bool requires_grad = false);
  static Tensor constant(const Shape& shape, Scalar v,
                         bool requires_grad = false);
  static Tensor scalar(Scalar v, bool requires_grad = false);
  static Tensor from(const Shape& shape, std::initializer_list<Scalar> values,
                     bool requires_grad = false);

  // Result of an op. Inputs are retained only when one of them requires a
  // gradient; callers attach the backward closure when requires_grad().
  static Tensor result(Shape shape, Array values,
                       std::initializer_list<Tensor> inputs, const char* op);
  static Tensor result(Shape shape, Array values,
                       const std::vector<Tensor>& inputs, const char* op);
  void set_backward(std::function<void(NodeT&)> fn) const;

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  Index dim(std::size_t i) const { return node_->shape.at(i); }
  std::size_t rank() const { return node_->shape.size(); }
  Index numel() const { return static_cast<Index>(node_->value.size()); }

  const Array& value() const { return node_->value; }
  const Scalar* data() const { return node_->value.data(); }
  Scalar item() const;
  Scalar at(Index i) const { return node_->value(i); }

  // Parameter leaves may be updated in place by an optimizer.
  Array& mutable_value() const;

  bool requires_grad() const { return node_ && node_->requires_grad; }
  bool is_leaf() const { return node_ && !node_->backward; }
  const char* op() const { return node_->op; }

  // Gradient accumulated by backward(); zeros if none reached this tensor.
  Array grad() const;
  void zero_grad() const { node_->grad.resize(0); }

  Tensor detach() const;
  Tensor clone(bool requires_grad) const;

  const std::shared_ptr<NodeT>& node() const { return node_; }

 private:
  std::shared_ptr<NodeT> node_;
};

// Recorded graph reachable from a root, in topological order (inputs first).
template <typename Scalar>
struct Graph {
  std::vector<detail::Node<Scalar>*> order;
  static Graph record(const Tensor<Scalar>& root);
};

// Accumulates d(loss)/d(leaf) into every reachable leaf requiring a gradient.
// Throws ShapeError if loss is not a single element.
template <typename Scalar>
void backward(const Tensor<Scalar>& loss);

extern template class Tensor<float>;
extern template class Tensor<double>;

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace inrvc

#endif  // INRVC_TENSOR_HPP_
