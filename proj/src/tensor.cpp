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

#include "inrvc/tensor.hpp"

#include <sstream>
#include <unordered_set>

#include "inrvc/errors.hpp"

namespace inrvc {

Index numel(const Shape& shape) {
  Index n = 1;
  for (Index e : shape) {
    if (e < 0) throw ShapeError("negative extent in " + to_string(shape));
    n *= e;
  }
  return n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

template <typename Scalar>
Tensor<Scalar>::Tensor(Shape shape, Array values, bool requires_grad)
    : node_(std::make_shared<NodeT>()) {
  if (inrvc::numel(shape) != values.size()) {
    throw ShapeError("data length " + std::to_string(values.size()) +
                     " does not match shape " + to_string(shape));
  }
  node_->shape = std::move(shape);
  node_->value = std::move(values);
  node_->requires_grad = requires_grad;
}

template <typename Scalar>
Tensor<Scalar> Tensor<Scalar>::zeros(const Shape& shape, bool requires_grad) {
  return Tensor(shape, Array::Zero(inrvc::numel(shape)), requires_grad);
}

template <typename Scalar>
Tensor<Scalar> Tensor<Scalar>::constant(const Shape& shape, Scalar v,
                                        bool requires_grad) {
  return Tensor(shape, Array::Constant(inrvc::numel(shape), v), requires_grad);
}

template <typename Scalar>
Tensor<Scalar> Tensor<Scalar>::scalar(Scalar v, bool requires_grad) {
  return Tensor(Shape{}, Array::Constant(1, v), requires_grad);
}

template <typename Scalar>
Tensor<Scalar> Tensor<Scalar>::from(const Shape& shape,
                                    std::initializer_list<Scalar> values,
                                    bool requires_grad) {
  Array a(static_cast<Index>(values.size()));
  Index i = 0;
  for (Scalar v : values) a(i++) = v;
  return Tensor(shape, std::move(a), requires_grad);
}

template <typename Scalar>
Tensor<Scalar> Tensor<Scalar>::result(Shape shape, Array values,
                                      std::initializer_list<Tensor> inputs,
                                      const char* op) {
  return result(std::move(shape), std::move(values),
                std::vector<Tensor>(inputs), op);
}

template <typename Scalar>
Tensor<Scalar> Tensor<Scalar>::result(Shape shape, Array values,
                                      const std::vector<Tensor>& inputs,
                                      const char* op) {
  Tensor out(std::move(shape), std::move(values), false);
  out.node_->op = op;
  bool any = false;
  for (const Tensor& t : inputs) any = any || t.requires_grad();
  if (any) {
    out.node_->requires_grad = true;
    out.node_->inputs.reserve(inputs.size());
    for (const Tensor& t : inputs) out.node_->inputs.push_back(t.node_);
  }
  return out;
}

template <typename Scalar>
void Tensor<Scalar>::set_backward(std::function<void(NodeT&)> fn) const {
  node_->backward = std::move(fn);
}

template <typename Scalar>
Scalar Tensor<Scalar>::item() const {
  if (numel() != 1) {
    throw ShapeError("item() on tensor of shape " + to_string(shape()));
  }
  return node_->value(0);
}

template <typename Scalar>
typename Tensor<Scalar>::Array& Tensor<Scalar>::mutable_value() const {
  if (node_->backward) throw StateError("in-place update of a non-leaf tensor");
  return node_->value;
}

template <typename Scalar>
typename Tensor<Scalar>::Array Tensor<Scalar>::grad() const {
  if (node_->grad.size() != node_->value.size()) {
    return Array::Zero(node_->value.size());
  }
  return node_->grad;
}

template <typename Scalar>
Tensor<Scalar> Tensor<Scalar>::detach() const {
  return Tensor(node_->shape, node_->value, false);
}

template <typename Scalar>
Tensor<Scalar> Tensor<Scalar>::clone(bool requires_grad) const {
  return Tensor(node_->shape, node_->value, requires_grad);
}

template <typename Scalar>
Graph<Scalar> Graph<Scalar>::record(const Tensor<Scalar>& root) {
  using NodeT = detail::Node<Scalar>;
  Graph g;
  if (!root.requires_grad()) return g;
  std::unordered_set<const NodeT*> seen;
  // Iterative post-order DFS: (node, next input index).
  std::vector<std::pair<NodeT*, std::size_t>> stack;
  stack.emplace_back(root.node().get(), 0);
  seen.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      NodeT* child = node->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second) {
        stack.emplace_back(child, 0);
      }
    } else {
      g.order.push_back(node);
      stack.pop_back();
    }
  }
  return g;
}

template <typename Scalar>
void backward(const Tensor<Scalar>& loss) {
  if (loss.numel() != 1) {
    throw ShapeError("backward() needs a scalar loss, got " +
                     to_string(loss.shape()));
  }
  if (!loss.requires_grad()) return;
  Graph<Scalar> g = Graph<Scalar>::record(loss);
  loss.node()->grad_buffer()(0) += Scalar(1);
  for (auto it = g.order.rbegin(); it != g.order.rend(); ++it) {
    detail::Node<Scalar>* n = *it;
    if (n->backward && n->grad.size() == n->value.size()) n->backward(*n);
  }
  // Interior gradients are only needed during the sweep.
  for (detail::Node<Scalar>* n : g.order) {
    if (n->backward) n->grad.resize(0);
  }
}

template class Tensor<float>;
template class Tensor<double>;
template struct Graph<float>;
template struct Graph<double>;
template void backward<float>(const Tensor<float>&);
template void backward<double>(const Tensor<double>&);

}  // namespace inrvc
