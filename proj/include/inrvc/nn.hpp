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


// Parameter bookkeeping shared by the trainable modules.

#ifndef INRVC_NN_HPP_
#define INRVC_NN_HPP_

#include <string>
#include <utility>
#include <vector>

#include "inrvc/rng.hpp"
#include "inrvc/tensor.hpp"

namespace inrvc {

template <typename S>
struct Param {
  std::string name;
  Tensor<S> tensor;  // shares storage with the owning module
};

template <typename S>
using ParamList = std::vector<Param<S>>;

template <typename S>
Tensor<S> randn(const Shape& shape, Rng& rng, double stddev) {
  ArrayX<S> v(numel(shape));
  for (Index i = 0; i < v.size(); ++i) v(i) = static_cast<S>(stddev * rng.normal());
  return Tensor<S>(shape, std::move(v), true);
}

template <typename S>
Tensor<S> filled(const Shape& shape, double value) {
  return Tensor<S>::constant(shape, static_cast<S>(value), true);
}

template <typename S>
std::vector<ArrayX<S>> snapshot(const ParamList<S>& params) {
  std::vector<ArrayX<S>> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(p.tensor.value());
  return out;
}

template <typename S>
void restore(const ParamList<S>& params, const std::vector<ArrayX<S>>& values) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i].tensor.mutable_value() = values[i];
  }
}

template <typename S>
void append(ParamList<S>& dst, const std::string& prefix, const ParamList<S>& src) {
  for (const auto& p : src) dst.push_back({prefix + p.name, p.tensor});
}

template <typename S>
void set_requires_grad(const ParamList<S>& params, bool on) {
  for (const auto& p : params) p.tensor.node()->requires_grad = on;
}

// Same-named list with values cast to another scalar type, as fresh leaves.
template <typename To, typename From>
Tensor<To> cast(const Tensor<From>& t, bool requires_grad) {
  return Tensor<To>(t.shape(), t.value().template cast<To>(), requires_grad);
}

}  // namespace inrvc

#endif  // INRVC_NN_HPP_
