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


// Small parameterised layers for the conv encoders and the decoder head.

#ifndef INRVC_LAYERS_HPP_
#define INRVC_LAYERS_HPP_

#include <cmath>

#include "inrvc/nn.hpp"
#include "inrvc/ops.hpp"

namespace inrvc {

template <typename S>
struct Conv2d {
  Tensor<S> weight, bias;  // [O, I, k, k], [O]
  int stride = 1, pad = 0;

  Conv2d() = default;
  // He-normal weights scaled by gain, zero bias. Padding keeps "same" extent.
  Conv2d(Index in, Index out, int k, int stride_, Rng& rng, double gain = 1.0)
      : weight(randn<S>({out, in, k, k}, rng, gain * std::sqrt(2.0 / double(in * k * k)))),
        bias(filled<S>({out}, 0.0)),
        stride(stride_),
        pad(k / 2) {}

  Tensor<S> operator()(const Tensor<S>& x) const { return conv2d(x, weight, stride, pad, bias); }
  ParamList<S> params() const { return {{"w", weight}, {"b", bias}}; }
};

template <typename S>
struct Linear {
  Tensor<S> weight, bias;  // [O, I], [O]

  Linear() = default;
  Linear(Index in, Index out, Rng& rng, double gain = 1.0)
      : weight(randn<S>({out, in}, rng, gain * std::sqrt(1.0 / double(in)))),
        bias(filled<S>({out}, 0.0)) {}

  Tensor<S> operator()(const Tensor<S>& x) const { return pointwise_linear(x, weight, bias); }
  ParamList<S> params() const { return {{"w", weight}, {"b", bias}}; }
};

// Detached copy, for modules frozen after training.
template <typename S>
Linear<S> frozen(const Linear<S>& l) {
  Linear<S> out;
  out.weight = l.weight.detach();
  out.bias = l.bias.detach();
  return out;
}

}  // namespace inrvc

#endif  // INRVC_LAYERS_HPP_
