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


// Channel-wise quantisation of NCHW latents: symbols round(q[c] * y) and
// reconstructions qt[c] * symbol, with the relaxations used during training.

#ifndef INRVC_QUANTIZER_HPP_
#define INRVC_QUANTIZER_HPP_

#include <cstdint>
#include <vector>

#include "inrvc/rng.hpp"
#include "inrvc/tensor.hpp"

namespace inrvc {

struct IntTensor {
  Shape shape;
  std::vector<std::int32_t> data;

  Index numel() const { return static_cast<Index>(data.size()); }
  bool operator==(const IntTensor&) const = default;
};

// Half away from zero. Throws ParamError unless every q[c] > 0.
IntTensor quantize(const TensorF& y, const std::vector<float>& q);
TensorF dequantize(const IntTensor& symbols, const std::vector<float>& qt);

// qt * round_ste(q * y): hard forward value, gradients pass straight through
// the rounding to y, q and qt. q and qt are [C] tensors.
template <typename S>
Tensor<S> ste_round(const Tensor<S>& y, const Tensor<S>& q, const Tensor<S>& qt);

// Differentiable symbol-domain surrogate for rate terms:
//   soft_round(soft_round(q * y, tau) + u, tau),  u ~ U(-1/2, 1/2).
// Noise is drawn from rng unless noise == false.
template <typename S>
Tensor<S> soft_symbols(const Tensor<S>& y, const Tensor<S>& q, S tau, Rng& rng,
                       bool noise = true);

// Annealing of the soft-round temperature: log-linear from tau_start at step 0
// to tau_end at the last step.
float soft_round_tau(Index step, Index steps, float tau_start = 0.3f,
                     float tau_end = 1e-4f);

// Inverse scales travel as unsigned Q4.12 fixed point.
constexpr int kScaleFracBits = 12;
std::uint16_t encode_scale(float qt);
float decode_scale(std::uint16_t code);
// round_ste onto the Q4.12 grid (clamped to its range).
template <typename S>
Tensor<S> coded_scale(const Tensor<S>& qt);

// Frame-level quality weight by temporal layer: layer 0 (intra) gets `intra`,
// layer 1 `first`, each deeper layer a further factor `decay`.
struct QGlobTable {
  float intra = 1.4f;
  float first = 1.2f;
  float decay = 0.85f;

  float weight(int temporal_layer) const;
};

// Channel-broadcast view [1, C, 1, 1] of a [C] tensor.
template <typename S>
Tensor<S> channel_view(const Tensor<S>& v);

}  // namespace inrvc

#endif  // INRVC_QUANTIZER_HPP_
