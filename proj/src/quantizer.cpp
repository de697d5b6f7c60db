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


#include "inrvc/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "inrvc/errors.hpp"
#include "inrvc/ops.hpp"

namespace inrvc {
namespace {

void check_channels(const Shape& s, std::size_t c) {
  if (s.size() != 4 || static_cast<std::size_t>(s[1]) != c) {
    throw ShapeError("expected N x " + std::to_string(c) + " x H x W, got " + to_string(s));
  }
}

}  // namespace

IntTensor quantize(const TensorF& y, const std::vector<float>& q) {
  check_channels(y.shape(), q.size());
  for (float s : q) {
    if (!(s > 0.0f)) throw ParamError("quantisation scale must be positive");
  }
  const Index plane = y.dim(2) * y.dim(3), C = y.dim(1);
  IntTensor out{y.shape(), std::vector<std::int32_t>(y.numel())};
  for (Index i = 0; i < y.numel(); ++i) {
    const float v = q[(i / plane) % C] * y.at(i);
    out.data[i] = static_cast<std::int32_t>(std::round(v));
  }
  return out;
}

TensorF dequantize(const IntTensor& symbols, const std::vector<float>& qt) {
  check_channels(symbols.shape, qt.size());
  const Index plane = symbols.shape[2] * symbols.shape[3], C = symbols.shape[1];
  ArrayX<float> v(symbols.numel());
  for (Index i = 0; i < symbols.numel(); ++i) {
    v(i) = qt[(i / plane) % C] * static_cast<float>(symbols.data[i]);
  }
  return TensorF(symbols.shape, std::move(v));
}

template <typename S>
Tensor<S> channel_view(const Tensor<S>& v) { return reshape(v, Shape{1, v.numel(), 1, 1}); }

template <typename S>
Tensor<S> ste_round(const Tensor<S>& y, const Tensor<S>& q, const Tensor<S>& qt) {
  return round_ste(y * channel_view(q)) * channel_view(qt);
}

template <typename S>
Tensor<S> soft_symbols(const Tensor<S>& y, const Tensor<S>& q, S tau, Rng& rng, bool noise) {
  Tensor<S> s = soft_round(y * channel_view(q), tau);
  if (noise) {
    ArrayX<S> u(s.numel());
    for (Index i = 0; i < u.size(); ++i) u(i) = static_cast<S>(rng.uniform() - 0.5);
    s = s + Tensor<S>(s.shape(), std::move(u));
  }
  return soft_round(s, tau);
}

float soft_round_tau(Index step, Index steps, float tau_start, float tau_end) {
  if (steps <= 1) return tau_end;
  const double t = std::clamp(static_cast<double>(step) / static_cast<double>(steps - 1), 0.0, 1.0);
  return static_cast<float>(std::exp(std::log(tau_start) + t * (std::log(tau_end) - std::log(tau_start))));
}

std::uint16_t encode_scale(float qt) {
  const double c = std::round(static_cast<double>(qt) * (1 << kScaleFracBits));
  return static_cast<std::uint16_t>(std::clamp(c, 1.0, 65535.0));
}

float decode_scale(std::uint16_t code) {
  return static_cast<float>(code) / static_cast<float>(1 << kScaleFracBits);
}

float QGlobTable::weight(int temporal_layer) const {
  if (temporal_layer < 0) throw ParamError("negative temporal layer");
  if (temporal_layer == 0) return intra;
  return first * std::pow(decay, static_cast<float>(temporal_layer - 1));
}

template <typename S>
Tensor<S> coded_scale(const Tensor<S>& qt) {
  constexpr S kOne = 1 << kScaleFracBits;
  const Tensor<S> c = clamp(qt, S(1) / kOne, S(65535) / kOne);
  return round_ste(c * kOne) * (S(1) / kOne);
}

#define INRVC_INSTANTIATE_QUANTIZER(S)                                                       \
  template Tensor<S> channel_view(const Tensor<S>&);                               \
  template Tensor<S> ste_round(const Tensor<S>&, const Tensor<S>&, const Tensor<S>&); \
  template Tensor<S> soft_symbols(const Tensor<S>&, const Tensor<S>&, S, Rng&, bool); \
  template Tensor<S> coded_scale(const Tensor<S>&);
INRVC_INSTANTIATE_QUANTIZER(float)
INRVC_INSTANTIATE_QUANTIZER(double)
#undef INRVC_INSTANTIATE_QUANTIZER

}  // namespace inrvc
