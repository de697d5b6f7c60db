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

// Differentiable free functions over Tensor<Scalar>. Image-like tensors are
// NCHW; grids sampled by interp_bilinear are CHW.

#ifndef INRVC_OPS_HPP_
#define INRVC_OPS_HPP_

#include <array>
#include <vector>

#include "inrvc/tensor.hpp"

namespace inrvc {

enum class BinaryOp { kAdd, kSub, kMul, kDiv };
enum class UnaryOp {
  kNeg,
  kRelu,
  kExp,
  kLog,
  kSigmoid,
  kTanh,
  kSoftplus,
  kSquare,
  kSqrt,
  kAbs,
};

// Broadcasting follows trailing-dimension alignment: extents must match or one
// of them must be 1.
Shape broadcast_shape(const Shape& a, const Shape& b);

template <typename S>
Tensor<S> elementwise(BinaryOp op, const Tensor<S>& a, const Tensor<S>& b);
template <typename S>
Tensor<S> elementwise(UnaryOp op, const Tensor<S>& a);

template <typename S>
Tensor<S> add(const Tensor<S>& a, const Tensor<S>& b) {
  return elementwise(BinaryOp::kAdd, a, b);
}
template <typename S>
Tensor<S> sub(const Tensor<S>& a, const Tensor<S>& b) {
  return elementwise(BinaryOp::kSub, a, b);
}
template <typename S>
Tensor<S> mul(const Tensor<S>& a, const Tensor<S>& b) {
  return elementwise(BinaryOp::kMul, a, b);
}
template <typename S>
Tensor<S> div(const Tensor<S>& a, const Tensor<S>& b) {
  return elementwise(BinaryOp::kDiv, a, b);
}
template <typename S>
Tensor<S> relu(const Tensor<S>& a) { return elementwise(UnaryOp::kRelu, a); }
template <typename S>
Tensor<S> exp(const Tensor<S>& a) { return elementwise(UnaryOp::kExp, a); }
template <typename S>
Tensor<S> log(const Tensor<S>& a) { return elementwise(UnaryOp::kLog, a); }
template <typename S>
Tensor<S> sigmoid(const Tensor<S>& a) {
  return elementwise(UnaryOp::kSigmoid, a);
}
template <typename S>
Tensor<S> tanh(const Tensor<S>& a) { return elementwise(UnaryOp::kTanh, a); }
template <typename S>
Tensor<S> softplus(const Tensor<S>& a) {
  return elementwise(UnaryOp::kSoftplus, a);
}
template <typename S>
Tensor<S> square(const Tensor<S>& a) {
  return elementwise(UnaryOp::kSquare, a);
}
template <typename S>
Tensor<S> sqrt(const Tensor<S>& a) { return elementwise(UnaryOp::kSqrt, a); }

template <typename S>
Tensor<S> operator+(const Tensor<S>& a, const Tensor<S>& b) { return add(a, b); }
template <typename S>
Tensor<S> operator-(const Tensor<S>& a, const Tensor<S>& b) { return sub(a, b); }
template <typename S>
Tensor<S> operator*(const Tensor<S>& a, const Tensor<S>& b) { return mul(a, b); }
template <typename S>
Tensor<S> operator/(const Tensor<S>& a, const Tensor<S>& b) { return div(a, b); }
template <typename S>
Tensor<S> operator-(const Tensor<S>& a) {
  return elementwise(UnaryOp::kNeg, a);
}

// Affine map with constants: a * scale + shift.
template <typename S>
Tensor<S> affine(const Tensor<S>& a, S scale, S shift);
template <typename S>
Tensor<S> operator*(const Tensor<S>& a, S s) { return affine(a, s, S(0)); }
template <typename S>
Tensor<S> operator*(S s, const Tensor<S>& a) { return affine(a, s, S(0)); }
template <typename S>
Tensor<S> operator+(const Tensor<S>& a, S s) { return affine(a, S(1), s); }

// Gradient passes where lo < a < hi.
template <typename S>
Tensor<S> clamp(const Tensor<S>& a, S lo, S hi);

template <typename S>
Tensor<S> sum(const Tensor<S>& a);
template <typename S>
Tensor<S> mean(const Tensor<S>& a);
// Sum over every axis whose target extent is 1 (inverse of broadcasting).
template <typename S>
Tensor<S> sum_to(const Tensor<S>& a, const Shape& target);

template <typename S>
Tensor<S> reshape(const Tensor<S>& a, const Shape& shape);
template <typename S>
Tensor<S> permute(const Tensor<S>& a, const std::vector<int>& perm);
template <typename S>
Tensor<S> concat(const std::vector<Tensor<S>>& parts, int axis);
template <typename S>
Tensor<S> slice(const Tensor<S>& a, int axis, Index begin, Index end);

// [m,k] x [k,n] -> [m,n].
template <typename S>
Tensor<S> matmul(const Tensor<S>& a, const Tensor<S>& b);
// Batched: [B,m,k] x [B,k,n] -> [B,m,n] with optional transposition of the
// trailing two axes of either operand.
template <typename S>
Tensor<S> bmm(const Tensor<S>& a, const Tensor<S>& b, bool trans_a = false,
              bool trans_b = false);
// Softmax over the last axis.
template <typename S>
Tensor<S> softmax(const Tensor<S>& a);

// input NCHW, kernel [O,I,k,k], optional bias [O]. Zero padding.
template <typename S>
Tensor<S> conv2d(const Tensor<S>& input, const Tensor<S>& kernel, int stride,
                 int pad, const Tensor<S>& bias = Tensor<S>());
// Per-pixel linear map over channels: weight [O,I], optional bias [O].
template <typename S>
Tensor<S> pointwise_linear(const Tensor<S>& input, const Tensor<S>& weight,
                           const Tensor<S>& bias = Tensor<S>());
// Per-(n,c) plane normalisation without affine parameters.
template <typename S>
Tensor<S> instance_norm(const Tensor<S>& h, S eps = S(1e-5));
// x2 bilinear upsampling, half-pixel alignment with edge clamping.
template <typename S>
Tensor<S> upsample_bilinear2x(const Tensor<S>& h);
// 2x2 mean pooling with stride 2.
template <typename S>
Tensor<S> avg_pool2(const Tensor<S>& h);

// Samples a CHW grid at (row, col) positions; sample centres sit on integer
// coordinates and valid positions lie in [0, extent-1]. Returns [C, P].
// Throws CoordError outside that range.
using GridCoord = std::array<double, 2>;
template <typename S>
Tensor<S> interp_bilinear(const Tensor<S>& grid,
                          const std::vector<GridCoord>& coords);

// Backward warp of img (NCHW) by flow (N2HW, channel 0 = dx, 1 = dy), with
// border clamping. Differentiable in both inputs.
template <typename S>
Tensor<S> warp_bilinear(const Tensor<S>& img, const Tensor<S>& flow);

// Round half away from zero in the forward pass, identity gradient.
template <typename S>
Tensor<S> round_ste(const Tensor<S>& a);

// Invertible soft rounding with temperature tau (> 0):
//   floor(x) + 1/2 + tanh((r - 1/2) / tau) / (2 tanh(1 / (2 tau)))
// where r = x - floor(x). Tends to x as tau grows and to round(x) as tau -> 0.
template <typename S>
Tensor<S> soft_round(const Tensor<S>& a, S tau);

// Bits of v under the unit-bin discretised Gaussian N(mu, sigma):
//   -log2 max(Phi((v+0.5-mu)/sigma) - Phi((v-0.5-mu)/sigma), p_min).
// All three operands share one shape. The gradient is that of the unfloored
// log-mass (asymptotic in the far tail), so symbols many sigmas away from mu
// still pull mu and sigma towards them.
template <typename S>
Tensor<S> gaussian_rate(const Tensor<S>& v, const Tensor<S>& mu,
                        const Tensor<S>& sigma, double p_min);

}  // namespace inrvc

#endif  // INRVC_OPS_HPP_
