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


// Reparameterised linear layers. During training a layer is a sum of M
// affine-mixed branches (branch m is a product of m weight factors); it
// contracts algebraically to one weight and bias:
//
//   W = sum_m diag(gamma_w[m]) * (W[m,N] ... W[m,1]) + beta_w[m] * 1^T
//   b = sum_m gamma_b[m] .* b[m] + beta_b[m]
//
// Linear maps act on the channel axis of NCHW tensors.

#ifndef INRVC_MODMIXER_HPP_
#define INRVC_MODMIXER_HPP_

#include <vector>

#include "inrvc/nn.hpp"
#include "inrvc/ops.hpp"
#include "inrvc/rng.hpp"
#include "inrvc/tensor.hpp"

namespace inrvc {

template <typename S>
struct ContractedLinear {
  Tensor<S> weight;  // [O, I]
  Tensor<S> bias;    // [O]

  Index in_features() const { return weight.dim(1); }
  Index out_features() const { return weight.dim(0); }
  Tensor<S> forward(const Tensor<S>& h) const { return pointwise_linear(h, weight, bias); }
};

template <typename S>
struct Branch {
  std::vector<Tensor<S>> factors;  // factors[0] is [O, I], the rest [O, O]
  Tensor<S> bias;                  // [O]
  Tensor<S> gamma_w, beta_w, gamma_b, beta_b;  // [O]
};

template <typename S>
class ExpandedLinear {
 public:
  ExpandedLinear() = default;
  // Branch m (0-based) has m + 1 serial factors.
  ExpandedLinear(Index in, Index out, int branches, Rng& rng, double gain = 1.0);

  Index in_features() const { return in_; }
  Index out_features() const { return out_; }
  int branch_count() const { return static_cast<int>(branches_.size()); }
  std::vector<Branch<S>>& branches() { return branches_; }
  const std::vector<Branch<S>>& branches() const { return branches_; }

  // Product W[m,N] ... W[m,1], differentiable in the factors.
  Tensor<S> branch_weight(int m) const;

  // Literal branch-by-branch evaluation.
  Tensor<S> forward_expanded(const Tensor<S>& h) const;
  // Contraction expressed in differentiable ops, then one linear map. Same
  // function of the parameters as forward_expanded, fewer flops.
  ContractedLinear<S> contract_graph() const;
  Tensor<S> forward(const Tensor<S>& h) const { return contract_graph().forward(h); }

  ParamList<S> params() const;

 private:
  Index in_ = 0, out_ = 0;
  std::vector<Branch<S>> branches_;
};

// Detached contraction.
template <typename S>
ContractedLinear<S> contract(const ExpandedLinear<S>& lin);

// First-order residuals on the mixands of every branch. Bases and branch
// biases stay frozen, so the contracted layer is linear in the residuals.
template <typename S>
struct LinearResidual {
  std::vector<Tensor<S>> d_gamma_w, d_beta_w, d_gamma_b, d_beta_b;  // [O] per branch

  static LinearResidual zeros(const ExpandedLinear<S>& lin);
  ParamList<S> params() const;
  Index size() const;
};

// Pretrained layer prepared for residual updates.
template <typename S>
struct FrozenLinear {
  ContractedLinear<S> base;
  std::vector<Tensor<S>> branch_w;  // [O, I] products, constants
  std::vector<Tensor<S>> branch_b;  // [O], constants

  // base + delta(r), differentiable in r.
  ContractedLinear<S> apply(const LinearResidual<S>& r) const;
  // Detached base + delta(r).
  ContractedLinear<S> consolidate(const LinearResidual<S>& r) const;
};

template <typename S>
FrozenLinear<S> freeze(const ExpandedLinear<S>& lin);

// Copy of lin with the residuals added to its mixands.
template <typename S>
ExpandedLinear<S> with_residual(const ExpandedLinear<S>& lin, const LinearResidual<S>& r);

// Cosine decay from 1 at step 0 to exactly 0 at and after end_step.
double decay_mask(Index step, Index end_step);

// Single-head scaled dot-product attention over non-overlapping windows of
// spatial tokens. Along each axis the window is the largest divisor of the
// extent not above the configured size.
template <typename S>
class TokenMixer {
 public:
  TokenMixer() = default;
  TokenMixer(Index channels, Index window, Rng& rng);

  Tensor<S> forward(const Tensor<S>& h) const;
  ParamList<S> params() const;

 private:
  Index channels_ = 0, window_ = 0;
  Tensor<S> wq_, wk_, wv_, wo_;  // [C, C]
};

// Token mixer + reparameterised linear. In training mode
//   out = lin(M * mixer(h) + (1 - M) * h + h)
// and at M = 0 the pre-linear value is 2h, so inference is one linear layer
// with the factor 2 folded into the weight.
template <typename S>
class ModMixerBlock {
 public:
  ModMixerBlock() = default;
  ModMixerBlock(Index in, Index out, int branches, Index window, Rng& rng,
                double gain = 1.0);

  void set_mask(double m) { mask_ = m; }
  double mask() const { return mask_; }

  Tensor<S> forward_expanded(const Tensor<S>& h) const;  // literal branches
  Tensor<S> forward(const Tensor<S>& h) const;           // contracted-on-the-fly
  // Pre-linear value: M * mixer(h) + (1 - M) * h + h.
  Tensor<S> mixed(const Tensor<S>& h) const;

  ExpandedLinear<S>& linear() { return lin_; }
  const ExpandedLinear<S>& linear() const { return lin_; }
  const TokenMixer<S>& mixer() const { return mixer_; }
  ParamList<S> params() const;

 private:
  TokenMixer<S> mixer_;
  ExpandedLinear<S> lin_;
  double mask_ = 1.0;
};

// Inference form of a block, valid once its mask has reached 0.
template <typename S>
ContractedLinear<S> contract(const ModMixerBlock<S>& block);

}  // namespace inrvc

#endif  // INRVC_MODMIXER_HPP_
