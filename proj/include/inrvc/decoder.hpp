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


// Patch-based implicit decoder. A frame is cut into P x P patches that are
// decoded independently: each starts from a P/2^L plane s (a learned grid for
// intra frames, the pooled and lifted reference otherwise) and every layer,
// coarse to fine, applies
//
//   z = gamma * IN(m) + beta + m,   h' = up2(ReLU(W z + b))
//
// where m is the token-mixer input mix (2h once the mask is 0) and (gamma,
// beta) are the patch's latent values plus a learned periodic grid sampled at
// the layer's digit of the hierarchical position.

#ifndef INRVC_DECODER_HPP_
#define INRVC_DECODER_HPP_

#include <vector>

#include "inrvc/hier_pe.hpp"
#include "inrvc/layers.hpp"
#include "inrvc/modmixer.hpp"

namespace inrvc {

struct DecoderConfig {
  Index channels = 8;  // hidden width, equal to the latent C
  int levels = 3;
  int branches = 2;
  Index window = 4;
  Index patch = 32;           // inference patch
  Index pretrain_patch = 16;  // patch the grids were trained at
  bool scaled_pe = true;      // false: positions tile with the pretraining period
  double pe_init = 0.1;
};

// [1, C, H, W] <-> [nP, C, p, p], tiles in row-major order.
template <typename S>
Tensor<S> patchify(const Tensor<S>& x, Index p);
template <typename S>
Tensor<S> unpatchify(const Tensor<S>& tiles, Index height, Index width);

// Schedule with bases [P_pre / 2^L, 2, ..., 2] and k = patch / P_pre (1 when
// scaled_pe is off). Throws ParamError for patches that are not multiples of
// 2^L or smaller than the pretraining patch.
BaseSchedule decoder_schedule(const DecoderConfig& c, Index patch);
// Grid coordinates of layer i (0 = coarsest) for every position of its
// (patch / 2^(L-i))^2 plane, row-major.
std::vector<GridCoord> pe_coords(const DecoderConfig& c, Index patch, int layer);

// One decoder layer: up2(ReLU(lin(gamma * IN(m) + beta + m))).
template <typename S>
Tensor<S> decoder_layer(const ContractedLinear<S>& lin, const Tensor<S>& m,
                        const Tensor<S>& gamma, const Tensor<S>& beta);

// Inference form: contracted layers and precomputed position terms for one
// patch size. Every tensor is a constant.
template <typename S>
struct CompiledDecoder {
  DecoderConfig config;
  Index patch = 0;
  std::vector<ContractedLinear<S>> layers;
  std::vector<Tensor<S>> pe_gamma, pe_beta;  // [1, C, p_l, p_l], gamma offset by 1
  Tensor<S> intra;                           // [1, C, p_L, p_L]
  Linear<S> lift, head1, head2;
};

template <typename S>
class Decoder {
 public:
  Decoder() = default;
  Decoder(const DecoderConfig& config, Rng& rng);

  const DecoderConfig& config() const { return config_; }
  void set_mask(double m);
  double mask() const { return blocks_[0].mask(); }

  // Training route. latents[l-1] is [1, 2C, H/2^l, W/2^l]; ref1 is the
  // [1, 3, H, W] reference or undefined for intra frames. Returns
  // [1, 3, H, W] in [0, 1].
  Tensor<S> forward(const std::vector<Tensor<S>>& latents, const Tensor<S>& ref1,
                    Index patch) const;

  // Requires mask 0.
  CompiledDecoder<S> compile(Index patch) const;

  std::vector<ModMixerBlock<S>>& blocks() { return blocks_; }
  const std::vector<ModMixerBlock<S>>& blocks() const { return blocks_; }
  std::vector<Tensor<S>>& pe_grids() { return pe_; }
  Tensor<S>& intra_grid() { return intra_; }
  Linear<S>& lift() { return lift_; }
  ParamList<S> params() const;

 private:
  Tensor<S> position_terms(int layer, Index patch) const;  // [1, 2C, p_l, p_l]
  Tensor<S> intra_start(Index patch) const;

  DecoderConfig config_;
  std::vector<ModMixerBlock<S>> blocks_;
  std::vector<Tensor<S>> pe_;  // [2C, B_i, B_i]
  Tensor<S> intra_;            // [C, B_0, B_0]
  Linear<S> lift_, head1_, head2_;
};

// Inference route, differentiable in the latents only. Throws StateError if a
// level is missing and ShapeError if the frame does not tile.
template <typename S>
Tensor<S> decode_frame(const CompiledDecoder<S>& dec, const std::vector<Tensor<S>>& latents,
                       const Tensor<S>& ref1);

}  // namespace inrvc

#endif  // INRVC_DECODER_HPP_
