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


// Conditional Gaussian model over quantised latent levels.
//
// A level is one [1, 2C, h, w] plane: C channels of gamma followed by C of
// beta. Channels split into four groups and each group decodes in two
// checkerboard phases, so a level takes eight sequential steps whatever its
// resolution. The prediction for a step sees the symbols of earlier steps
// (through a 3x3 convolution of the partially decoded plane), the upsampled
// coarser level and up to two reference latents of the same level.

#ifndef INRVC_ENTROPY_MODEL_HPP_
#define INRVC_ENTROPY_MODEL_HPP_

#include <cstdint>
#include <functional>
#include <vector>

#include "inrvc/modmixer.hpp"
#include "inrvc/quantizer.hpp"
#include "inrvc/range_coder.hpp"

namespace inrvc {

struct ChannelGrouping {
  std::vector<Index> sizes;

  int count() const { return static_cast<int>(sizes.size()); }
  Index channels() const;
  Index offset(int group) const;
};

// Four groups in proportion 1:1:2:4 (largest remainder, every group
// non-empty), or four near-equal groups when uneven == false.
ChannelGrouping split_channels(Index channels, bool uneven = true);

inline int checker_phase(Index row, Index col) { return static_cast<int>((row + col) & 1); }

struct SymbolSlot {
  int stream;  // 0 = gamma, 1 = beta
  Index channel, row, col;
};

struct DecodeStep {
  int group;
  int phase;  // 0 = anchors, 1 = the complementary checkerboard
  std::vector<SymbolSlot> slots;
};

std::vector<DecodeStep> schedule_quadtree(Index height, Index width,
                                          const ChannelGrouping& grouping);

enum class Fusion { kModulation, kConcat };

struct EntropyConfig {
  Index channels = 8;  // per stream
  Index features = 16;
  int branches = 2;
  Index window = 4;
  int levels = 3;
  bool uneven_groups = true;
  Fusion fusion = Fusion::kModulation;
  double sigma_init = 1.0;
  double gain = 0.7;
};

// Decoded side information for one level. Undefined tensors are absent.
template <typename S>
struct LevelContext {
  Tensor<S> coarser;  // next coarser level, [1, 2C, h/2, w/2]
  Tensor<S> ref1, ref2;
};

template <typename S>
struct GaussianPlanes {
  Tensor<S> mu, sigma;  // [1, 2C, h, w], symbol units
};

template <typename S>
using EntropyHead = std::function<Tensor<S>(const Tensor<S>&)>;

template <typename S>
class EntropyModel {
 public:
  static constexpr int kHeadLayers = 3;

  EntropyModel() = default;
  EntropyModel(const EntropyConfig& config, Rng& rng);

  const EntropyConfig& config() const { return config_; }
  const ChannelGrouping& grouping() const { return grouping_; }
  int steps() const { return 2 * grouping_.count(); }

  // Step-independent part of the context fusion.
  struct Terms {
    std::vector<Tensor<S>> scale, shift;  // modulation, per present context
    Tensor<S> concat;                     // concat fusion: linear of all contexts
  };
  Terms context_terms(const LevelContext<S>& ctx, Index height, Index width) const;

  // Bias-carrying convolution of a partially decoded plane.
  Tensor<S> spatial(const Tensor<S>& plane) const;
  Tensor<S> fuse(const Tensor<S>& spatial, int level, int step, const Terms& terms) const;
  GaussianPlanes<S> gaussian(const Tensor<S>& head_out) const;

  // Training head (token mixers weighted by the decay mask).
  EntropyHead<S> head() const;
  // Inference head over contracted layers.
  static EntropyHead<S> head(std::vector<ContractedLinear<S>> layers);

  void set_mask(double m);
  double mask() const { return blocks_[0].mask(); }

  std::vector<ModMixerBlock<S>>& blocks() { return blocks_; }
  const std::vector<ModMixerBlock<S>>& blocks() const { return blocks_; }
  const Tensor<S>& conv_weight() const { return conv_w_; }
  const Tensor<S>& conv_bias() const { return conv_b_; }

  ParamList<S> params() const;

 private:
  EntropyConfig config_;
  ChannelGrouping grouping_;
  Tensor<S> conv_w_, conv_b_;           // [F, 2C, 3, 3], [F]
  Tensor<S> level_emb_, step_emb_;      // [L, F], [steps, F]
  std::vector<Tensor<S>> mod_w_, mod_b_;  // per context kind: [2F, 2C], [2F]
  Tensor<S> cat_w_, cat_b_;             // [F, 6C], [F]
  std::vector<ModMixerBlock<S>> blocks_;
};

// Weight updates of the head for one level: residual mixands per layer.
template <typename S>
using HeadResidual = std::vector<LinearResidual<S>>;

template <typename S>
HeadResidual<S> zero_residual(const EntropyModel<S>& model);
template <typename S>
std::vector<FrozenLinear<S>> freeze_head(const EntropyModel<S>& model);
// Differentiable contracted head with residuals applied.
template <typename S>
std::vector<ContractedLinear<S>> apply_weight_update(const std::vector<FrozenLinear<S>>& frozen,
                                                     const HeadResidual<S>& r);
// Elementwise map over every residual tensor.
template <typename S>
HeadResidual<S> map_residual(const HeadResidual<S>& r,
                             const std::function<Tensor<S>(const Tensor<S>&)>& fn);
template <typename S>
Tensor<S> flatten_residual(const HeadResidual<S>& r);
template <typename S>
HeadResidual<S> unflatten_residual(const Tensor<S>& flat, const HeadResidual<S>& like);

// Per-symbol (mu, sigma) of a whole level, each slot predicted from the
// context its step will see at the decoder. Differentiable.
template <typename S>
GaussianPlanes<S> level_gaussian(const EntropyModel<S>& model, const EntropyHead<S>& head,
                                 int level, const Tensor<S>& plane, const LevelContext<S>& ctx);

// Differentiable rate in bits of one level. `plane` holds the dequantised
// values the decoder will see (contexts), `symbols` the relaxed symbols the
// rate is measured on.
template <typename S>
Tensor<S> level_bits(const EntropyModel<S>& model, const EntropyHead<S>& head, int level,
                     const Tensor<S>& plane, const Tensor<S>& symbols,
                     const LevelContext<S>& ctx);

// Decoder-side state of one level while its steps are replayed.
template <typename S>
class LevelDecoderState {
 public:
  LevelDecoderState(const EntropyModel<S>& model, const EntropyHead<S>& head, int level,
                    Index height, Index width, const LevelContext<S>& ctx);

  const std::vector<DecodeStep>& schedule() const { return schedule_; }
  int next_step() const { return next_; }
  // (mu, sigma) planes for `step`. Throws ContextError unless exactly the
  // slots of the earlier steps have been filled in.
  GaussianPlanes<S> predict_params(int step) const;
  // Stores the dequantised values of a step's slots and advances.
  void commit(int step, const std::vector<std::int32_t>& symbols, const std::vector<float>& qt);
  const Tensor<S>& plane() const { return plane_; }

 private:
  const EntropyModel<S>& model_;
  EntropyHead<S> head_;
  int level_;
  Index h_, w_;
  typename EntropyModel<S>::Terms terms_;
  std::vector<DecodeStep> schedule_;
  Tensor<S> plane_;
  std::vector<std::uint8_t> decoded_;
  int next_ = 0;
};

// Codes one level step by step; returns the estimated bits (sum of the
// per-symbol model costs) and leaves the dequantised plane in *plane.
template <typename S>
double encode_level(RangeEncoder& enc, GaussianCoder& coder, const EntropyModel<S>& model,
                    const EntropyHead<S>& head, int level, const IntTensor& symbols,
                    const std::vector<float>& qt, const LevelContext<S>& ctx,
                    Tensor<S>* plane = nullptr);
template <typename S>
IntTensor decode_level(RangeDecoder& dec, GaussianCoder& coder, const EntropyModel<S>& model,
                       const EntropyHead<S>& head, int level, Index height, Index width,
                       const std::vector<float>& qt, const LevelContext<S>& ctx,
                       Tensor<S>* plane = nullptr);

// -sum log2 max(P(v), p_min) under the discretised Gaussian.
double estimate_rate(const std::vector<std::int32_t>& symbols, const std::vector<double>& mu,
                     const std::vector<double>& sigma);

// Fully factorised density for weight-update symbols: a monotone network
// maps v to the logit of its CDF.
template <typename S>
class FactorizedPrior {
 public:
  FactorizedPrior() = default;
  FactorizedPrior(Index width, Rng& rng, double init_scale = 4.0);

  // CDF logits of x (any shape, elementwise).
  Tensor<S> logits(const Tensor<S>& x) const;
  // -log2 max(CDF(v + 1/2) - CDF(v - 1/2), p_min), elementwise.
  Tensor<S> bits(const Tensor<S>& v, double p_min = kProbMin) const;
  double cdf(double x) const;

  ParamList<S> params() const;

 private:
  std::vector<Tensor<S>> matrices_, biases_, factors_;
};

// Bin masses over [-half_width, half_width], floored at p_min and
// renormalised to sum to one.
template <typename S>
std::vector<double> prior_pmf(const FactorizedPrior<S>& prior, int half_width,
                              double p_min = kProbMin);
// Coding table over the same window plus an escape symbol carrying the
// outer mass.
template <typename S>
FreqTable prior_table(const FactorizedPrior<S>& prior, int half_width);

}  // namespace inrvc

#endif  // INRVC_ENTROPY_MODEL_HPP_
