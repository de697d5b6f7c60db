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


#include "inrvc/entropy_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "inrvc/errors.hpp"

namespace inrvc {
namespace {

template <typename S>
Tensor<S> bias_view(const Tensor<S>& b) {
  return reshape(b, Shape{1, b.numel(), 1, 1});
}

template <typename S>
Tensor<S> checkerboard(Index h, Index w, int phase) {
  ArrayX<S> v(h * w);
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) v(r * w + c) = checker_phase(r, c) == phase ? S(1) : S(0);
  }
  return Tensor<S>({1, 1, h, w}, std::move(v));
}

// Both streams of one channel group, along axis 1 of an NCHW tensor or a
// kernel.
template <typename S>
Tensor<S> group_channels(const Tensor<S>& t, Index C, Index off, Index n) {
  return concat<S>({slice(t, 1, off, off + n), slice(t, 1, C + off, C + off + n)}, 1);
}

template <typename S>
Tensor<S> group_mask(Index C, Index off, Index n) {
  ArrayX<S> v = ArrayX<S>::Zero(2 * C);
  v.segment(off, n).setOnes();
  v.segment(C + off, n).setOnes();
  return Tensor<S>({1, 2 * C, 1, 1}, std::move(v));
}

void check_plane(const Shape& s, Index C, const char* what) {
  if (s.size() != 4 || s[0] != 1 || s[1] != 2 * C) {
    throw ShapeError(std::string(what) + ": expected 1 x " + std::to_string(2 * C) +
                     " x H x W, got " + to_string(s));
  }
}

}  // namespace

Index ChannelGrouping::channels() const {
  return std::accumulate(sizes.begin(), sizes.end(), Index{0});
}

Index ChannelGrouping::offset(int group) const {
  return std::accumulate(sizes.begin(), sizes.begin() + group, Index{0});
}

ChannelGrouping split_channels(Index channels, bool uneven) {
  if (channels < 4) throw ParamError("channel grouping needs at least 4 channels");
  ChannelGrouping g;
  if (!uneven) {
    for (Index i = 0; i < 4; ++i) g.sizes.push_back(channels / 4 + (i < channels % 4 ? 1 : 0));
    return g;
  }
  const Index ratio[4] = {1, 1, 2, 4};
  std::vector<std::pair<Index, int>> rem;  // remainder numerators over 8
  Index used = 0;
  for (int i = 0; i < 4; ++i) {
    g.sizes.push_back(channels * ratio[i] / 8);
    used += g.sizes.back();
    rem.emplace_back(channels * ratio[i] % 8, i);
  }
  std::stable_sort(rem.begin(), rem.end(), [](auto a, auto b) { return a.first > b.first; });
  for (Index k = 0; used < channels; ++k, ++used) ++g.sizes[rem[k].second];
  for (auto& s : g.sizes) {
    if (s == 0) {
      ++s;
      --*std::max_element(g.sizes.begin(), g.sizes.end());
    }
  }
  return g;
}

std::vector<DecodeStep> schedule_quadtree(Index height, Index width,
                                          const ChannelGrouping& grouping) {
  if (height < 1 || width < 1) throw ShapeError("empty latent plane");
  std::vector<DecodeStep> steps;
  for (int g = 0; g < grouping.count(); ++g) {
    const Index off = grouping.offset(g);
    for (int phase = 0; phase < 2; ++phase) {
      DecodeStep st{g, phase, {}};
      for (Index r = 0; r < height; ++r) {
        for (Index c = 0; c < width; ++c) {
          if (checker_phase(r, c) != phase) continue;
          for (Index ch = off; ch < off + grouping.sizes[g]; ++ch) {
            st.slots.push_back({0, ch, r, c});
            st.slots.push_back({1, ch, r, c});
          }
        }
      }
      steps.push_back(std::move(st));
    }
  }
  return steps;
}

template <typename S>
EntropyModel<S>::EntropyModel(const EntropyConfig& config, Rng& rng)
    : config_(config), grouping_(split_channels(config.channels, config.uneven_groups)) {
  const Index C2 = 2 * config.channels, F = config.features;
  if (F < 1 || config.levels < 1) throw ParamError("bad entropy model geometry");
  conv_w_ = randn<S>({F, C2, 3, 3}, rng, 1.0 / std::sqrt(9.0 * C2));
  conv_b_ = filled<S>({F}, 0.0);
  level_emb_ = randn<S>({config.levels, F}, rng, 0.1);
  step_emb_ = randn<S>({steps(), F}, rng, 0.1);
  for (int k = 0; k < 3; ++k) {
    mod_w_.push_back(randn<S>({2 * F, C2}, rng, 0.5 / std::sqrt(static_cast<double>(C2))));
    mod_b_.push_back(filled<S>({2 * F}, 0.0));
  }
  cat_w_ = randn<S>({F, 3 * C2}, rng, 1.0 / std::sqrt(3.0 * C2));
  cat_b_ = filled<S>({F}, 0.0);
  blocks_.emplace_back(F, F, config.branches, config.window, rng, config.gain);
  blocks_.emplace_back(F, F, config.branches, config.window, rng, config.gain);
  blocks_.emplace_back(F, 2 * C2, config.branches, config.window, rng, 0.1 * config.gain);
}

template <typename S>
typename EntropyModel<S>::Terms EntropyModel<S>::context_terms(const LevelContext<S>& ctx,
                                                               Index height,
                                                               Index width) const {
  const Index C = config_.channels, F = config_.features;
  const Shape want{1, 2 * C, height, width};
  std::vector<Tensor<S>> inputs(3);
  if (ctx.coarser.defined()) inputs[0] = upsample_bilinear2x(ctx.coarser);
  inputs[1] = ctx.ref1;
  inputs[2] = ctx.ref2;
  for (const auto& t : inputs) {
    if (t.defined() && t.shape() != want) {
      throw ShapeError("context " + to_string(t.shape()) + " does not match level " + to_string(want));
    }
  }
  Terms terms;
  if (config_.fusion == Fusion::kModulation) {
    for (int k = 0; k < 3; ++k) {
      if (!inputs[k].defined()) continue;
      const Tensor<S> z = pointwise_linear(inputs[k], mod_w_[k], mod_b_[k]);
      terms.scale.push_back(slice(z, 1, 0, F) + S(1));
      terms.shift.push_back(slice(z, 1, F, 2 * F));
    }
  } else {
    for (auto& t : inputs) {
      if (!t.defined()) t = Tensor<S>::zeros(want);
    }
    terms.concat = pointwise_linear(concat(inputs, 1), cat_w_, cat_b_);
  }
  return terms;
}

template <typename S>
Tensor<S> EntropyModel<S>::spatial(const Tensor<S>& plane) const {
  check_plane(plane.shape(), config_.channels, "spatial context");
  return conv2d(plane, conv_w_, 1, 1, conv_b_);
}

template <typename S>
Tensor<S> EntropyModel<S>::fuse(const Tensor<S>& spatial, int level, int step,
                                const Terms& terms) const {
  if (level < 1 || level > config_.levels) throw ParamError("level out of range");
  if (step < 0 || step >= steps()) throw ParamError("step out of range");
  const Index F = config_.features;
  Tensor<S> f = spatial + reshape(slice(level_emb_, 0, level - 1, level), Shape{1, F, 1, 1}) +
                reshape(slice(step_emb_, 0, step, step + 1), Shape{1, F, 1, 1});
  for (std::size_t k = 0; k < terms.scale.size(); ++k) f = f * terms.scale[k] + terms.shift[k];
  if (terms.concat.defined()) f = f + terms.concat;
  return f;
}

template <typename S>
GaussianPlanes<S> EntropyModel<S>::gaussian(const Tensor<S>& out) const {
  const Index C2 = 2 * config_.channels;
  GaussianPlanes<S> g;
  g.mu = slice(out, 1, 0, C2);
  // Clamped in the log domain so large pre-activations cannot overflow.
  g.sigma = exp(clamp(slice(out, 1, C2, 2 * C2) + static_cast<S>(std::log(config_.sigma_init)),
                      static_cast<S>(std::log(kSigmaMin)), static_cast<S>(std::log(kSigmaMax))));
  return g;
}

template <typename S>
EntropyHead<S> EntropyModel<S>::head() const {
  return [this](const Tensor<S>& f) {
    Tensor<S> h = relu(f);
    h = relu(blocks_[0].forward(h));
    h = relu(blocks_[1].forward(h));
    return blocks_[2].forward(h);
  };
}

template <typename S>
EntropyHead<S> EntropyModel<S>::head(std::vector<ContractedLinear<S>> layers) {
  if (layers.size() != kHeadLayers) throw ParamError("entropy head needs three layers");
  return [layers = std::move(layers)](const Tensor<S>& f) {
    Tensor<S> h = relu(f);
    h = relu(layers[0].forward(h * S(2)));
    h = relu(layers[1].forward(h * S(2)));
    return layers[2].forward(h * S(2));
  };
}

template <typename S>
void EntropyModel<S>::set_mask(double m) {
  for (auto& b : blocks_) b.set_mask(m);
}

template <typename S>
ParamList<S> EntropyModel<S>::params() const {
  ParamList<S> p{{"conv.w", conv_w_}, {"conv.b", conv_b_}, {"level_emb", level_emb_},
                 {"step_emb", step_emb_}};
  for (int k = 0; k < 3; ++k) {
    p.push_back({"mod" + std::to_string(k) + ".w", mod_w_[k]});
    p.push_back({"mod" + std::to_string(k) + ".b", mod_b_[k]});
  }
  p.push_back({"cat.w", cat_w_});
  p.push_back({"cat.b", cat_b_});
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    append(p, "block" + std::to_string(i) + ".", blocks_[i].params());
  }
  return p;
}

template <typename S>
HeadResidual<S> zero_residual(const EntropyModel<S>& model) {
  HeadResidual<S> r;
  for (const auto& b : model.blocks()) r.push_back(LinearResidual<S>::zeros(b.linear()));
  return r;
}

template <typename S>
std::vector<FrozenLinear<S>> freeze_head(const EntropyModel<S>& model) {
  std::vector<FrozenLinear<S>> out;
  for (const auto& b : model.blocks()) out.push_back(freeze(b.linear()));
  return out;
}

template <typename S>
std::vector<ContractedLinear<S>> apply_weight_update(const std::vector<FrozenLinear<S>>& frozen,
                                                     const HeadResidual<S>& r) {
  if (frozen.size() != r.size()) throw ShapeError("weight update does not match the head");
  std::vector<ContractedLinear<S>> out;
  for (std::size_t i = 0; i < frozen.size(); ++i) out.push_back(frozen[i].apply(r[i]));
  return out;
}

template <typename S>
HeadResidual<S> map_residual(const HeadResidual<S>& r,
                             const std::function<Tensor<S>(const Tensor<S>&)>& fn) {
  HeadResidual<S> out = r;
  for (auto& lr : out) {
    for (auto* v : {&lr.d_gamma_w, &lr.d_beta_w, &lr.d_gamma_b, &lr.d_beta_b}) {
      for (auto& t : *v) t = fn(t);
    }
  }
  return out;
}

template <typename S>
Tensor<S> flatten_residual(const HeadResidual<S>& r) {
  std::vector<Tensor<S>> parts;
  for (const auto& lr : r) {
    for (const auto* v : {&lr.d_gamma_w, &lr.d_beta_w, &lr.d_gamma_b, &lr.d_beta_b}) {
      for (const auto& t : *v) parts.push_back(reshape(t, Shape{t.numel()}));
    }
  }
  return concat(parts, 0);
}

template <typename S>
HeadResidual<S> unflatten_residual(const Tensor<S>& flat, const HeadResidual<S>& like) {
  Index at = 0;
  HeadResidual<S> out = map_residual<S>(like, [&](const Tensor<S>& t) {
    if (at + t.numel() > flat.numel()) throw ShapeError("flattened update too short");
    Tensor<S> part = reshape(slice(flat, 0, at, at + t.numel()), t.shape());
    at += t.numel();
    return part;
  });
  if (at != flat.numel()) throw ShapeError("flattened update too long");
  return out;
}

template <typename S>
GaussianPlanes<S> level_gaussian(const EntropyModel<S>& model, const EntropyHead<S>& head,
                                 int level, const Tensor<S>& plane, const LevelContext<S>& ctx) {
  const Index C = model.config().channels, F = model.config().features;
  check_plane(plane.shape(), C, "level plane");
  const Index h = plane.dim(2), w = plane.dim(3);
  const auto terms = model.context_terms(ctx, h, w);
  const ChannelGrouping& G = model.grouping();
  const Tensor<S> chk[2] = {checkerboard<S>(h, w, 0), checkerboard<S>(h, w, 1)};
  // The masked-plane convolution of a step is linear in the plane, so it is
  // a running sum of per-(group, phase) partial convolutions.
  Tensor<S> acc = Tensor<S>::zeros({1, F, h, w}) + bias_view(model.conv_bias());
  GaussianPlanes<S> all;
  for (int g = 0; g < G.count(); ++g) {
    const Index off = G.offset(g), n = G.sizes[g];
    const Tensor<S> x = group_channels(plane, C, off, n);
    const Tensor<S> k = group_channels(model.conv_weight(), C, off, n);
    const Tensor<S> cmask = group_mask<S>(C, off, n);
    for (int phase = 0; phase < 2; ++phase) {
      const GaussianPlanes<S> p = model.gaussian(head(model.fuse(acc, level, 2 * g + phase, terms)));
      const Tensor<S> m = cmask * chk[phase];
      all.mu = all.mu.defined() ? all.mu + p.mu * m : p.mu * m;
      all.sigma = all.sigma.defined() ? all.sigma + p.sigma * m : p.sigma * m;
      acc = acc + conv2d(x * chk[phase], k, 1, 1);
    }
  }
  return all;
}

template <typename S>
Tensor<S> level_bits(const EntropyModel<S>& model, const EntropyHead<S>& head, int level,
                     const Tensor<S>& plane, const Tensor<S>& symbols,
                     const LevelContext<S>& ctx) {
  if (symbols.shape() != plane.shape()) throw ShapeError("symbols and plane differ in shape");
  const GaussianPlanes<S> g = level_gaussian(model, head, level, plane, ctx);
  return sum(gaussian_rate(symbols, g.mu, g.sigma, kProbMin));
}

template <typename S>
LevelDecoderState<S>::LevelDecoderState(const EntropyModel<S>& model, const EntropyHead<S>& head,
                                        int level, Index height, Index width,
                                        const LevelContext<S>& ctx)
    : model_(model),
      head_(head),
      level_(level),
      h_(height),
      w_(width),
      terms_(model.context_terms(ctx, height, width)),
      schedule_(schedule_quadtree(height, width, model.grouping())),
      plane_(Tensor<S>::zeros({1, 2 * model.config().channels, height, width})),
      decoded_(static_cast<std::size_t>(plane_.numel()), 0) {}

template <typename S>
GaussianPlanes<S> LevelDecoderState<S>::predict_params(int step) const {
  if (step != next_) {
    throw ContextError("step " + std::to_string(step) + " requested while step " +
                       std::to_string(next_) + " is next");
  }
  return model_.gaussian(head_(model_.fuse(model_.spatial(plane_), level_, step, terms_)));
}

template <typename S>
void LevelDecoderState<S>::commit(int step, const std::vector<std::int32_t>& symbols,
                                  const std::vector<float>& qt) {
  const Index C = model_.config().channels;
  if (step != next_) throw ContextError("steps must be committed in order");
  const auto& slots = schedule_.at(step).slots;
  if (symbols.size() != slots.size()) throw ShapeError("symbol count does not match the step");
  if (static_cast<Index>(qt.size()) != 2 * C) throw ShapeError("need one inverse scale per channel");
  auto& v = plane_.mutable_value();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const SymbolSlot& s = slots[i];
    const Index ch = s.stream * C + s.channel;
    const Index idx = (ch * h_ + s.row) * w_ + s.col;
    if (decoded_[idx]) throw ContextError("slot decoded twice");
    decoded_[idx] = 1;
    v(idx) = static_cast<S>(qt[ch] * static_cast<float>(symbols[i]));
  }
  ++next_;
}

template <typename S>
double encode_level(RangeEncoder& enc, GaussianCoder& coder, const EntropyModel<S>& model,
                    const EntropyHead<S>& head, int level, const IntTensor& symbols,
                    const std::vector<float>& qt, const LevelContext<S>& ctx, Tensor<S>* plane) {
  check_plane(symbols.shape, model.config().channels, "encode_level");
  const Index C = model.config().channels, h = symbols.shape[2], w = symbols.shape[3];
  LevelDecoderState<S> st(model, head, level, h, w, ctx);
  double bits = 0.0;
  for (int s = 0; s < model.steps(); ++s) {
    const GaussianPlanes<S> p = st.predict_params(s);
    const auto& slots = st.schedule()[s].slots;
    std::vector<std::int32_t> sym(slots.size());
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const Index idx = ((slots[i].stream * C + slots[i].channel) * h + slots[i].row) * w + slots[i].col;
      const GaussianCode g = quantize_gaussian(p.mu.at(idx), p.sigma.at(idx));
      sym[i] = symbols.data[idx];
      coder.encode(enc, sym[i], g);
      bits += gaussian_bits(sym[i], g);
    }
    st.commit(s, sym, qt);
  }
  if (plane) *plane = st.plane();
  return bits;
}

template <typename S>
IntTensor decode_level(RangeDecoder& dec, GaussianCoder& coder, const EntropyModel<S>& model,
                       const EntropyHead<S>& head, int level, Index height, Index width,
                       const std::vector<float>& qt, const LevelContext<S>& ctx,
                       Tensor<S>* plane) {
  const Index C = model.config().channels;
  LevelDecoderState<S> st(model, head, level, height, width, ctx);
  IntTensor out{{1, 2 * C, height, width}, std::vector<std::int32_t>(2 * C * height * width)};
  for (int s = 0; s < model.steps(); ++s) {
    const GaussianPlanes<S> p = st.predict_params(s);
    const auto& slots = st.schedule()[s].slots;
    std::vector<std::int32_t> sym(slots.size());
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const Index idx = ((slots[i].stream * C + slots[i].channel) * height + slots[i].row) * width +
                        slots[i].col;
      sym[i] = coder.decode(dec, quantize_gaussian(p.mu.at(idx), p.sigma.at(idx)));
      out.data[idx] = sym[i];
    }
    st.commit(s, sym, qt);
  }
  if (plane) *plane = st.plane();
  return out;
}

double estimate_rate(const std::vector<std::int32_t>& symbols, const std::vector<double>& mu,
                     const std::vector<double>& sigma) {
  if (mu.size() != symbols.size() || sigma.size() != symbols.size()) {
    throw ShapeError("estimate_rate operands differ in length");
  }
  double bits = 0.0;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const double s = std::clamp(sigma[i], kSigmaMin, kSigmaMax);
    const double p = normal_mass((symbols[i] - 0.5 - mu[i]) / s, (symbols[i] + 0.5 - mu[i]) / s);
    bits -= std::log2(std::max(p, kProbMin));
  }
  return bits;
}

template <typename S>
FactorizedPrior<S>::FactorizedPrior(Index width, Rng& rng, double init_scale) {
  const Index f[4] = {1, width, width, 1};
  const double scale = std::pow(init_scale, 1.0 / 3.0);
  for (int k = 0; k < 3; ++k) {
    const double init = std::log(std::expm1(1.0 / scale / static_cast<double>(f[k + 1])));
    matrices_.push_back(filled<S>({f[k + 1], f[k]}, init));
    ArrayX<S> b(f[k + 1]);
    for (Index i = 0; i < b.size(); ++i) b(i) = static_cast<S>(rng.uniform(-0.5, 0.5));
    biases_.push_back(Tensor<S>({f[k + 1], 1}, std::move(b), true));
    if (k < 2) factors_.push_back(filled<S>({f[k + 1], 1}, 0.0));
  }
}

template <typename S>
Tensor<S> FactorizedPrior<S>::logits(const Tensor<S>& x) const {
  Tensor<S> h = reshape(x, Shape{1, x.numel()});
  for (int k = 0; k < 3; ++k) {
    h = matmul(softplus(matrices_[k]), h) + biases_[k];
    if (k < 2) h = h + tanh(factors_[k]) * tanh(h);
  }
  return reshape(h, x.shape());
}

template <typename S>
Tensor<S> FactorizedPrior<S>::bits(const Tensor<S>& v, double p_min) const {
  const Tensor<S> lo = logits(v + S(-0.5));
  const Tensor<S> hi = logits(v + S(0.5));
  // Difference taken on the side of the median that keeps precision.
  ArrayX<S> sg(v.numel());
  for (Index i = 0; i < v.numel(); ++i) sg(i) = lo.at(i) + hi.at(i) > S(0) ? S(-1) : S(1);
  const Tensor<S> sign(v.shape(), std::move(sg));
  const Tensor<S> p = sign * (sigmoid(sign * hi) - sigmoid(sign * lo));
  return log(clamp(p, static_cast<S>(p_min), S(1))) * static_cast<S>(-1.0 / std::log(2.0));
}

template <typename S>
double FactorizedPrior<S>::cdf(double x) const {
  std::vector<double> h{x};
  for (int k = 0; k < 3; ++k) {
    const auto& m = matrices_[k];
    const Index out = m.dim(0), in = m.dim(1);
    std::vector<double> next(out);
    for (Index o = 0; o < out; ++o) {
      double acc = biases_[k].at(o);
      for (Index i = 0; i < in; ++i) {
        const double raw = m.at(o * in + i);
        const double sp = raw > 30.0 ? raw : std::log1p(std::exp(raw));
        acc += sp * h[i];
      }
      if (k < 2) acc += std::tanh(static_cast<double>(factors_[k].at(o))) * std::tanh(acc);
      next[o] = acc;
    }
    h = std::move(next);
  }
  return 1.0 / (1.0 + std::exp(-h[0]));
}

template <typename S>
ParamList<S> FactorizedPrior<S>::params() const {
  ParamList<S> p;
  for (int k = 0; k < 3; ++k) {
    p.push_back({"H" + std::to_string(k), matrices_[k]});
    p.push_back({"b" + std::to_string(k), biases_[k]});
    if (k < 2) p.push_back({"a" + std::to_string(k), factors_[k]});
  }
  return p;
}

template <typename S>
std::vector<double> prior_pmf(const FactorizedPrior<S>& prior, int half_width, double p_min) {
  std::vector<double> pmf;
  double total = 0.0;
  for (int v = -half_width; v <= half_width; ++v) {
    const double m = std::max(prior.cdf(v + 0.5) - prior.cdf(v - 0.5), p_min);
    pmf.push_back(m);
    total += m;
  }
  for (double& m : pmf) m /= total;
  return pmf;
}

template <typename S>
FreqTable prior_table(const FactorizedPrior<S>& prior, int half_width) {
  std::vector<double> pmf;
  for (int v = -half_width; v <= half_width; ++v) {
    pmf.push_back(std::max(prior.cdf(v + 0.5) - prior.cdf(v - 0.5), 0.0));
  }
  pmf.push_back(std::max(1.0 - prior.cdf(half_width + 0.5) + prior.cdf(-half_width - 0.5), 0.0));
  return FreqTable::from_pmf(pmf);
}

#define INRVC_INSTANTIATE_ENTROPY(S)                                                        \
  template class EntropyModel<S>;                                                          \
  template class LevelDecoderState<S>;                                                     \
  template class FactorizedPrior<S>;                                                       \
  template HeadResidual<S> zero_residual(const EntropyModel<S>&);                          \
  template std::vector<FrozenLinear<S>> freeze_head(const EntropyModel<S>&);               \
  template std::vector<ContractedLinear<S>> apply_weight_update(                           \
      const std::vector<FrozenLinear<S>>&, const HeadResidual<S>&);                        \
  template HeadResidual<S> map_residual(const HeadResidual<S>&,                            \
                                        const std::function<Tensor<S>(const Tensor<S>&)>&); \
  template Tensor<S> flatten_residual(const HeadResidual<S>&);                             \
  template HeadResidual<S> unflatten_residual(const Tensor<S>&, const HeadResidual<S>&);   \
  template GaussianPlanes<S> level_gaussian(const EntropyModel<S>&, const EntropyHead<S>&, \
                                            int, const Tensor<S>&, const LevelContext<S>&); \
  template Tensor<S> level_bits(const EntropyModel<S>&, const EntropyHead<S>&, int,        \
                                const Tensor<S>&, const Tensor<S>&, const LevelContext<S>&); \
  template double encode_level(RangeEncoder&, GaussianCoder&, const EntropyModel<S>&,      \
                               const EntropyHead<S>&, int, const IntTensor&,                \
                               const std::vector<float>&, const LevelContext<S>&,          \
                               Tensor<S>*);                                                \
  template IntTensor decode_level(RangeDecoder&, GaussianCoder&, const EntropyModel<S>&,   \
                                  const EntropyHead<S>&, int, Index, Index,                \
                                  const std::vector<float>&, const LevelContext<S>&,       \
                                  Tensor<S>*);                                             \
  template std::vector<double> prior_pmf(const FactorizedPrior<S>&, int, double);         \
  template FreqTable prior_table(const FactorizedPrior<S>&, int);

INRVC_INSTANTIATE_ENTROPY(float)
INRVC_INSTANTIATE_ENTROPY(double)
#undef INRVC_INSTANTIATE_ENTROPY

}  // namespace inrvc
