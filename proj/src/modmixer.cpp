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


#include "inrvc/modmixer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "inrvc/errors.hpp"

namespace inrvc {
namespace {

template <typename S>
Tensor<S> column(const Tensor<S>& v) {
  return reshape(v, Shape{v.numel(), 1});
}

template <typename S>
Tensor<S> channel_view(const Tensor<S>& v) {
  return reshape(v, Shape{1, v.numel(), 1, 1});
}

}  // namespace

template <typename S>
ExpandedLinear<S>::ExpandedLinear(Index in, Index out, int branches, Rng& rng,
                                  double gain)
    : in_(in), out_(out) {
  if (in < 1 || out < 1 || branches < 1) throw ParamError("empty linear layer");
  const double mix = 1.0 / std::sqrt(static_cast<double>(branches));
  for (int m = 0; m < branches; ++m) {
    Branch<S> br;
    br.factors.push_back(randn<S>({out, in}, rng, gain / std::sqrt(static_cast<double>(in))));
    for (int k = 1; k <= m; ++k) {
      Tensor<S> f = randn<S>({out, out}, rng, 0.1 / std::sqrt(static_cast<double>(out)));
      for (Index i = 0; i < out; ++i) f.mutable_value()(i * out + i) += S(1);
      br.factors.push_back(f);
    }
    br.bias = filled<S>({out}, 0.0);
    br.gamma_w = filled<S>({out}, mix);
    br.beta_w = filled<S>({out}, 0.0);
    br.gamma_b = filled<S>({out}, 1.0 / branches);
    br.beta_b = filled<S>({out}, 0.0);
    branches_.push_back(std::move(br));
  }
}

template <typename S>
Tensor<S> ExpandedLinear<S>::branch_weight(int m) const {
  const auto& f = branches_.at(m).factors;
  Tensor<S> p = f[0];
  for (std::size_t k = 1; k < f.size(); ++k) p = matmul(f[k], p);
  return p;
}

template <typename S>
Tensor<S> ExpandedLinear<S>::forward_expanded(const Tensor<S>& h) const {
  if (h.rank() != 4 || h.dim(1) != in_) {
    throw ShapeError("linear layer expects N x " + std::to_string(in_) +
                     " x H x W, got " + to_string(h.shape()));
  }
  const Tensor<S> hsum = sum_to(h, Shape{h.dim(0), 1, h.dim(2), h.dim(3)});
  Tensor<S> y;
  for (const auto& br : branches_) {
    Tensor<S> z = h;
    for (const auto& f : br.factors) z = pointwise_linear(z, f);
    Tensor<S> ym = z * channel_view(br.gamma_w) + hsum * channel_view(br.beta_w) +
                   channel_view(br.gamma_b * br.bias + br.beta_b);
    y = y.defined() ? y + ym : ym;
  }
  return y;
}

template <typename S>
ContractedLinear<S> ExpandedLinear<S>::contract_graph() const {
  Tensor<S> w, b;
  for (int m = 0; m < branch_count(); ++m) {
    const auto& br = branches_[m];
    Tensor<S> wm = column(br.gamma_w) * branch_weight(m) + column(br.beta_w);
    Tensor<S> bm = br.gamma_b * br.bias + br.beta_b;
    w = w.defined() ? w + wm : wm;
    b = b.defined() ? b + bm : bm;
  }
  return {w, b};
}

template <typename S>
ParamList<S> ExpandedLinear<S>::params() const {
  ParamList<S> out;
  for (int m = 0; m < branch_count(); ++m) {
    const auto& br = branches_[m];
    const std::string p = "b" + std::to_string(m) + ".";
    for (std::size_t k = 0; k < br.factors.size(); ++k) {
      out.push_back({p + "w" + std::to_string(k), br.factors[k]});
    }
    out.push_back({p + "bias", br.bias});
    out.push_back({p + "gamma_w", br.gamma_w});
    out.push_back({p + "beta_w", br.beta_w});
    out.push_back({p + "gamma_b", br.gamma_b});
    out.push_back({p + "beta_b", br.beta_b});
  }
  return out;
}

template <typename S>
ContractedLinear<S> contract(const ExpandedLinear<S>& lin) {
  const ContractedLinear<S> g = lin.contract_graph();
  return {g.weight.detach(), g.bias.detach()};
}

template <typename S>
LinearResidual<S> LinearResidual<S>::zeros(const ExpandedLinear<S>& lin) {
  LinearResidual r;
  const Shape s{lin.out_features()};
  for (int m = 0; m < lin.branch_count(); ++m) {
    r.d_gamma_w.push_back(Tensor<S>::zeros(s, true));
    r.d_beta_w.push_back(Tensor<S>::zeros(s, true));
    r.d_gamma_b.push_back(Tensor<S>::zeros(s, true));
    r.d_beta_b.push_back(Tensor<S>::zeros(s, true));
  }
  return r;
}

template <typename S>
ParamList<S> LinearResidual<S>::params() const {
  ParamList<S> out;
  for (std::size_t m = 0; m < d_gamma_w.size(); ++m) {
    const std::string p = "b" + std::to_string(m) + ".";
    out.push_back({p + "d_gamma_w", d_gamma_w[m]});
    out.push_back({p + "d_beta_w", d_beta_w[m]});
    out.push_back({p + "d_gamma_b", d_gamma_b[m]});
    out.push_back({p + "d_beta_b", d_beta_b[m]});
  }
  return out;
}

template <typename S>
Index LinearResidual<S>::size() const {
  Index n = 0;
  for (const auto& p : params()) n += p.tensor.numel();
  return n;
}

template <typename S>
ContractedLinear<S> FrozenLinear<S>::apply(const LinearResidual<S>& r) const {
  Tensor<S> w = base.weight, b = base.bias;
  for (std::size_t m = 0; m < branch_w.size(); ++m) {
    w = w + column(r.d_gamma_w[m]) * branch_w[m] + column(r.d_beta_w[m]);
    b = b + r.d_gamma_b[m] * branch_b[m] + r.d_beta_b[m];
  }
  return {w, b};
}

template <typename S>
ContractedLinear<S> FrozenLinear<S>::consolidate(const LinearResidual<S>& r) const {
  const ContractedLinear<S> g = apply(r);
  return {g.weight.detach(), g.bias.detach()};
}

template <typename S>
FrozenLinear<S> freeze(const ExpandedLinear<S>& lin) {
  FrozenLinear<S> f;
  f.base = contract(lin);
  for (int m = 0; m < lin.branch_count(); ++m) {
    f.branch_w.push_back(lin.branch_weight(m).detach());
    f.branch_b.push_back(lin.branches()[m].bias.detach());
  }
  return f;
}

template <typename S>
ExpandedLinear<S> with_residual(const ExpandedLinear<S>& lin, const LinearResidual<S>& r) {
  ExpandedLinear<S> out = lin;
  auto add = [](const Tensor<S>& a, const Tensor<S>& d) {
    return Tensor<S>(a.shape(), a.value() + d.value(), true);
  };
  auto& brs = out.branches();
  for (std::size_t m = 0; m < brs.size(); ++m) {
    for (auto& f : brs[m].factors) f = f.clone(true);
    brs[m].bias = brs[m].bias.clone(true);
    brs[m].gamma_w = add(brs[m].gamma_w, r.d_gamma_w[m]);
    brs[m].beta_w = add(brs[m].beta_w, r.d_beta_w[m]);
    brs[m].gamma_b = add(brs[m].gamma_b, r.d_gamma_b[m]);
    brs[m].beta_b = add(brs[m].beta_b, r.d_beta_b[m]);
  }
  return out;
}

double decay_mask(Index step, Index end_step) {
  if (step >= end_step) return 0.0;
  if (step <= 0) return 1.0;
  const double t = static_cast<double>(step) / static_cast<double>(end_step);
  return 0.5 * (1.0 + std::cos(M_PI * t));
}

template <typename S>
TokenMixer<S>::TokenMixer(Index channels, Index window, Rng& rng)
    : channels_(channels), window_(window) {
  const double s = 1.0 / std::sqrt(static_cast<double>(channels));
  wq_ = randn<S>({channels, channels}, rng, s);
  wk_ = randn<S>({channels, channels}, rng, s);
  wv_ = randn<S>({channels, channels}, rng, s);
  wo_ = randn<S>({channels, channels}, rng, s);
}

template <typename S>
Tensor<S> TokenMixer<S>::forward(const Tensor<S>& h) const {
  if (h.rank() != 4 || h.dim(1) != channels_) {
    throw ShapeError("token mixer input " + to_string(h.shape()));
  }
  const Index N = h.dim(0), C = channels_, H = h.dim(2), W = h.dim(3);
  auto fit = [&](Index extent) {
    Index w = std::min(window_, extent);
    while (extent % w != 0) --w;
    return w;
  };
  const Index wh = fit(H), ww = fit(W);
  const Index nh = H / wh, nw = W / ww, B = N * nh * nw, T = wh * ww;
  Tensor<S> x = reshape(h, Shape{N, C, nh, wh, nw, ww});
  x = reshape(permute(x, {0, 2, 4, 3, 5, 1}), Shape{B * T, C});
  auto proj = [&](const Tensor<S>& w) { return reshape(matmul(x, w), Shape{B, T, C}); };
  const Tensor<S> q = proj(wq_), k = proj(wk_), v = proj(wv_);
  const S scale = S(1) / std::sqrt(static_cast<S>(C));
  const Tensor<S> attn = softmax(bmm(q, k, false, true) * scale);
  Tensor<S> o = matmul(reshape(bmm(attn, v), Shape{B * T, C}), wo_);
  o = permute(reshape(o, Shape{N, nh, nw, wh, ww, C}), {0, 5, 1, 3, 2, 4});
  return reshape(o, h.shape());
}

template <typename S>
ParamList<S> TokenMixer<S>::params() const {
  return {{"wq", wq_}, {"wk", wk_}, {"wv", wv_}, {"wo", wo_}};
}

template <typename S>
ModMixerBlock<S>::ModMixerBlock(Index in, Index out, int branches, Index window,
                                Rng& rng, double gain)
    : mixer_(in, window, rng), lin_(in, out, branches, rng, gain) {}

template <typename S>
Tensor<S> ModMixerBlock<S>::mixed(const Tensor<S>& h) const {
  if (mask_ <= 0.0) return h * S(2);
  const S m = static_cast<S>(mask_);
  return mixer_.forward(h) * m + h * (S(2) - m);
}

template <typename S>
Tensor<S> ModMixerBlock<S>::forward_expanded(const Tensor<S>& h) const {
  return lin_.forward_expanded(mixed(h));
}

template <typename S>
Tensor<S> ModMixerBlock<S>::forward(const Tensor<S>& h) const {
  return lin_.forward(mixed(h));
}

template <typename S>
ParamList<S> ModMixerBlock<S>::params() const {
  ParamList<S> out;
  append(out, "mixer.", mixer_.params());
  append(out, "lin.", lin_.params());
  return out;
}

template <typename S>
ContractedLinear<S> contract(const ModMixerBlock<S>& block) {
  const ContractedLinear<S> c = contract(block.linear());
  return {Tensor<S>(c.weight.shape(), c.weight.value() * S(2)), c.bias};
}

#define INRVC_INSTANTIATE_MODMIXER(S)                                                  \
  template class ExpandedLinear<S>;                                                    \
  template struct LinearResidual<S>;                                                   \
  template struct FrozenLinear<S>;                                                     \
  template class TokenMixer<S>;                                                        \
  template class ModMixerBlock<S>;                                                     \
  template ContractedLinear<S> contract<S>(const ExpandedLinear<S>&);                  \
  template ContractedLinear<S> contract<S>(const ModMixerBlock<S>&);                   \
  template FrozenLinear<S> freeze<S>(const ExpandedLinear<S>&);                        \
  template ExpandedLinear<S> with_residual<S>(const ExpandedLinear<S>&, const LinearResidual<S>&);

INRVC_INSTANTIATE_MODMIXER(float)
INRVC_INSTANTIATE_MODMIXER(double)

#undef INRVC_INSTANTIATE_MODMIXER

}  // namespace inrvc
