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


#include "inrvc/decoder.hpp"

#include <cmath>
#include <string>

#include "inrvc/errors.hpp"

namespace inrvc {

template <typename S>
Tensor<S> patchify(const Tensor<S>& x, Index p) {
  if (x.rank() != 4 || x.dim(0) != 1 || p < 1 || x.dim(2) % p || x.dim(3) % p) {
    throw ShapeError("cannot tile " + to_string(x.shape()) + " by " + std::to_string(p));
  }
  const Index C = x.dim(1), nh = x.dim(2) / p, nw = x.dim(3) / p;
  const Tensor<S> t = permute(reshape(x, {C, nh, p, nw, p}), {1, 3, 0, 2, 4});
  return reshape(t, {nh * nw, C, p, p});
}

template <typename S>
Tensor<S> unpatchify(const Tensor<S>& tiles, Index height, Index width) {
  const Index p = tiles.dim(2);
  if (tiles.rank() != 4 || tiles.dim(3) != p || height % p || width % p ||
      tiles.dim(0) != (height / p) * (width / p)) {
    throw ShapeError("tiles " + to_string(tiles.shape()) + " do not cover " +
                     std::to_string(height) + "x" + std::to_string(width));
  }
  const Index C = tiles.dim(1), nh = height / p, nw = width / p;
  const Tensor<S> t = permute(reshape(tiles, {nh, nw, C, p, p}), {2, 0, 3, 1, 4});
  return reshape(t, {1, C, height, width});
}

BaseSchedule decoder_schedule(const DecoderConfig& c, Index patch) {
  const Index unit = Index{1} << c.levels;
  if (c.pretrain_patch % unit || patch % unit || patch < c.pretrain_patch) {
    throw ParamError("patch " + std::to_string(patch) + " incompatible with pretraining patch " +
                     std::to_string(c.pretrain_patch));
  }
  std::vector<int> bases(c.levels, 2);
  bases[0] = static_cast<int>(c.pretrain_patch / unit);
  const double k = c.scaled_pe ? double(patch) / double(c.pretrain_patch) : 1.0;
  return make_schedule(bases, k);
}

std::vector<GridCoord> pe_coords(const DecoderConfig& c, Index patch, int layer) {
  const BaseSchedule sched = decoder_schedule(c, patch);
  const int l = c.levels - layer;
  const Index p = patch >> l, stride = Index{1} << (l - 1);
  const Index period = sched.total();
  std::vector<double> coord(p);
  for (Index u = 0; u < p; ++u) {
    if (c.scaled_pe) {
      coord[u] = decompose_scaled(double(u * stride), sched)[layer] / sched.weights[layer];
    } else {
      coord[u] = double(decompose((u * stride) % period, sched.bases)[layer]);
    }
  }
  std::vector<GridCoord> out;
  out.reserve(p * p);
  for (Index r = 0; r < p; ++r) {
    for (Index q = 0; q < p; ++q) out.push_back({coord[r], coord[q]});
  }
  return out;
}

namespace {

// Wraps a [C, B, B] grid by one row and one column so sampling in [0, B]
// interpolates periodically.
template <typename S>
Tensor<S> wrap_pad(const Tensor<S>& g) {
  const Tensor<S> rows = concat<S>({g, slice(g, 1, 0, 1)}, 1);
  return concat<S>({rows, slice(rows, 2, 0, 1)}, 2);
}

template <typename S>
Tensor<S> sample_grid(const Tensor<S>& grid, const std::vector<GridCoord>& coords, Index p) {
  return reshape(interp_bilinear(wrap_pad(grid), coords), {1, grid.dim(0), p, p});
}

void check_latents(const DecoderConfig& c, std::size_t count) {
  if (static_cast<int>(count) != c.levels) {
    throw StateError("decoder needs " + std::to_string(c.levels) + " latent levels, got " +
                     std::to_string(count));
  }
}

}  // namespace

template <typename S>
Tensor<S> decoder_layer(const ContractedLinear<S>& lin, const Tensor<S>& m,
                        const Tensor<S>& gamma, const Tensor<S>& beta) {
  const Tensor<S> z = gamma * instance_norm(m) + beta + m;
  return upsample_bilinear2x(relu(lin.forward(z)));
}

template <typename S>
Decoder<S>::Decoder(const DecoderConfig& config, Rng& rng) : config_(config) {
  const Index C = config.channels;
  const BaseSchedule sched = decoder_schedule(config, config.pretrain_patch);
  for (int i = 0; i < config.levels; ++i) {
    blocks_.emplace_back(C, C, config.branches, config.window, rng);
    const Index B = sched.bases[i];
    pe_.push_back(randn<S>({2 * C, B, B}, rng, config.pe_init));
  }
  intra_ = randn<S>({C, sched.bases[0], sched.bases[0]}, rng, 0.5);
  lift_ = Linear<S>(3, C, rng, 2.0);
  head1_ = Linear<S>(C, C, rng, 1.4);
  head2_ = Linear<S>(C, 3, rng, 0.5);
}

template <typename S>
void Decoder<S>::set_mask(double m) {
  for (auto& b : blocks_) b.set_mask(m);
}

template <typename S>
Tensor<S> Decoder<S>::position_terms(int layer, Index patch) const {
  const Index p = patch >> (config_.levels - layer);
  return sample_grid(pe_[layer], pe_coords(config_, patch, layer), p);
}

template <typename S>
Tensor<S> Decoder<S>::intra_start(Index patch) const {
  return sample_grid(intra_, pe_coords(config_, patch, 0), patch >> config_.levels);
}

template <typename S>
Tensor<S> Decoder<S>::forward(const std::vector<Tensor<S>>& latents, const Tensor<S>& ref1,
                              Index patch) const {
  check_latents(config_, latents.size());
  const int L = config_.levels;
  const Index C = config_.channels;
  Tensor<S> h;
  if (ref1.defined()) {
    Tensor<S> r = ref1 + S(-0.5);
    for (int l = 0; l < L; ++l) r = avg_pool2(r);
    h = patchify(lift_(r), patch >> L);
  } else {
    h = intra_start(patch);
  }
  for (int i = 0; i < L; ++i) {
    const int l = L - i;
    const Tensor<S> lat = patchify(latents[l - 1], patch >> l);
    const Tensor<S> pe = position_terms(i, patch);
    const Tensor<S> gamma = slice(lat, 1, 0, C) + slice(pe, 1, 0, C) + S(1);
    const Tensor<S> beta = slice(lat, 1, C, 2 * C) + slice(pe, 1, C, 2 * C);
    h = decoder_layer(blocks_[i].linear().contract_graph(), blocks_[i].mixed(h), gamma, beta);
  }
  const Tensor<S> rgb = head2_(relu(head1_(h))) + S(0.5);
  return unpatchify(clamp(rgb, S(0), S(1)), latents[0].dim(2) * 2, latents[0].dim(3) * 2);
}

template <typename S>
CompiledDecoder<S> Decoder<S>::compile(Index patch) const {
  if (mask() != 0.0) throw StateError("decoder must finish mask decay before compiling");
  CompiledDecoder<S> out;
  out.config = config_;
  out.patch = patch;
  const Index C = config_.channels;
  for (int i = 0; i < config_.levels; ++i) {
    out.layers.push_back(contract(blocks_[i].linear()));
    const Tensor<S> pe = position_terms(i, patch).detach();
    out.pe_gamma.push_back((slice(pe, 1, 0, C) + S(1)).detach());
    out.pe_beta.push_back(slice(pe, 1, C, 2 * C).detach());
  }
  out.intra = intra_start(patch).detach();
  out.lift = frozen(lift_);
  out.head1 = frozen(head1_);
  out.head2 = frozen(head2_);
  return out;
}

template <typename S>
ParamList<S> Decoder<S>::params() const {
  ParamList<S> out;
  for (int i = 0; i < config_.levels; ++i) {
    const std::string p = "dec.l" + std::to_string(i) + ".";
    append(out, p, blocks_[i].params());
    out.push_back({p + "pe", pe_[i]});
  }
  out.push_back({"dec.intra", intra_});
  append(out, "dec.lift.", lift_.params());
  append(out, "dec.head1.", head1_.params());
  append(out, "dec.head2.", head2_.params());
  return out;
}

template <typename S>
Tensor<S> decode_frame(const CompiledDecoder<S>& dec, const std::vector<Tensor<S>>& latents,
                       const Tensor<S>& ref1) {
  check_latents(dec.config, latents.size());
  const int L = dec.config.levels;
  const Index C = dec.config.channels, patch = dec.patch;
  Tensor<S> h;
  if (ref1.defined()) {
    Tensor<S> r = ref1 + S(-0.5);
    for (int l = 0; l < L; ++l) r = avg_pool2(r);
    h = patchify(dec.lift(r), patch >> L);
  } else {
    h = dec.intra;
  }
  for (int i = 0; i < L; ++i) {
    const int l = L - i;
    const Tensor<S> lat = patchify(latents[l - 1], patch >> l);
    const Tensor<S> gamma = slice(lat, 1, 0, C) + dec.pe_gamma[i];
    const Tensor<S> beta = slice(lat, 1, C, 2 * C) + dec.pe_beta[i];
    h = decoder_layer(dec.layers[i], h * S(2), gamma, beta);
  }
  const Tensor<S> rgb = dec.head2(relu(dec.head1(h))) + S(0.5);
  return unpatchify(clamp(rgb, S(0), S(1)), latents[0].dim(2) * 2, latents[0].dim(3) * 2);
}

#define INRVC_INSTANTIATE_DECODER(S)                                                        \
  template Tensor<S> patchify(const Tensor<S>&, Index);                                     \
  template Tensor<S> unpatchify(const Tensor<S>&, Index, Index);                            \
  template Tensor<S> decoder_layer(const ContractedLinear<S>&, const Tensor<S>&,            \
                                   const Tensor<S>&, const Tensor<S>&);                     \
  template class Decoder<S>;                                                                \
  template Tensor<S> decode_frame(const CompiledDecoder<S>&, const std::vector<Tensor<S>>&, \
                                  const Tensor<S>&);

INRVC_INSTANTIATE_DECODER(float)
INRVC_INSTANTIATE_DECODER(double)

}  // namespace inrvc
