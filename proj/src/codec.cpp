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


#include "inrvc/codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "inrvc/errors.hpp"

namespace inrvc {

void CodecConfig::propagate() {
  if (latent_channels < 4) throw ConfigError("latent channels must be >= 4");
  if (levels < 1 || levels > 6) throw ConfigError("levels must lie in [1, 6]");
  if (motion.levels < levels) throw ConfigError("motion pyramid shallower than the latent levels");
  encoder.latent_channels = decoder.channels = entropy.channels = latent_channels;
  encoder.levels = decoder.levels = entropy.levels = levels;
  const Index unit = Index{1} << levels;
  if (decoder.pretrain_patch % unit || decoder.patch % decoder.pretrain_patch) {
    throw ConfigError("patch sizes must be multiples of 2^L and of each other");
  }
  if (prior_half_width < 1 || prior_half_width > 1024) throw ConfigError("bad prior window");
}

CodecConfig default_config() {
  CodecConfig c;
  c.propagate();
  return c;
}

CodecModel::CodecModel(CodecConfig c) : config(std::move(c)) {
  config.propagate();
  Rng rng(config.seed);
  encoder = ImageEncoder<float>(config.encoder, rng);
  motion = MotionEstimator<float>(config.motion, rng);
  decoder = Decoder<float>(config.decoder, rng);
  entropy = EntropyModel<float>(config.entropy, rng);
  prior = FactorizedPrior<float>(config.prior_width, rng);
  const Index C2 = 2 * config.latent_channels;
  for (int l = 0; l < config.levels; ++l) {
    log_q.push_back(filled<float>({C2}, std::log(2.0)));
    log_qt.push_back(filled<float>({C2}, std::log(0.5)));
  }
  refresh_prior_table();
}

void CodecModel::set_mask(double m) {
  decoder.set_mask(m);
  entropy.set_mask(m);
}

void CodecModel::refresh_prior_table() { prior_table = inrvc::prior_table(prior, config.prior_half_width); }

ParamList<float> CodecModel::params() const {
  ParamList<float> out;
  append(out, "", encoder.params());
  append(out, "", motion.params());
  append(out, "", decoder.params());
  append(out, "ent.", entropy.params());
  append(out, "prior.", prior.params());
  for (int l = 0; l < config.levels; ++l) {
    out.push_back({"log_q" + std::to_string(l), log_q[l]});
    out.push_back({"log_qt" + std::to_string(l), log_qt[l]});
  }
  return out;
}

namespace {

constexpr char kCkptMagic[8] = {'I', 'N', 'R', 'V', 'C', 'K', 'P', 'T'};
constexpr std::uint16_t kCkptVersion = 1;

void write_config(ByteWriter& w, const CodecConfig& c) {
  w.u16(std::uint16_t(c.latent_channels));
  w.u8(std::uint8_t(c.levels));
  w.u16(std::uint16_t(c.encoder.width));
  w.f64(c.encoder.head_gain);
  w.u16(std::uint16_t(c.motion.width));
  w.u8(std::uint8_t(c.motion.levels));
  w.u8(std::uint8_t(c.decoder.branches));
  w.u16(std::uint16_t(c.decoder.window));
  w.u16(std::uint16_t(c.decoder.patch));
  w.u16(std::uint16_t(c.decoder.pretrain_patch));
  w.u8(c.decoder.scaled_pe ? 1 : 0);
  w.f64(c.decoder.pe_init);
  w.u16(std::uint16_t(c.entropy.features));
  w.u8(std::uint8_t(c.entropy.branches));
  w.u16(std::uint16_t(c.entropy.window));
  w.u8(c.entropy.uneven_groups ? 1 : 0);
  w.u8(c.entropy.fusion == Fusion::kConcat ? 1 : 0);
  w.f64(c.entropy.sigma_init);
  w.f64(c.entropy.gain);
  w.u16(std::uint16_t(c.prior_width));
  w.u16(std::uint16_t(c.prior_half_width));
  w.f32(c.qglob.intra);
  w.f32(c.qglob.first);
  w.f32(c.qglob.decay);
  w.u64(c.seed);
}

CodecConfig read_config(ByteReader& r) {
  CodecConfig c;
  c.latent_channels = r.u16();
  c.levels = r.u8();
  c.encoder.width = r.u16();
  c.encoder.head_gain = r.f64();
  c.motion.width = r.u16();
  c.motion.levels = r.u8();
  c.decoder.branches = r.u8();
  c.decoder.window = r.u16();
  c.decoder.patch = r.u16();
  c.decoder.pretrain_patch = r.u16();
  c.decoder.scaled_pe = r.u8() != 0;
  c.decoder.pe_init = r.f64();
  c.entropy.features = r.u16();
  c.entropy.branches = r.u8();
  c.entropy.window = r.u16();
  c.entropy.uneven_groups = r.u8() != 0;
  c.entropy.fusion = r.u8() ? Fusion::kConcat : Fusion::kModulation;
  c.entropy.sigma_init = r.f64();
  c.entropy.gain = r.f64();
  c.prior_width = r.u16();
  c.prior_half_width = r.u16();
  c.qglob.intra = r.f32();
  c.qglob.first = r.f32();
  c.qglob.decay = r.f32();
  c.seed = r.u64();
  return c;
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const CodecModel& m) {
  ByteWriter w;
  w.bytes(reinterpret_cast<const std::uint8_t*>(kCkptMagic), 8);
  w.u16(kCkptVersion);
  write_config(w, m.config);
  w.f64(m.lambda);
  w.f64(m.decoder.mask());
  const auto params = m.params();
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    w.str(p.name);
    w.u8(static_cast<std::uint8_t>(p.tensor.rank()));
    for (Index d : p.tensor.shape()) w.u32(static_cast<std::uint32_t>(d));
    for (Index i = 0; i < p.tensor.numel(); ++i) w.f32(p.tensor.at(i));
  }
  const auto freq = m.prior_table.frequencies();
  w.u32(static_cast<std::uint32_t>(freq.size()));
  for (auto f : freq) w.u32(f);
  return std::move(w.data());
}

CodecModel parse_checkpoint(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes.data(), bytes.size());
  try {
    if (bytes.size() < 8 || std::memcmp(r.take(8), kCkptMagic, 8) != 0) {
      throw FormatError("not a checkpoint file");
    }
    const std::uint16_t version = r.u16();
    if (version != kCkptVersion) throw VersionError("checkpoint version " + std::to_string(version));
    CodecModel m(read_config(r));
    m.lambda = r.f64();
    const double mask = r.f64();
    m.set_mask(mask);
    auto params = m.params();
    const std::uint32_t n = r.u32();
    if (n != params.size()) throw ConfigError("checkpoint tensor count does not match the config");
    for (auto& p : params) {
      if (r.str() != p.name) throw ConfigError("checkpoint tensor order does not match");
      const std::size_t rank = r.u8();
      Shape s(rank);
      for (auto& d : s) d = r.u32();
      if (s != p.tensor.shape()) throw ConfigError("checkpoint shape mismatch for " + p.name);
      auto& v = p.tensor.mutable_value();
      for (Index i = 0; i < v.size(); ++i) v(i) = r.f32();
    }
    std::vector<std::uint32_t> freq(r.u32());
    for (auto& f : freq) f = r.u32();
    if (freq.size() != std::size_t(2 * m.config.prior_half_width + 2)) {
      throw FormatError("prior table size does not match the config");
    }
    m.prior_table = FreqTable::from_frequencies(freq);
    if (r.remaining() != 0) throw FormatError("trailing bytes in checkpoint");
    return m;
  } catch (const CorruptError& e) {
    throw FormatError(std::string("truncated checkpoint: ") + e.what());
  } catch (const SymbolError& e) {
    throw FormatError(std::string("bad prior table: ") + e.what());
  }
}

std::uint64_t checkpoint_hash(const CodecModel& m) {
  const auto b = serialize_checkpoint(m);
  return fnv1a64(b.data(), b.size());
}

void save_checkpoint(const CodecModel& m, const std::string& path) {
  const auto b = serialize_checkpoint(m);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    f.write(reinterpret_cast<const char*>(b.data()), std::streamsize(b.size()));
    if (!f) throw IoError("cannot write " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw IoError("cannot rename onto " + path);
}

CodecModel load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  std::vector<std::uint8_t> b((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return parse_checkpoint(b);
}

CodecRuntime::CodecRuntime(const CodecModel& model, Index patch)
    : model_(model), patch_(patch), decoder_(model.decoder.compile(patch)) {
  if (model.entropy.mask() != 0.0) throw StateError("entropy model mask decay unfinished");
  set_requires_grad(model.entropy.params(), false);
  set_requires_grad(model.prior.params(), false);
  frozen_ = freeze_head(model.entropy);
  layout_ = zero_residual(model.entropy);
  residual_size_ = flatten_residual(layout_).numel();
  hash_ = checkpoint_hash(model);
}

EntropyHead<float> CodecRuntime::head(const TensorF& psi) const {
  const auto r = unflatten_residual(psi.detach(), layout_);
  std::vector<ContractedLinear<float>> layers;
  for (std::size_t i = 0; i < frozen_.size(); ++i) layers.push_back(frozen_[i].consolidate(r[i]));
  return EntropyModel<float>::head(std::move(layers));
}

EntropyHead<float> CodecRuntime::training_head(const TensorF& psi) const {
  return EntropyModel<float>::head(apply_weight_update(frozen_, unflatten_residual(psi, layout_)));
}

const DecodedFrame& FrameBuffer::get(int display) const {
  const auto it = frames_.find(display);
  if (it == frames_.end()) {
    throw StateError("reference frame " + std::to_string(display) + " is not in the buffer");
  }
  return it->second;
}

void FrameBuffer::retain(const std::vector<int>& keep) {
  for (auto it = frames_.begin(); it != frames_.end();) {
    if (std::find(keep.begin(), keep.end(), it->first) == keep.end()) {
      it = frames_.erase(it);
    } else {
      ++it;
    }
  }
}

UpdateState UpdateState::zeros(const CodecRuntime& rt) {
  UpdateState s;
  for (int l = 0; l < rt.model().config.levels; ++l) {
    s.psi.push_back(TensorF::zeros({rt.residual_size()}));
  }
  return s;
}

LevelContext<float> level_context(const FramePacket& header, const FrameBuffer& buffer,
                                  const std::vector<TensorF>& planes, int level, int levels) {
  LevelContext<float> ctx;
  if (level < levels) ctx.coarser = planes.at(level);
  if (header.ref1 >= 0) ctx.ref1 = buffer.get(header.ref1).latents.at(level - 1);
  if (header.ref2 >= 0) ctx.ref2 = buffer.get(header.ref2).latents.at(level - 1);
  return ctx;
}

std::vector<TensorF> updated_psi(const UpdateState& base, const FramePacket& header,
                                 const std::vector<std::vector<std::int32_t>>& symbols) {
  std::vector<TensorF> out;
  for (std::size_t l = 0; l < symbols.size(); ++l) {
    const Index n = static_cast<Index>(symbols[l].size());
    ArrayX<float> v = header.type == FrameType::kIntra ? ArrayX<float>::Zero(n)
                                                       : ArrayX<float>(base.psi.at(l).value());
    if (v.size() != n) throw ShapeError("weight update length mismatch");
    for (Index i = 0; i < n; ++i) v(i) += header.qt_psi.at(l) * static_cast<float>(symbols[l][i]);
    out.emplace_back(Shape{n}, std::move(v));
  }
  return out;
}

namespace {

std::vector<float> inverse_scales(const std::vector<std::uint16_t>& codes) {
  std::vector<float> qt;
  for (auto c : codes) qt.push_back(decode_scale(c));
  return qt;
}

void check_refs(const FramePacket& p, const FrameBuffer& buffer) {
  for (int r : {p.ref1, p.ref2}) {
    if (r >= 0) buffer.get(r);
  }
}

double table_bits(const FreqTable& t, std::size_t s) {
  return -std::log2(double(t.freq(s)) / double(kFreqTotal));
}

}  // namespace

FramePacket encode_frame(const CodecRuntime& rt, FramePacket p, const FrameDecision& d,
                         const FrameBuffer& buffer, const UpdateState& state,
                         double* estimated_bits) {
  const CodecModel& m = rt.model();
  const int L = m.config.levels;
  check_refs(p, buffer);
  p.qt_codes = d.qt_codes;
  p.qt_psi = d.qt_psi;
  RangeEncoder enc;
  double bits = 0.0;
  const int half = m.config.prior_half_width;
  for (int l = 0; l < L; ++l) {
    if (static_cast<Index>(d.psi_symbols[l].size()) != rt.residual_size()) {
      throw ShapeError("weight update symbols do not match the head");
    }
    for (std::int32_t v : d.psi_symbols[l]) {
      encode_with_escape(enc, m.prior_table, half, v);
      bits += table_bits(m.prior_table, std::abs(v) <= half ? std::size_t(v + half)
                                                            : std::size_t(2 * half + 1));
    }
  }
  const auto psi = updated_psi(state, p, d.psi_symbols);
  std::vector<TensorF> planes(L);
  for (int l = L; l >= 1; --l) {
    const auto ctx = level_context(p, buffer, planes, l, L);
    bits += encode_level(enc, rt.coder(), m.entropy, rt.head(psi[l - 1]), l, d.symbols[l - 1],
                         inverse_scales(d.qt_codes[l - 1]), ctx, &planes[l - 1]);
  }
  p.payload = enc.finish();
  if (estimated_bits) *estimated_bits = bits;
  return p;
}

DecodedFrame decode_packet(const CodecRuntime& rt, const FramePacket& p, const FrameBuffer& buffer,
                           const UpdateState& state, Index height, Index width,
                           UpdateState* next_state) {
  const CodecModel& m = rt.model();
  const int L = m.config.levels;
  const Index C2 = 2 * m.config.latent_channels;
  if (static_cast<int>(p.qt_codes.size()) != L || static_cast<int>(p.qt_psi.size()) != L) {
    throw FormatError("packet carries " + std::to_string(p.qt_codes.size()) + " levels, model has " +
                      std::to_string(L));
  }
  for (const auto& c : p.qt_codes) {
    if (static_cast<Index>(c.size()) != C2) throw FormatError("wrong inverse-scale count");
  }
  const Index unit = rt.patch();
  if (height % unit || width % unit) throw ShapeError("frame extent does not tile into patches");
  check_refs(p, buffer);
  RangeDecoder dec(p.payload);
  const int half = m.config.prior_half_width;
  std::vector<std::vector<std::int32_t>> psi_sym(L);
  for (int l = 0; l < L; ++l) {
    psi_sym[l].resize(rt.residual_size());
    for (auto& v : psi_sym[l]) v = decode_with_escape(dec, m.prior_table, half);
  }
  const auto psi = updated_psi(state, p, psi_sym);
  DecodedFrame out;
  out.latents.resize(L);
  for (int l = L; l >= 1; --l) {
    const auto ctx = level_context(p, buffer, out.latents, l, L);
    decode_level(dec, rt.coder(), m.entropy, rt.head(psi[l - 1]), l, height >> l, width >> l,
                 inverse_scales(p.qt_codes[l - 1]), ctx, &out.latents[l - 1]);
  }
  const TensorF ref = p.ref1 >= 0 ? buffer.get(p.ref1).image : TensorF();
  out.image = decode_frame(rt.decoder(), out.latents, ref);
  if (next_state) next_state->psi = psi;
  return out;
}

TensorF pad_frame(const TensorF& x, Index unit) {
  const Index C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const Index Hp = padded_extent(H, unit), Wp = padded_extent(W, unit);
  if (Hp == H && Wp == W) return x.detach();
  ArrayX<float> v(C * Hp * Wp);
  for (Index c = 0; c < C; ++c)
    for (Index y = 0; y < Hp; ++y)
      for (Index q = 0; q < Wp; ++q) {
        v((c * Hp + y) * Wp + q) = x.at((c * H + std::min(y, H - 1)) * W + std::min(q, W - 1));
      }
  return TensorF({1, C, Hp, Wp}, std::move(v));
}

TensorF crop_frame(const TensorF& x, Index height, Index width) {
  if (x.dim(2) == height && x.dim(3) == width) return x;
  return slice(slice(x, 2, 0, height), 3, 0, width);
}

}  // namespace inrvc
