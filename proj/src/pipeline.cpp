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


#include "inrvc/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <sstream>

#include "inrvc/errors.hpp"
#include "inrvc/gop.hpp"
#include "inrvc/metrics.hpp"

namespace inrvc {

namespace {

FramePacket packet_header(const FrameRecord& f) {
  FramePacket p;
  p.display = static_cast<std::uint16_t>(f.display);
  p.type = f.type;
  p.ref1 = f.ref1;
  p.ref2 = f.ref2;
  p.layer = static_cast<std::uint8_t>(f.layer);
  return p;
}

}  // namespace

SequenceHeader make_header(const CodecModel& model, const CodecRuntime& rt, Index height,
                           Index width, int frames, const EncodeOptions& options) {
  const CodecConfig& c = model.config;
  SequenceHeader h;
  h.width = static_cast<std::uint16_t>(width);
  h.height = static_cast<std::uint16_t>(height);
  h.frame_count = static_cast<std::uint32_t>(frames);
  h.mode = options.mode;
  h.gop_length = static_cast<std::uint16_t>(options.gop_length);
  h.intra_period = static_cast<std::uint16_t>(options.intra_period);
  h.levels = static_cast<std::uint8_t>(c.levels);
  h.latent_channels = static_cast<std::uint16_t>(c.latent_channels);
  for (int b : decoder_schedule(c.decoder, rt.patch()).bases) {
    h.pe_bases.push_back(static_cast<std::uint16_t>(b));
  }
  for (Index g : model.entropy.grouping().sizes) h.group_sizes.push_back(static_cast<std::uint16_t>(g));
  h.patch = static_cast<std::uint16_t>(rt.patch());
  h.pretrain_patch = static_cast<std::uint16_t>(c.decoder.pretrain_patch);
  h.scaled_pe = c.decoder.scaled_pe;
  h.concat_fusion = c.entropy.fusion == Fusion::kConcat;
  h.checkpoint_hash = rt.hash();
  return h;
}

void check_header(const SequenceHeader& h, const CodecModel& model, const CodecRuntime& rt) {
  if (h.checkpoint_hash != rt.hash()) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "checkpoint hash mismatch: stream %016llx, model %016llx",
                  static_cast<unsigned long long>(h.checkpoint_hash),
                  static_cast<unsigned long long>(rt.hash()));
    throw ConfigError(buf);
  }
  EncodeOptions o;
  o.mode = h.mode;
  o.gop_length = h.gop_length;
  o.intra_period = h.intra_period;
  SequenceHeader want = make_header(model, rt, h.height, h.width, int(h.frame_count), o);
  want.packet_count = h.packet_count;
  if (!(want == h)) throw ConfigError("stream architecture fields do not match the model");
}

EncodeResult encode_sequence(const CodecModel& model, const std::vector<TensorF>& frames,
                             const EncodeOptions& options, const FrameCallback& progress) {
  if (frames.empty()) throw ParamError("no frames to encode");
  options.rd.validate();
  const Index H = frames[0].dim(2), W = frames[0].dim(3);
  for (const auto& f : frames) {
    if (f.shape() != frames[0].shape() || f.dim(1) != 3) throw ShapeError("frames differ in shape");
  }
  if (H > 65535 || W > 65535 || frames.size() > 65535) throw ParamError("video too large");
  const CodecRuntime rt(model, model.config.decoder.patch);
  const GopStructure gop =
      build_gop(options.mode, options.gop_length, options.intra_period, int(frames.size()));
  check_references(gop);

  EncodeResult out;
  out.header = make_header(model, rt, H, W, int(frames.size()), options);
  out.reconstruction.resize(frames.size());
  std::vector<FramePacket> packets;
  FrameBuffer buffer;
  UpdateState state = UpdateState::zeros(rt);
  for (const FrameRecord& f : gop.frames) {
    const auto t0 = std::chrono::steady_clock::now();
    FrameJob job;
    job.frame = frames[f.display].detach();
    job.header = packet_header(f);
    job.buffer = &buffer;
    job.state = &state;
    job.q_glob = schedule_q_glob(f.display, gop, model.config.qglob);
    const int steps = options.overfit_steps >= 0 ? options.overfit_steps : options.rd.steps_for(f.type);
    OverfitResult r = overfit_frame(rt, job, options.rd, steps);
    FrameReport rep;
    rep.display = f.display;
    rep.decode = f.decode;
    rep.type = f.type;
    rep.bytes = framed_size(r.packet);
    out.reconstruction[f.display] = crop_frame(r.decoded.image, H, W);
    rep.psnr = psnr(frames[f.display], out.reconstruction[f.display]);
    rep.initial_objective = r.initial_objective;
    rep.best_objective = r.best_objective;
    rep.best_step = r.best_step;
    rep.soft_bits = r.soft_bits;
    rep.true_bits = r.true_bits;
    packets.push_back(std::move(r.packet));
    state = std::move(r.next_state);
    buffer.insert(f.display, std::move(r.decoded));
    buffer.retain(live_references(gop, f.decode));
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (progress) progress(rep);
    out.frames.push_back(rep);
  }
  out.bytes = write_sequence(out.header, packets);
  out.header.packet_count = static_cast<std::uint32_t>(packets.size());
  out.bpp = measure_bpp(out.bytes.size(), frames.size(), H, W);
  out.psnr = mean_psnr(frames, out.reconstruction);
  out.ms_ssim = mean_ms_ssim(frames, out.reconstruction);
  return out;
}

DecodeResult decode_sequence(const CodecModel& model, const std::vector<std::uint8_t>& bytes) {
  SequenceReader reader(bytes);
  DecodeResult out;
  out.header = reader.header();
  const SequenceHeader& h = out.header;
  const CodecRuntime rt(model, h.patch);
  check_header(h, model, rt);
  GopStructure gop;
  try {
    gop = build_gop(h.mode, h.gop_length, h.intra_period, int(h.frame_count));
  } catch (const ParamError& e) {
    throw FormatError(std::string("invalid GOP fields: ") + e.what());
  }
  if (h.packet_count != h.frame_count) throw FormatError("packet count differs from frame count");
  const Index Hp = padded_extent(h.height, rt.patch()), Wp = padded_extent(h.width, rt.patch());
  out.frames.resize(h.frame_count);
  FrameBuffer buffer;
  UpdateState state = UpdateState::zeros(rt);
  for (const FrameRecord& f : gop.frames) {
    const auto p = reader.next();
    if (!p) throw CorruptError("stream ends early");
    if (p->display != f.display || p->type != f.type || p->ref1 != f.ref1 || p->ref2 != f.ref2 ||
        p->layer != f.layer) {
      throw FormatError("packet " + std::to_string(f.decode) + " does not follow the GOP order");
    }
    UpdateState next;
    DecodedFrame d;
    try {
      d = decode_packet(rt, *p, buffer, state, Hp, Wp, &next);
    } catch (const DecodeError& e) {
      throw CorruptError(std::string("payload of frame ") + std::to_string(f.display) + ": " + e.what());
    } catch (const SymbolError& e) {
      throw CorruptError(std::string("payload of frame ") + std::to_string(f.display) + ": " + e.what());
    } catch (const StateError& e) {
      throw FormatError(e.what());
    }
    out.frames[f.display] = crop_frame(d.image, h.height, h.width);
    state = std::move(next);
    buffer.insert(f.display, std::move(d));
    buffer.retain(live_references(gop, f.decode));
  }
  if (reader.next()) throw FormatError("extra packets after the last frame");
  return out;
}

double mean_psnr(const std::vector<TensorF>& ref, const std::vector<TensorF>& test) {
  if (ref.size() != test.size() || ref.empty()) throw ShapeError("sequence lengths differ");
  double s = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) s += psnr(ref[i], test[i]);
  return s / double(ref.size());
}

double mean_ms_ssim(const std::vector<TensorF>& ref, const std::vector<TensorF>& test) {
  if (ref.size() != test.size() || ref.empty()) throw ShapeError("sequence lengths differ");
  double s = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) s += ms_ssim(ref[i], test[i]);
  return s / double(ref.size());
}

std::vector<RdRow> lambda_sweep(const CodecModel& model, const std::vector<TensorF>& frames,
                                const std::vector<double>& lambdas, EncodeOptions options,
                                const std::function<void(const RdRow&)>& progress) {
  if (lambdas.size() < 2) throw ParamError("a sweep needs at least two lambda values");
  std::vector<RdRow> rows;
  for (double l : lambdas) {
    options.rd.lambda = l;
    const EncodeResult r = encode_sequence(model, frames, options);
    rows.push_back({l, r.bpp, r.psnr, r.ms_ssim});
    if (progress) progress(rows.back());
  }
  return rows;
}

std::string rd_csv(const std::vector<RdRow>& rows) {
  std::ostringstream os;
  os.precision(10);
  os << "lambda,bpp,psnr,ms_ssim\n";
  for (const auto& r : rows) os << r.lambda << ',' << r.bpp << ',' << r.psnr << ',' << r.ms_ssim << '\n';
  return os.str();
}

std::vector<RdRow> parse_rd_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line.rfind("lambda,bpp,psnr", 0) != 0) {
    throw FormatError("RD CSV must start with the header lambda,bpp,psnr,ms_ssim");
  }
  std::vector<RdRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    RdRow r;
    char c1, c2, c3;
    std::istringstream ls(line);
    if (!(ls >> r.lambda >> c1 >> r.bpp >> c2 >> r.psnr >> c3 >> r.ms_ssim) || c1 != ',' ||
        c2 != ',' || c3 != ',') {
      throw FormatError("malformed RD row: " + line);
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace inrvc
