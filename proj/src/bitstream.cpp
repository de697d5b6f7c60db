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


#include "inrvc/bitstream.hpp"

#include <zlib.h>

#include <bit>
#include <cmath>
#include <cstring>

#include "inrvc/errors.hpp"

namespace inrvc {

namespace {

constexpr std::uint8_t kMagic[4] = {'I', 'N', 'R', 'V'};
constexpr std::uint16_t kNoRef = 0xFFFF;

}  // namespace

void ByteWriter::u16(std::uint16_t v) {
  u8(std::uint8_t(v >> 8));
  u8(std::uint8_t(v));
}
void ByteWriter::u32(std::uint32_t v) {
  u16(std::uint16_t(v >> 16));
  u16(std::uint16_t(v));
}
void ByteWriter::u64(std::uint64_t v) {
  u32(std::uint32_t(v >> 32));
  u32(std::uint32_t(v));
}
void ByteWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
void ByteWriter::bytes(const std::uint8_t* p, std::size_t n) { out_.insert(out_.end(), p, p + n); }
void ByteWriter::str(const std::string& s) {
  u16(static_cast<std::uint16_t>(s.size()));
  bytes(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
}

const std::uint8_t* ByteReader::take(std::size_t n) {
  if (n > size_ - pos_) throw CorruptError("unexpected end of data");
  const std::uint8_t* p = data_ + pos_;
  pos_ += n;
  return p;
}
std::uint8_t ByteReader::u8() { return *take(1); }
std::uint16_t ByteReader::u16() {
  const std::uint8_t* p = take(2);
  return std::uint16_t(p[0] << 8 | p[1]);
}
std::uint32_t ByteReader::u32() {
  const std::uint32_t hi = u16();
  return hi << 16 | u16();
}
std::uint64_t ByteReader::u64() {
  const std::uint64_t hi = u32();
  return hi << 32 | u32();
}
float ByteReader::f32() { return std::bit_cast<float>(u32()); }
double ByteReader::f64() { return std::bit_cast<double>(u64()); }
std::string ByteReader::str() {
  const std::size_t n = u16();
  const std::uint8_t* p = take(n);
  return std::string(reinterpret_cast<const char*>(p), n);
}

std::uint32_t crc32(const std::uint8_t* data, std::size_t size) {
  return static_cast<std::uint32_t>(::crc32_z(0L, data, size));
}

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t size) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::vector<std::uint8_t> serialize_header(const SequenceHeader& h) {
  ByteWriter w;
  w.bytes(kMagic, 4);
  w.u16(kFormatVersion);
  w.u16(h.width);
  w.u16(h.height);
  w.u32(h.frame_count);
  w.u8(h.mode == GopMode::kLowDelay ? 0 : 1);
  w.u16(h.gop_length);
  w.u16(h.intra_period);
  w.u8(h.levels);
  w.u16(h.latent_channels);
  w.u8(static_cast<std::uint8_t>(h.pe_bases.size()));
  for (auto b : h.pe_bases) w.u16(b);
  w.u8(static_cast<std::uint8_t>(h.group_sizes.size()));
  for (auto g : h.group_sizes) w.u16(g);
  w.u16(h.patch);
  w.u16(h.pretrain_patch);
  w.u8(std::uint8_t((h.scaled_pe ? 1 : 0) | (h.concat_fusion ? 2 : 0)));
  w.u64(h.checkpoint_hash);
  w.u32(h.packet_count);
  const std::uint32_t c = crc32(w.data().data(), w.data().size());
  w.u32(c);
  return std::move(w.data());
}

namespace {

SequenceHeader parse_header(ByteReader& r) {
  const std::uint8_t* start = r.take(0);
  const std::uint8_t* magic = r.take(4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("bad magic");
  const std::uint16_t version = r.u16();
  if (version != kFormatVersion) {
    throw VersionError("stream version " + std::to_string(version) + ", decoder supports " +
                       std::to_string(kFormatVersion));
  }
  SequenceHeader h;
  h.width = r.u16();
  h.height = r.u16();
  h.frame_count = r.u32();
  const std::uint8_t mode = r.u8();
  if (mode > 1) throw FormatError("unknown GOP mode");
  h.mode = mode == 0 ? GopMode::kLowDelay : GopMode::kRandomAccess;
  h.gop_length = r.u16();
  h.intra_period = r.u16();
  h.levels = r.u8();
  h.latent_channels = r.u16();
  h.pe_bases.resize(r.u8());
  for (auto& b : h.pe_bases) b = r.u16();
  h.group_sizes.resize(r.u8());
  for (auto& g : h.group_sizes) g = r.u16();
  h.patch = r.u16();
  h.pretrain_patch = r.u16();
  const std::uint8_t flags = r.u8();
  if (flags > 3) throw FormatError("unknown header flags");
  h.scaled_pe = flags & 1;
  h.concat_fusion = flags & 2;
  h.checkpoint_hash = r.u64();
  h.packet_count = r.u32();
  const std::size_t body = r.position();
  const std::uint32_t stored = r.u32();
  if (crc32(start, body) != stored) throw CorruptError("sequence header checksum mismatch");
  if (h.width == 0 || h.height == 0 || h.levels == 0 || h.pe_bases.size() != h.levels ||
      h.latent_channels == 0) {
    throw FormatError("inconsistent sequence header");
  }
  return h;
}

}  // namespace

std::vector<std::uint8_t> serialize_packet(const FramePacket& p) {
  ByteWriter w;
  w.u16(p.display);
  w.u8(static_cast<std::uint8_t>(p.type));
  w.u16(p.ref1 < 0 ? kNoRef : static_cast<std::uint16_t>(p.ref1));
  w.u16(p.ref2 < 0 ? kNoRef : static_cast<std::uint16_t>(p.ref2));
  w.u8(p.layer);
  w.u8(static_cast<std::uint8_t>(p.qt_codes.size()));
  for (std::size_t l = 0; l < p.qt_codes.size(); ++l) {
    w.u16(static_cast<std::uint16_t>(p.qt_codes[l].size()));
    for (auto c : p.qt_codes[l]) w.u16(c);
    w.f32(p.qt_psi.at(l));
  }
  w.u32(static_cast<std::uint32_t>(p.payload.size()));
  w.bytes(p.payload.data(), p.payload.size());
  return std::move(w.data());
}

std::size_t framed_size(const FramePacket& p) { return serialize_packet(p).size() + 8; }

FramePacket parse_packet(const std::uint8_t* data, std::size_t size) {
  ByteReader r(data, size);
  FramePacket p;
  try {
    p.display = r.u16();
    const std::uint8_t type = r.u8();
    if (type > 2) throw FormatError("unknown frame type");
    p.type = static_cast<FrameType>(type);
    const std::uint16_t r1 = r.u16(), r2 = r.u16();
    p.ref1 = r1 == kNoRef ? -1 : r1;
    p.ref2 = r2 == kNoRef ? -1 : r2;
    const bool needs1 = p.type != FrameType::kIntra, needs2 = p.type == FrameType::kBidirectional;
    if (needs1 != (p.ref1 >= 0) || needs2 != (p.ref2 >= 0)) {
      throw FormatError("reference fields do not match the frame type");
    }
    p.layer = r.u8();
    const std::uint8_t levels = r.u8();
    p.qt_codes.resize(levels);
    p.qt_psi.resize(levels);
    for (std::size_t l = 0; l < levels; ++l) {
      p.qt_codes[l].resize(r.u16());
      for (auto& c : p.qt_codes[l]) {
        c = r.u16();
        if (c == 0) throw FormatError("zero inverse scale");
      }
      p.qt_psi[l] = r.f32();
      if (!(p.qt_psi[l] > 0.0f) || !std::isfinite(p.qt_psi[l])) {
        throw FormatError("invalid weight-update scale");
      }
    }
    const std::uint32_t n = r.u32();
    const std::uint8_t* payload = r.take(n);
    p.payload.assign(payload, payload + n);
  } catch (const CorruptError&) {
    throw FormatError("packet fields overrun the packet");
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes in packet");
  return p;
}

std::vector<std::uint8_t> write_sequence(SequenceHeader header,
                                         const std::vector<FramePacket>& packets) {
  header.packet_count = static_cast<std::uint32_t>(packets.size());
  ByteWriter w;
  const auto h = serialize_header(header);
  w.bytes(h.data(), h.size());
  for (const auto& p : packets) {
    const auto body = serialize_packet(p);
    w.u32(static_cast<std::uint32_t>(body.size()));
    w.bytes(body.data(), body.size());
    w.u32(crc32(body.data(), body.size()));
  }
  return std::move(w.data());
}

SequenceReader::SequenceReader(const std::uint8_t* data, std::size_t size)
    : data_(data), size_(size) {
  ByteReader r(data, size);
  if (size < 4 || std::memcmp(data, kMagic, 4) != 0) throw FormatError("bad magic");
  header_ = parse_header(r);
  pos_ = r.position();
}

std::optional<FramePacket> SequenceReader::next() {
  if (read_ == header_.packet_count) {
    if (pos_ != size_) throw CorruptError("trailing data after the last packet");
    return std::nullopt;
  }
  ByteReader r(data_ + pos_, size_ - pos_);
  const std::string where = "packet " + std::to_string(read_);
  const std::uint8_t* body;
  std::uint32_t stored, len;
  try {
    len = r.u32();
    body = r.take(len);
    stored = r.u32();
  } catch (const CorruptError&) {
    throw CorruptError(where + " is truncated");
  }
  if (crc32(body, len) != stored) throw CorruptError(where + " checksum mismatch");
  FramePacket p = parse_packet(body, len);
  pos_ += r.position();
  ++read_;
  return p;
}

ReadResult read_sequence(const std::vector<std::uint8_t>& bytes) {
  SequenceReader reader(bytes);
  ReadResult out{reader.header(), {}};
  while (auto p = reader.next()) out.packets.push_back(std::move(*p));
  return out;
}

double measure_bpp(std::size_t bytes, std::uint64_t frames, std::uint64_t height,
                   std::uint64_t width) {
  if (frames == 0 || height == 0 || width == 0) throw ParamError("empty video");
  return 8.0 * double(bytes) / double(frames * height * width);
}

}  // namespace inrvc
