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


// Container format: a sequence header followed by length-prefixed,
// checksummed frame packets. All integers are big-endian and fixed width;
// FORMAT.md gives the byte layout.

#ifndef INRVC_BITSTREAM_HPP_
#define INRVC_BITSTREAM_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "inrvc/gop.hpp"

namespace inrvc {

constexpr std::uint16_t kFormatVersion = 1;

struct SequenceHeader {
  std::uint16_t width = 0, height = 0;  // before padding
  std::uint32_t frame_count = 0;
  GopMode mode = GopMode::kLowDelay;
  std::uint16_t gop_length = 1, intra_period = 0;
  std::uint8_t levels = 3;
  std::uint16_t latent_channels = 8;
  std::vector<std::uint16_t> pe_bases;      // coarse to fine
  std::vector<std::uint16_t> group_sizes;   // entropy-model channel groups
  std::uint16_t patch = 32, pretrain_patch = 16;
  bool scaled_pe = true;
  bool concat_fusion = false;
  std::uint64_t checkpoint_hash = 0;
  std::uint32_t packet_count = 0;

  bool operator==(const SequenceHeader&) const = default;
};

struct FramePacket {
  std::uint16_t display = 0;
  FrameType type = FrameType::kIntra;
  int ref1 = -1, ref2 = -1;
  std::uint8_t layer = 0;
  std::vector<std::vector<std::uint16_t>> qt_codes;  // per level, 2C Q4.12 codes
  std::vector<float> qt_psi;                         // per level weight-update step
  std::vector<std::uint8_t> payload;                 // one range-coded stream

  bool operator==(const FramePacket&) const = default;
};

std::vector<std::uint8_t> serialize_header(const SequenceHeader& h);
std::vector<std::uint8_t> serialize_packet(const FramePacket& p);
// Bytes a packet occupies in a sequence, framing included.
std::size_t framed_size(const FramePacket& p);

// Throws FormatError on non-canonical or inconsistent fields.
FramePacket parse_packet(const std::uint8_t* data, std::size_t size);

std::vector<std::uint8_t> write_sequence(SequenceHeader header,
                                         const std::vector<FramePacket>& packets);

// Streaming reader. Throws FormatError (bad magic or fields), VersionError,
// CorruptError (checksum or truncation) at the failing unit; packets returned
// before it stay valid.
class SequenceReader {
 public:
  SequenceReader(const std::uint8_t* data, std::size_t size);
  explicit SequenceReader(const std::vector<std::uint8_t>& bytes)
      : SequenceReader(bytes.data(), bytes.size()) {}

  const SequenceHeader& header() const { return header_; }
  std::optional<FramePacket> next();

 private:
  const std::uint8_t* data_;
  std::size_t size_, pos_ = 0;
  std::uint32_t read_ = 0;
  SequenceHeader header_;
};

struct ReadResult {
  SequenceHeader header;
  std::vector<FramePacket> packets;
};
ReadResult read_sequence(const std::vector<std::uint8_t>& bytes);

double measure_bpp(std::size_t bytes, std::uint64_t frames, std::uint64_t height,
                   std::uint64_t width);

std::uint32_t crc32(const std::uint8_t* data, std::size_t size);
std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t size);

// Big-endian helpers shared with the checkpoint format.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f32(float v);
  void f64(double v);
  void bytes(const std::uint8_t* p, std::size_t n);
  void str(const std::string& s);
  std::vector<std::uint8_t>& data() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

// Throws `E` with a message when reading past the end.
class ByteReader {
 public:
  ByteReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}
  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  float f32();
  double f64();
  const std::uint8_t* take(std::size_t n);
  std::string str();
  std::size_t remaining() const { return size_ - pos_; }
  std::size_t position() const { return pos_; }

 private:
  const std::uint8_t* data_;
  std::size_t size_, pos_ = 0;
};

}  // namespace inrvc

#endif  // INRVC_BITSTREAM_HPP_
