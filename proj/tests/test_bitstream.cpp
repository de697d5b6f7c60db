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


#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "inrvc/bitstream.hpp"
#include "inrvc/errors.hpp"
#include "inrvc/rng.hpp"

using namespace inrvc;

namespace {

SequenceHeader sample_header(Rng& rng) {
  SequenceHeader h;
  h.width = std::uint16_t(1 + rng.below(4000));
  h.height = std::uint16_t(1 + rng.below(4000));
  h.frame_count = std::uint32_t(1 + rng.below(300));
  h.mode = rng.below(2) ? GopMode::kRandomAccess : GopMode::kLowDelay;
  h.gop_length = h.mode == GopMode::kLowDelay ? 1 : std::uint16_t(1u << (1 + rng.below(5)));
  h.intra_period = std::uint16_t(rng.below(64));
  h.levels = std::uint8_t(1 + rng.below(4));
  h.latent_channels = 8;
  for (int l = 0; l < h.levels; ++l) h.pe_bases.push_back(std::uint16_t(1 + rng.below(8)));
  h.group_sizes = {1, 1, 2, 4};
  h.scaled_pe = rng.below(2);
  h.concat_fusion = rng.below(2);
  h.checkpoint_hash = rng.next();
  return h;
}

FramePacket sample_packet(Rng& rng, int levels, Index channels) {
  FramePacket p;
  p.display = std::uint16_t(rng.below(1000));
  p.type = FrameType(rng.below(3));
  if (p.type != FrameType::kIntra) p.ref1 = int(rng.below(1000));
  if (p.type == FrameType::kBidirectional) p.ref2 = int(rng.below(1000));
  p.layer = p.type == FrameType::kIntra ? 0 : std::uint8_t(1 + rng.below(6));
  p.qt_codes.resize(levels);
  for (auto& c : p.qt_codes)
    for (Index i = 0; i < 2 * channels; ++i) c.push_back(std::uint16_t(1 + rng.below(65535)));
  for (int l = 0; l < levels; ++l) p.qt_psi.push_back(float(rng.uniform(1e-4, 1.0)));
  p.payload.resize(rng.below(300));
  for (auto& b : p.payload) b = std::uint8_t(rng.below(256));
  return p;
}

}  // namespace

TEST_CASE("empty sequence stays parseable") {
  Rng rng(1);
  const auto h = sample_header(rng);
  const auto bytes = write_sequence(h, {});
  const auto r = read_sequence(bytes);
  CHECK(r.packets.empty());
  auto want = h;
  want.packet_count = 0;
  CHECK(r.header == want);
}

TEST_CASE("write then read is the identity") {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    auto h = sample_header(rng);
    std::vector<FramePacket> packets;
    const int n = int(rng.below(6));
    for (int i = 0; i < n; ++i) packets.push_back(sample_packet(rng, h.levels, h.latent_channels));
    const auto bytes = write_sequence(h, packets);
    const auto r = read_sequence(bytes);
    h.packet_count = std::uint32_t(n);
    CHECK(r.header == h);
    REQUIRE(r.packets.size() == packets.size());
    for (int i = 0; i < n; ++i) CHECK(r.packets[i] == packets[i]);
    // Length bookkeeping agrees with what was written.
    std::size_t total = serialize_header(h).size();
    for (const auto& p : packets) total += framed_size(p);
    CHECK(total == bytes.size());
  }
}

TEST_CASE("every flipped byte is detected") {
  Rng rng(3);
  const auto h = sample_header(rng);
  std::vector<FramePacket> packets;
  for (int i = 0; i < 3; ++i) packets.push_back(sample_packet(rng, h.levels, h.latent_channels));
  const auto bytes = write_sequence(h, packets);
  for (std::size_t pos = 0; pos < bytes.size(); ++pos) {
    auto bad = bytes;
    bad[pos] ^= std::uint8_t(1 + rng.below(255));
    bool detected = false;
    try {
      read_sequence(bad);
    } catch (const CorruptError&) {
      detected = true;
    } catch (const FormatError&) {
      detected = true;
    } catch (const VersionError&) {
      detected = true;
    }
    CHECK_MESSAGE(detected, "byte " << pos);
  }
}

TEST_CASE("truncation fails at the cut packet") {
  Rng rng(4);
  const auto h = sample_header(rng);
  std::vector<FramePacket> packets;
  for (int i = 0; i < 4; ++i) packets.push_back(sample_packet(rng, h.levels, h.latent_channels));
  const auto bytes = write_sequence(h, packets);
  std::size_t cut = serialize_header(h).size() + framed_size(packets[0]) + framed_size(packets[1]) + 5;
  std::vector<std::uint8_t> head(bytes.begin(), bytes.begin() + long(cut));
  SequenceReader reader(head);
  CHECK(reader.next() == packets[0]);
  CHECK(reader.next() == packets[1]);
  CHECK_THROWS_AS(reader.next(), CorruptError);
  // A stream cut at a packet boundary is short of the declared count.
  cut -= 5;
  SequenceReader exact(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + long(cut)));
  exact.next();
  exact.next();
  CHECK_THROWS_AS(exact.next(), CorruptError);
}

TEST_CASE("version and magic gates") {
  Rng rng(5);
  auto bytes = write_sequence(sample_header(rng), {});
  auto v = bytes;
  v[5] = std::uint8_t(v[5] + 1);  // low byte of the version after "INRV"
  CHECK_THROWS_AS(read_sequence(v), VersionError);
  auto m = bytes;
  m[0] = 'X';
  CHECK_THROWS_AS(read_sequence(m), FormatError);
}

TEST_CASE("non-canonical packet fields are rejected") {
  Rng rng(6);
  FramePacket p = sample_packet(rng, 2, 8);
  p.type = FrameType::kIntra;
  p.ref1 = p.ref2 = -1;
  p.layer = 0;
  auto body = serialize_packet(p);
  CHECK(parse_packet(body.data(), body.size()) == p);
  FramePacket q = p;
  q.ref1 = 3;  // intra frames carry no references
  body = serialize_packet(q);
  CHECK_THROWS_AS(parse_packet(body.data(), body.size()), FormatError);
  body = serialize_packet(p);
  body.push_back(0);
  CHECK_THROWS_AS(parse_packet(body.data(), body.size()), FormatError);
}

TEST_CASE("bits per pixel") {
  CHECK(measure_bpp(1, 1, 2, 4) == doctest::Approx(1.0));
  CHECK(measure_bpp(200, 3, 16, 16) == doctest::Approx(2.0 * measure_bpp(100, 3, 16, 16)));
  CHECK_THROWS_AS(measure_bpp(1, 0, 2, 4), ParamError);
}
