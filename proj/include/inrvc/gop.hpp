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


// Coding order and reference structure of a sequence.

#ifndef INRVC_GOP_HPP_
#define INRVC_GOP_HPP_

#include <vector>

#include "inrvc/quantizer.hpp"

namespace inrvc {

enum class GopMode { kLowDelay, kRandomAccess };
enum class FrameType { kIntra, kPredicted, kBidirectional };

struct FrameRecord {
  int display = 0;
  int decode = 0;  // position in decode order
  FrameType type = FrameType::kIntra;
  int ref1 = -1, ref2 = -1;  // display indices, -1 when absent
  int layer = 0;             // temporal layer, 0 for intra frames
};

struct GopStructure {
  GopMode mode = GopMode::kLowDelay;
  int gop_length = 1;
  int intra_period = 0;  // 0: only the first frame is intra
  std::vector<FrameRecord> frames;  // decode order

  int frame_count() const { return static_cast<int>(frames.size()); }
  const FrameRecord& by_display(int display) const;
};

// LD: gop_length must be 1; a chain where frame t references t - 1.
// RA: gop_length a power of two; each interval between anchors is bisected
// recursively and the midpoint references both ends. Anchors (multiples of
// the GOP length, and the last frame) are intra at multiples of intra_period
// (> 0), otherwise predicted from the previous anchor. Throws ParamError.
GopStructure build_gop(GopMode mode, int gop_length, int intra_period, int frame_count);

// Number of later frames (in display order) that must be captured before a
// frame can be coded, maximised over the sequence.
int measured_latency(const GopStructure& gop);

// Throws StateError if a reference is missing or not decoded earlier.
void check_references(const GopStructure& gop);

// Display indices decoded at or before decode_pos that a later frame still
// references (what the frame buffer must hold).
std::vector<int> live_references(const GopStructure& gop, int decode_pos);

float schedule_q_glob(int display, const GopStructure& gop, const QGlobTable& table = {});

}  // namespace inrvc

#endif  // INRVC_GOP_HPP_
