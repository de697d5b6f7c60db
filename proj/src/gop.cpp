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


#include "inrvc/gop.hpp"

#include <algorithm>
#include <functional>
#include <string>

#include "inrvc/errors.hpp"

namespace inrvc {

const FrameRecord& GopStructure::by_display(int display) const {
  for (const auto& f : frames) {
    if (f.display == display) return f;
  }
  throw StateError("frame " + std::to_string(display) + " is not in the GOP");
}

GopStructure build_gop(GopMode mode, int gop_length, int intra_period, int frame_count) {
  if (frame_count < 1) throw ParamError("empty sequence");
  if (intra_period < 0) throw ParamError("negative intra period");
  GopStructure g;
  g.mode = mode;
  g.gop_length = gop_length;
  g.intra_period = intra_period;
  auto intra_at = [&](int t) { return t == 0 || (intra_period > 0 && t % intra_period == 0); };

  if (mode == GopMode::kLowDelay) {
    if (gop_length != 1) throw ParamError("low-delay coding uses a GOP length of 1");
    for (int t = 0; t < frame_count; ++t) {
      FrameRecord r{t, t, FrameType::kIntra, -1, -1, 0};
      if (!intra_at(t)) {
        r.type = FrameType::kPredicted;
        r.ref1 = t - 1;
        r.layer = 1;
      }
      g.frames.push_back(r);
    }
    return g;
  }

  if (gop_length < 2 || (gop_length & (gop_length - 1)) != 0) {
    throw ParamError("random-access GOP length must be a power of two >= 2");
  }
  g.frames.push_back({0, 0, FrameType::kIntra, -1, -1, 0});
  std::function<void(int, int, int)> bisect = [&](int a, int b, int layer) {
    if (b - a < 2) return;
    const int m = (a + b) / 2;
    g.frames.push_back({m, 0, FrameType::kBidirectional, a, b, layer});
    bisect(a, m, layer + 1);
    bisect(m, b, layer + 1);
  };
  for (int start = 0; start < frame_count - 1; start += gop_length) {
    const int anchor = std::min(start + gop_length, frame_count - 1);
    if (intra_at(anchor)) {
      g.frames.push_back({anchor, 0, FrameType::kIntra, -1, -1, 0});
    } else {
      g.frames.push_back({anchor, 0, FrameType::kPredicted, start, -1, 1});
    }
    bisect(start, anchor, 2);
  }
  for (int i = 0; i < g.frame_count(); ++i) g.frames[i].decode = i;
  return g;
}

int measured_latency(const GopStructure& gop) {
  int latency = 0, seen = -1;
  for (const auto& f : gop.frames) {
    seen = std::max(seen, f.display);
    latency = std::max(latency, seen - f.display);
  }
  return latency;
}

void check_references(const GopStructure& gop) {
  std::vector<int> pos(gop.frame_count(), -1);
  for (const auto& f : gop.frames) {
    if (f.display < 0 || f.display >= gop.frame_count() || pos[f.display] != -1) {
      throw StateError("display indices are not a permutation");
    }
    pos[f.display] = f.decode;
  }
  for (const auto& f : gop.frames) {
    const bool needs1 = f.type != FrameType::kIntra, needs2 = f.type == FrameType::kBidirectional;
    if (needs1 != (f.ref1 >= 0) || needs2 != (f.ref2 >= 0)) {
      throw StateError("frame " + std::to_string(f.display) + " has the wrong reference count");
    }
    for (int r : {f.ref1, f.ref2}) {
      if (r < 0) continue;
      if (r >= gop.frame_count() || pos[r] >= f.decode) {
        throw StateError("frame " + std::to_string(f.display) + " references frame " +
                         std::to_string(r) + " before it is decoded");
      }
    }
  }
}

std::vector<int> live_references(const GopStructure& gop, int decode_pos) {
  std::vector<int> live;
  for (int i = decode_pos + 1; i < gop.frame_count(); ++i) {
    for (int r : {gop.frames[i].ref1, gop.frames[i].ref2}) {
      if (r >= 0 && gop.by_display(r).decode <= decode_pos &&
          std::find(live.begin(), live.end(), r) == live.end()) {
        live.push_back(r);
      }
    }
  }
  std::sort(live.begin(), live.end());
  return live;
}

float schedule_q_glob(int display, const GopStructure& gop, const QGlobTable& table) {
  return table.weight(gop.by_display(display).layer);
}

}  // namespace inrvc
