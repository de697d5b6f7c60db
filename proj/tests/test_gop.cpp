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

#include <algorithm>
#include <vector>

#include "inrvc/errors.hpp"
#include "inrvc/gop.hpp"

using namespace inrvc;

namespace {

std::vector<int> display_order_of(const GopStructure& g) {
  std::vector<int> out;
  for (const auto& f : g.frames) out.push_back(f.display);
  return out;
}

// Dyadic decode order of (a, b]: b first, then recursive midpoints.
void dyadic(int a, int b, std::vector<int>& out) {
  if (b - a < 2) return;
  const int m = (a + b) / 2;
  out.push_back(m);
  dyadic(a, m, out);
  dyadic(m, b, out);
}

}  // namespace

TEST_CASE("low delay chain") {
  const auto g = build_gop(GopMode::kLowDelay, 1, 0, 4);
  CHECK(display_order_of(g) == std::vector<int>{0, 1, 2, 3});
  CHECK(g.frames[0].type == FrameType::kIntra);
  for (int t = 1; t < 4; ++t) {
    CHECK(g.frames[t].ref1 == t - 1);
    CHECK(g.frames[t].ref2 == -1);
    CHECK(g.frames[t].type == FrameType::kPredicted);
  }
  CHECK(measured_latency(g) == 0);
  CHECK(measured_latency(build_gop(GopMode::kLowDelay, 1, 0, 97)) == 0);
  CHECK_THROWS_AS(build_gop(GopMode::kLowDelay, 2, 0, 4), ParamError);
}

TEST_CASE("random access hierarchy") {
  const auto g = build_gop(GopMode::kRandomAccess, 8, 8, 9);
  CHECK(display_order_of(g) == std::vector<int>{0, 8, 4, 2, 1, 3, 6, 5, 7});
  CHECK(g.by_display(4).ref1 == 0);
  CHECK(g.by_display(4).ref2 == 8);
  CHECK(g.by_display(8).type == FrameType::kIntra);
  CHECK_THROWS_AS(build_gop(GopMode::kRandomAccess, 6, 6, 9), ParamError);

  const auto g32 = build_gop(GopMode::kRandomAccess, 32, 32, 33);
  CHECK(measured_latency(g32) == 31);
  CHECK(g32.by_display(16).ref1 == 0);
  CHECK(g32.by_display(16).ref2 == 32);
  for (int len : {2, 4, 8, 16, 32}) {
    for (int frames : {1, 2, len, len + 1, 2 * len + 1, 3 * len - 2, 70}) {
      for (int ip : {0, len}) {
        const auto r = build_gop(GopMode::kRandomAccess, len, ip, frames);
        CHECK(r.frame_count() == frames);
        CHECK_NOTHROW(check_references(r));
        // Decode-order oracle, GOP by GOP.
        std::vector<int> want{0};
        for (int s = 0; s < frames - 1; s += len) {
          const int b = std::min(s + len, frames - 1);
          want.push_back(b);
          dyadic(s, b, want);
        }
        CHECK(display_order_of(r) == want);
        if (frames == len + 1) CHECK(measured_latency(r) == len - 1);
        // B-frames sit strictly deeper than their references; anchors chain.
        for (const auto& f : r.frames) {
          for (int ref : {f.ref1, f.ref2}) {
            if (ref < 0) continue;
            if (f.type == FrameType::kBidirectional) {
              CHECK(r.by_display(ref).layer < f.layer);
            } else {
              CHECK(r.by_display(ref).layer <= f.layer);
            }
          }
        }
      }
    }
  }
}

TEST_CASE("reference checks catch broken structures") {
  auto g = build_gop(GopMode::kRandomAccess, 4, 4, 5);
  CHECK_NOTHROW(check_references(g));
  std::swap(g.frames[1].display, g.frames[2].display);
  CHECK_THROWS_AS(check_references(g), StateError);
  auto l = build_gop(GopMode::kLowDelay, 1, 0, 3);
  l.frames[1].ref1 = 2;
  CHECK_THROWS_AS(check_references(l), StateError);
}

TEST_CASE("frame buffer contents") {
  const auto g = build_gop(GopMode::kRandomAccess, 8, 8, 9);
  // After decoding 0 and 8, both are still needed; after the last frame none.
  CHECK(live_references(g, 1) == std::vector<int>{0, 8});
  CHECK(live_references(g, 8).empty());
  const auto l = build_gop(GopMode::kLowDelay, 1, 0, 5);
  for (int p = 0; p < 4; ++p) CHECK(live_references(l, p) == std::vector<int>{p});
}

TEST_CASE("q_glob schedule") {
  const auto ld = build_gop(GopMode::kLowDelay, 1, 0, 6);
  CHECK(schedule_q_glob(0, ld) == doctest::Approx(1.4f));
  for (int t = 1; t < 6; ++t) CHECK(schedule_q_glob(t, ld) == schedule_q_glob(1, ld));
  const auto ra = build_gop(GopMode::kRandomAccess, 8, 8, 9);
  float top = 0.0f;
  for (int t = 0; t < 9; ++t) top = std::max(top, schedule_q_glob(t, ra));
  CHECK(top == schedule_q_glob(0, ra));
  for (const auto& a : ra.frames) {
    for (const auto& b : ra.frames) {
      if (a.layer < b.layer) CHECK(schedule_q_glob(a.display, ra) >= schedule_q_glob(b.display, ra));
    }
  }
}
