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


#include "inrvc/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "inrvc/rng.hpp"

namespace inrvc {

namespace {

using Rgb = std::array<double, 3>;

// Band-limited texture: a few random plane waves per channel.
struct Texture {
  struct Wave {
    double fx, fy, phase, amp;
  };
  std::array<std::vector<Wave>, 3> waves;
  Rgb base;

  Texture(Rng& rng, int count, double max_freq) {
    for (auto& b : base) b = rng.uniform(0.25, 0.75);
    for (auto& ch : waves) {
      for (int i = 0; i < count; ++i) {
        const double f = max_freq * std::sqrt(rng.uniform(0.02, 1.0));
        const double a = rng.uniform(0.0, 2.0 * M_PI);
        ch.push_back({f * std::cos(a), f * std::sin(a), rng.uniform(0.0, 2.0 * M_PI),
                      rng.uniform(0.04, 0.16)});
      }
    }
  }

  double at(int c, double x, double y) const {
    double v = base[c];
    for (const auto& w : waves[c]) v += w.amp * std::sin(w.fx * x + w.fy * y + w.phase);
    return v;
  }
};

struct Shape2 {
  bool disc;
  double cx, cy, rx, ry, vx, vy;
  Rgb colour;

  // Anti-aliased coverage of the pixel centred at (x, y).
  double coverage(double x, double y, double t) const {
    const double px = x - (cx + vx * t), py = y - (cy + vy * t);
    double d;
    if (disc) {
      d = (std::sqrt(px * px / (rx * rx) + py * py / (ry * ry)) - 1.0) * std::min(rx, ry);
    } else {
      d = std::max(std::abs(px) - rx, std::abs(py) - ry);
    }
    return std::clamp(0.5 - d, 0.0, 1.0);
  }
};

}  // namespace

std::vector<TensorF> synthetic_clip(const SceneConfig& c) {
  Rng rng(c.seed);
  const Index H = c.height, W = c.width;
  const SceneKind kind = c.kind;
  const bool tex = kind != SceneKind::kShapes;
  const Texture background(rng, tex ? 6 : 2, tex ? 0.6 : 0.08);
  // Background motion: pans move everything, textures drift slowly.
  double bvx = 0, bvy = 0;
  if (kind == SceneKind::kPan || kind == SceneKind::kMixed) {
    const double a = rng.uniform(0.0, 2.0 * M_PI);
    bvx = c.speed * std::cos(a);
    bvy = c.speed * std::sin(a);
  } else if (kind == SceneKind::kTexture) {
    bvx = 0.3 * c.speed * rng.uniform(-1.0, 1.0);
    bvy = 0.3 * c.speed * rng.uniform(-1.0, 1.0);
  }
  std::vector<Shape2> shapes;
  const int count = kind == SceneKind::kShapes ? 5 : kind == SceneKind::kMixed ? 3 : 0;
  for (int i = 0; i < count; ++i) {
    Shape2 s;
    s.disc = rng.below(2) == 0;
    s.cx = rng.uniform(0.0, double(W));
    s.cy = rng.uniform(0.0, double(H));
    const double size = double(std::min(H, W));
    s.rx = rng.uniform(0.06, 0.2) * size;
    s.ry = rng.uniform(0.06, 0.2) * size;
    const double a = rng.uniform(0.0, 2.0 * M_PI), v = c.speed * rng.uniform(0.5, 1.5);
    s.vx = v * std::cos(a);
    s.vy = v * std::sin(a);
    for (auto& k : s.colour) k = rng.uniform(0.05, 0.95);
    shapes.push_back(s);
  }
  std::vector<TensorF> out;
  for (int t = 0; t < c.frames; ++t) {
    ArrayX<float> v(3 * H * W);
    for (Index y = 0; y < H; ++y)
      for (Index x = 0; x < W; ++x) {
        Rgb px;
        for (int ch = 0; ch < 3; ++ch) px[ch] = background.at(ch, x + bvx * t, y + bvy * t);
        for (const auto& s : shapes) {
          const double a = s.coverage(double(x), double(y), double(t));
          for (int ch = 0; ch < 3; ++ch) px[ch] = (1 - a) * px[ch] + a * s.colour[ch];
        }
        for (int ch = 0; ch < 3; ++ch) {
          v((ch * H + y) * W + x) = float(std::clamp(px[ch], 0.0, 1.0));
        }
      }
    out.emplace_back(Shape{1, 3, H, W}, std::move(v));
  }
  return out;
}

std::vector<std::vector<TensorF>> synthetic_corpus(int clips, Index height, Index width,
                                                   int frames, std::uint64_t seed) {
  static constexpr SceneKind kKinds[] = {SceneKind::kShapes, SceneKind::kTexture, SceneKind::kPan,
                                         SceneKind::kMixed};
  std::vector<std::vector<TensorF>> out;
  Rng rng(seed);
  for (int i = 0; i < clips; ++i) {
    SceneConfig c;
    c.kind = kKinds[i % 4];
    c.height = height;
    c.width = width;
    c.frames = frames;
    c.speed = rng.uniform(0.5, 3.0);
    c.seed = rng.next();
    out.push_back(synthetic_clip(c));
  }
  return out;
}

}  // namespace inrvc
