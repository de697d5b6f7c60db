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

#include <cmath>
#include <random>

#include "gradcheck.hpp"
#include "inrvc/decoder.hpp"
#include "inrvc/errors.hpp"

using namespace inrvc;
using inrvc::testing::grad_check;
using inrvc::testing::uniform;

namespace {

DecoderConfig small_config() {
  DecoderConfig c;
  c.channels = 4;
  c.levels = 3;
  c.patch = 16;
  c.pretrain_patch = 16;
  c.window = 2;
  return c;
}

std::vector<TensorD> random_latents(const DecoderConfig& c, Index H, Index W, std::mt19937& g,
                                    bool grad = false) {
  std::vector<TensorD> out;
  for (int l = 1; l <= c.levels; ++l) {
    out.push_back(uniform({1, 2 * c.channels, H >> l, W >> l}, g, -0.8, 0.8, grad));
  }
  return out;
}

void randomize(Decoder<double>& d, Rng& rng) {
  for (auto& p : d.params()) {
    auto& v = p.tensor.mutable_value();
    for (Index i = 0; i < v.size(); ++i) v(i) += 0.2 * rng.normal();
  }
}

using Plane = std::vector<std::vector<std::vector<double>>>;  // [c][y][x]

Plane zeros(Index C, Index p) {
  return Plane(C, std::vector<std::vector<double>>(p, std::vector<double>(p, 0.0)));
}

Plane linear(const Plane& h, const TensorD& w, const TensorD& b) {
  const Index O = w.dim(0), I = w.dim(1), p = h[0].size();
  Plane out = zeros(O, p);
  for (Index o = 0; o < O; ++o)
    for (Index y = 0; y < p; ++y)
      for (Index x = 0; x < p; ++x) {
        double s = b.at(o);
        for (Index i = 0; i < I; ++i) s += w.at(o * I + i) * h[i][y][x];
        out[o][y][x] = s;
      }
  return out;
}

double up_tap(const std::vector<double>& row, Index x) {
  const double src = (x + 0.5) / 2.0 - 0.5;
  const Index n = row.size();
  const double f = std::floor(src), t = src - f;
  const Index a = std::clamp<Index>(Index(f), 0, n - 1), b = std::clamp<Index>(Index(f) + 1, 0, n - 1);
  return (1 - t) * row[a] + t * row[b];
}

Plane upsample(const Plane& h) {
  const Index C = h.size(), p = h[0].size();
  Plane rows = zeros(C, 2 * p), out = zeros(C, 2 * p);
  for (Index c = 0; c < C; ++c) {
    for (Index y = 0; y < p; ++y) {
      rows[c][y].assign(2 * p, 0.0);
      for (Index x = 0; x < 2 * p; ++x) rows[c][y][x] = up_tap(h[c][y], x);
    }
    for (Index x = 0; x < 2 * p; ++x) {
      std::vector<double> col(p);
      for (Index y = 0; y < p; ++y) col[y] = rows[c][y][x];
      for (Index y = 0; y < 2 * p; ++y) out[c][y][x] = up_tap(col, y);
    }
  }
  return out;
}

// Loop-level decode of one frame at patch == pretraining patch, where every
// layer's grid coordinate is the integer u mod B_i.
TensorD oracle_decode(Decoder<double>& dec, const std::vector<TensorD>& lat, const TensorD& ref) {
  const auto& c = dec.config();
  const int L = c.levels;
  const Index C = c.channels, P = c.patch, H = lat[0].dim(2) * 2, W = lat[0].dim(3) * 2;
  const CompiledDecoder<double> comp = dec.compile(P);
  const BaseSchedule sched = decoder_schedule(c, P);
  TensorD out = TensorD::zeros({1, 3, H, W});
  auto& ov = out.mutable_value();
  for (Index ty = 0; ty < H / P; ++ty) {
    for (Index tx = 0; tx < W / P; ++tx) {
      Index p = P >> L;
      Plane h = zeros(C, p);
      const Index B0 = sched.bases[0];
      for (Index ch = 0; ch < C; ++ch)
        for (Index y = 0; y < p; ++y)
          for (Index x = 0; x < p; ++x) {
            if (ref.defined()) {
              const Index f = Index{1} << L;
              double s = comp.lift.bias.at(ch);
              for (Index k = 0; k < 3; ++k) {
                double m = 0;
                for (Index a = 0; a < f; ++a)
                  for (Index b = 0; b < f; ++b)
                    m += ref.at((k * H + (ty * P + y * f + a)) * W + tx * P + x * f + b) - 0.5;
                s += comp.lift.weight.at(ch * 3 + k) * m / double(f * f);
              }
              h[ch][y][x] = s;
            } else {
              h[ch][y][x] = dec.intra_grid().at((ch * B0 + y % B0) * B0 + x % B0);
            }
          }
      for (int i = 0; i < L; ++i) {
        const int l = L - i;
        const Index B = sched.bases[i], Hl = H >> l, Wl = W >> l;
        const TensorD& grid = dec.pe_grids()[i];
        Plane z = zeros(C, p);
        for (Index ch = 0; ch < C; ++ch) {
          double mean = 0, var = 0;
          for (auto& r : h[ch]) for (double v : r) mean += 2 * v;
          mean /= double(p * p);
          for (auto& r : h[ch]) for (double v : r) var += (2 * v - mean) * (2 * v - mean);
          var /= double(p * p);
          for (Index y = 0; y < p; ++y)
            for (Index x = 0; x < p; ++x) {
              const Index gy = ty * p + y, gx = tx * p + x;
              const double g = lat[l - 1].at((ch * Hl + gy) * Wl + gx) + 1.0 +
                               grid.at((ch * B + y % B) * B + x % B);
              const double be = lat[l - 1].at(((C + ch) * Hl + gy) * Wl + gx) +
                                grid.at(((C + ch) * B + y % B) * B + x % B);
              const double m = 2 * h[ch][y][x];
              z[ch][y][x] = g * (m - mean) / std::sqrt(var + 1e-5) + be + m;
            }
        }
        Plane a = linear(z, comp.layers[i].weight, comp.layers[i].bias);
        for (auto& pl : a) for (auto& r : pl) for (double& v : r) v = std::max(v, 0.0);
        h = upsample(a);
        p *= 2;
      }
      Plane a = linear(h, comp.head1.weight, comp.head1.bias);
      for (auto& pl : a) for (auto& r : pl) for (double& v : r) v = std::max(v, 0.0);
      const Plane rgb = linear(a, comp.head2.weight, comp.head2.bias);
      for (Index k = 0; k < 3; ++k)
        for (Index y = 0; y < P; ++y)
          for (Index x = 0; x < P; ++x) {
            ov((k * H + ty * P + y) * W + tx * P + x) = std::clamp(rgb[k][y][x] + 0.5, 0.0, 1.0);
          }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("patch tiling round trip") {
  std::mt19937 g(1);
  const TensorD x = uniform({1, 3, 8, 12}, g, -1, 1, false);
  const TensorD t = patchify(x, 4);
  CHECK(t.shape() == Shape{6, 3, 4, 4});
  // Tile (1, 2) channel 2 pixel (3, 1) is frame pixel (7, 9).
  CHECK(t.at(((5 * 3 + 2) * 4 + 3) * 4 + 1) == x.at((2 * 8 + 7) * 12 + 9));
  CHECK((unpatchify(t, 8, 12).value() == x.value()).all());
  CHECK_THROWS_AS(patchify(x, 5), ShapeError);
}

TEST_CASE("position coordinates") {
  auto c = small_config();
  // At the pretraining patch every digit is an integer position mod B_i.
  const BaseSchedule s = decoder_schedule(c, 16);
  for (int i = 0; i < c.levels; ++i) {
    const auto co = pe_coords(c, 16, i);
    const Index p = 16 >> (c.levels - i);
    REQUIRE(co.size() == std::size_t(p * p));
    for (Index u = 0; u < p; ++u) CHECK(co[u][1] == double(u % s.bases[i]));
  }
  // Larger patches: scaled digits stay inside the grid, tiled ones repeat.
  for (Index patch : {32, 64}) {
    for (int i = 0; i < c.levels; ++i) {
      for (const auto& q : pe_coords(c, patch, i)) {
        CHECK(q[0] >= 0.0);
        CHECK(q[0] < double(s.bases[i]));
      }
    }
    auto t = c;
    t.scaled_pe = false;
    for (int i = 0; i < c.levels; ++i) {
      const auto big = pe_coords(t, patch, i);
      const auto ref = pe_coords(t, 16, i);
      const Index p = patch >> (c.levels - i), q = 16 >> (c.levels - i);
      for (Index u = 0; u < p; ++u) CHECK(big[u][1] == ref[u % q][1]);
    }
  }
  CHECK_THROWS_AS(decoder_schedule(c, 12), ParamError);
  CHECK_THROWS_AS(decoder_schedule(c, 8), ParamError);
}

TEST_CASE("compiled decode matches a loop-level oracle") {
  std::mt19937 g(2);
  Rng rng(3);
  const auto c = small_config();
  Decoder<double> dec(c, rng);
  dec.set_mask(0.0);
  randomize(dec, rng);
  for (bool inter : {false, true}) {
    const auto lat = random_latents(c, 32, 48, g);
    const TensorD ref = inter ? uniform({1, 3, 32, 48}, g, 0, 1, false) : TensorD();
    const TensorD want = oracle_decode(dec, lat, ref);
    const TensorD got = decode_frame(dec.compile(16), lat, ref);
    REQUIRE(got.shape() == Shape{1, 3, 32, 48});
    CHECK((got.value() - want.value()).abs().maxCoeff() < 1e-10);
    // The training route is the same function once the mask is 0.
    const TensorD train = dec.forward(lat, ref, 16);
    CHECK((train.value() - want.value()).abs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("decoder contracts") {
  std::mt19937 g(4);
  Rng rng(5);
  auto c = small_config();
  Decoder<double> dec(c, rng);
  const auto lat = random_latents(c, 32, 32, g);
  // Mask still on: compiling is refused, training route runs.
  CHECK_THROWS_AS(dec.compile(16), StateError);
  const TensorD y = dec.forward(lat, TensorD(), 16);
  CHECK(y.shape() == Shape{1, 3, 32, 32});
  CHECK(y.value().minCoeff() >= 0.0);
  CHECK(y.value().maxCoeff() <= 1.0);
  dec.set_mask(0.0);
  for (Index patch : {16, 32}) {
    const TensorD a = decode_frame(dec.compile(patch), lat, TensorD());
    const TensorD b = dec.forward(lat, TensorD(), patch);
    CHECK((a.value() - b.value()).abs().maxCoeff() < 1e-12);
  }
  std::vector<TensorD> short_lat(lat.begin(), lat.begin() + 2);
  CHECK_THROWS_AS(decode_frame(dec.compile(16), short_lat, TensorD()), StateError);
  CHECK_THROWS_AS(decode_frame(dec.compile(32), random_latents(c, 48, 48, g), TensorD()),
                  ShapeError);
}

TEST_CASE("decoder layer gradients") {
  std::mt19937 g(6);
  Rng rng(7);
  int checked = 0;
  while (checked < 20) {
    const Index C = 2 + checked % 4, p = 2 + 2 * (checked % 3);
    ModMixerBlock<double> block(C, C, 1 + checked % 3, 2, rng);
    block.set_mask(0.5);
    const TensorD h = uniform({2, C, p, p}, g, -1, 1);
    const TensorD gamma = uniform({2, C, p, p}, g, 0.5, 1.5);
    const TensorD beta = uniform({2, C, p, p}, g, -0.5, 0.5);
    const auto lin = contract(block.linear());
    const TensorD pre = lin.forward(gamma * instance_norm(block.mixed(h)) + beta + block.mixed(h));
    if (pre.value().abs().minCoeff() < 0.05) continue;  // keep away from ReLU kinks
    std::vector<TensorD> leaves{h, gamma, beta};
    for (const auto& prm : block.params()) leaves.push_back(prm.tensor);
    auto f = [&](const std::vector<TensorD>& v) {
      return decoder_layer(block.linear().contract_graph(), block.mixed(v[0]), v[1], v[2]);
    };
    CHECK(grad_check(leaves, f, g, 1e-3) < 1e-3);
    ++checked;
  }
}

TEST_CASE("compiled decode is differentiable in the latents") {
  std::mt19937 g(8);
  Rng rng(9);
  auto c = small_config();
  c.channels = 2;
  Decoder<double> dec(c, rng);
  dec.set_mask(0.0);
  const auto comp = dec.compile(16);
  for (int trial = 0; trial < 3; ++trial) {
    auto lat = random_latents(c, 16, 16, g, true);
    auto f = [&](const std::vector<TensorD>& v) { return decode_frame(comp, v, TensorD()); };
    // Small steps: clamps and ReLUs are piecewise.
    CHECK(grad_check(lat, f, g, 1e-6) < 1e-4);
  }
}
