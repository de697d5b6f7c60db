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
#include "inrvc/errors.hpp"
#include "inrvc/networks.hpp"
#include "inrvc/optim.hpp"

using namespace inrvc;
using inrvc::testing::grad_check;
using inrvc::testing::uniform;

namespace {

// Smooth random texture: a few random sinusoids per channel, in [0, 1].
TensorF texture(Index H, Index W, Rng& rng) {
  ArrayX<float> v(3 * H * W);
  for (Index c = 0; c < 3; ++c) {
    double fy[4], fx[4], ph[4];
    for (int k = 0; k < 4; ++k) {
      fy[k] = rng.uniform(-0.5, 0.5);
      fx[k] = rng.uniform(-0.5, 0.5);
      ph[k] = rng.uniform(0, 2 * M_PI);
    }
    for (Index y = 0; y < H; ++y)
      for (Index x = 0; x < W; ++x) {
        double s = 0;
        for (int k = 0; k < 4; ++k) s += std::sin(fy[k] * y + fx[k] * x + ph[k]);
        v((c * H + y) * W + x) = float(0.5 + 0.12 * s);
      }
  }
  return TensorF({1, 3, H, W}, v);
}

TensorF crop(const TensorF& t, Index y0, Index x0, Index h, Index w) {
  return slice(slice(t, 2, y0, y0 + h), 3, x0, x0 + w).detach();
}

}  // namespace

TEST_CASE("encoder shape contract") {
  Rng rng(1);
  ImageEncoder<float> enc(EncoderConfig{}, rng);
  const auto y = enc.forward(TensorF::constant({1, 3, 64, 64}, 0.3f));
  REQUIRE(y.size() == 3);
  CHECK(y[0].shape() == Shape{1, 16, 32, 32});
  CHECK(y[1].shape() == Shape{1, 16, 16, 16});
  CHECK(y[2].shape() == Shape{1, 16, 8, 8});
  CHECK_THROWS_AS(enc.forward(TensorF::zeros({1, 3, 60, 64})), ShapeError);
  for (auto& h : enc.heads()) {
    h.weight.mutable_value().setZero();
  }
  for (const auto& t : enc.forward(TensorF::zeros({1, 3, 64, 64}))) {
    CHECK(t.value().abs().maxCoeff() == 0.0f);
  }
}

TEST_CASE("encoder gradients") {
  std::mt19937 g(2);
  Rng rng(3);
  EncoderConfig c;
  c.width = 3;
  c.latent_channels = 2;
  c.levels = 2;
  ImageEncoder<double> enc(c, rng);
  const TensorD x = uniform({1, 3, 8, 8}, g, 0, 1, false);
  std::vector<TensorD> motion{uniform({1, 2 * kMotionFeatures, 4, 4}, g, -1, 1, false),
                              uniform({1, 2 * kMotionFeatures, 2, 2}, g, -1, 1, false)};
  std::vector<TensorD> leaves;
  for (const auto& p : enc.params()) leaves.push_back(p.tensor);
  auto f = [&](const std::vector<TensorD>&) {
    const auto y = enc.forward(x, motion);
    return concat<double>({reshape(y[0], {y[0].numel()}), reshape(y[1], {y[1].numel()})},
                          0);
  };
  // ReLU kinks: small steps.
  CHECK(grad_check(leaves, f, g, 1e-6) < 1e-4);
}

TEST_CASE("motion pyramid contracts") {
  Rng rng(4);
  MotionEstimator<float> m(MotionConfig{}, rng);
  const TensorF a = texture(32, 32, rng);
  const auto p = m.forward(a, a);
  REQUIRE(p.flow.size() == 3);
  for (int j = 0; j < 3; ++j) {
    CHECK(p.flow[j].shape() == Shape{1, 2, 32 >> j, 32 >> j});
    CHECK(p.features[j].shape() == Shape{1, kMotionFeatures, 32 >> j, 32 >> j});
    CHECK(p.flow[j].value().isFinite().all());
    CHECK(p.features[j].value().isFinite().all());
  }
  const auto cond = ImageEncoder<float>::conditioning(p, nullptr, 3);
  CHECK(cond[2].shape() == Shape{1, 2 * kMotionFeatures, 4, 4});
  CHECK_THROWS_AS(m.forward(a, texture(32, 16, rng)), ShapeError);
  CHECK_THROWS_AS(m.forward(texture(30, 30, rng), texture(30, 30, rng)), ShapeError);
}

TEST_CASE("trained flow pyramid recovers a global shift") {
  Rng rng(5);
  MotionEstimator<float> m(MotionConfig{}, rng);
  Adam<float> opt;
  opt.add(m.params(), 3e-3);
  const Index S = 32, pad = 4;
  auto sample = [&](int dy, int dx, Rng& r) {
    const TensorF t = texture(S + 2 * pad, S + 2 * pad, r);
    // x(p) = ref(p + d): backward warping by d reproduces x.
    return std::pair{crop(t, pad + dy, pad + dx, S, S), crop(t, pad, pad, S, S)};
  };
  for (int step = 0; step < 2500; ++step) {
    const int dy = int(rng.below(5)) - 2, dx = int(rng.below(5)) - 2;
    const auto [x, ref] = sample(dy, dx, rng);
    const auto p = m.forward(x, ref);
    const TensorF err = warp_bilinear(ref, p.flow[0]) - x;
    backward(mean(square(slice(slice(err, 2, 4, S - 4), 3, 4, S - 4))));
    opt.step(cosine_lr(step, 2500) * 0.9 + 0.1);
  }
  Rng test_rng(99);
  double mean_dx = 0, mean_dy = 0;
  for (int k = 0; k < 4; ++k) {
    const auto [x, ref] = sample(0, 1, test_rng);
    const TensorF f = m.forward(x, ref).flow[0];
    const TensorF inner = slice(slice(f, 2, 4, S - 4), 3, 4, S - 4);
    mean_dx += slice(inner, 1, 0, 1).value().mean() / 4;
    mean_dy += slice(inner, 1, 1, 2).value().mean() / 4;
  }
  MESSAGE("recovered flow dx=" << mean_dx << " dy=" << mean_dy);
  CHECK(std::abs(mean_dx - 1.0) <= 0.5);
  CHECK(std::abs(mean_dy) <= 0.5);
}
