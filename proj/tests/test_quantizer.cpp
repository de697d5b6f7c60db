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
#include "inrvc/quantizer.hpp"

using namespace inrvc;
using inrvc::testing::grad_check;

namespace {

TensorF latent(const std::vector<float>& v, Index c) {
  const Index plane = static_cast<Index>(v.size()) / c;
  ArrayX<float> a(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) a(i) = v[i];
  return TensorF({1, c, 1, plane}, a);
}

}  // namespace

TEST_CASE("quantize and dequantize") {
  CHECK(quantize(latent({0.0f}, 1), {3.7f}).data[0] == 0);
  CHECK(quantize(latent({1.26f}, 1), {2.0f}).data[0] == 3);
  CHECK(quantize(latent({2.5f, -2.5f}, 1), {1.0f}).data == std::vector<std::int32_t>{3, -3});
  CHECK_THROWS_AS(quantize(latent({1.0f}, 1), {0.0f}), ParamError);
  CHECK_THROWS_AS(quantize(latent({1.0f}, 1), {-1.0f}), ParamError);
  CHECK_THROWS_AS(quantize(latent({1.0f, 2.0f}, 2), {1.0f}), ShapeError);

  CHECK(dequantize(IntTensor{{1, 1, 1, 1}, {3}}, {0.5f}).at(0) == 1.5f);
  CHECK(dequantize(IntTensor{{1, 1, 1, 1}, {0}}, {0.5f}).at(0) == 0.0f);
}

TEST_CASE("round trip with reciprocal inverse scales is within half a step") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<float> val(-20.0f, 20.0f), scale(0.05f, 8.0f);
  for (int trial = 0; trial < 50; ++trial) {
    const Index C = 1 + trial % 6, H = 3, W = 5;
    std::vector<float> q(C), qt(C);
    for (Index c = 0; c < C; ++c) {
      q[c] = scale(rng);
      qt[c] = 1.0f / q[c];
    }
    ArrayX<float> v(C * H * W);
    for (Index i = 0; i < v.size(); ++i) v(i) = val(rng);
    const TensorF y({1, C, H, W}, v);
    const TensorF r = dequantize(quantize(y, q), qt);
    for (Index i = 0; i < v.size(); ++i) {
      const float bound = 0.5f / q[(i / (H * W)) % C];
      CHECK(std::abs(r.at(i) - y.at(i)) <= bound * (1.0f + 1e-5f) + 1e-6f);
    }
  }
}

TEST_CASE("ste_round forward is the hard round trip, backward passes through") {
  std::mt19937 rng(3);
  const TensorD y = inrvc::testing::uniform({1, 3, 4, 4}, rng, -5.0, 5.0);
  const TensorD q = TensorD::from({3}, {0.7, 2.0, 3.3}, true);
  const TensorD qt = TensorD::from({3}, {1.1, 0.5, 0.25}, true);
  const TensorD out = ste_round(y, q, qt);
  for (Index i = 0; i < y.numel(); ++i) {
    const Index c = (i / 16) % 3;
    CHECK(out.at(i) == qt.at(c) * std::round(q.at(c) * y.at(i)));
  }
  backward(sum(out));
  for (Index i = 0; i < y.numel(); ++i) {
    const Index c = (i / 16) % 3;
    CHECK(y.grad()(i) == doctest::Approx(qt.at(c) * q.at(c)));
  }
}

TEST_CASE("ste_round descent reduces distortion on a fixed target") {
  const TensorF target = latent({0.3f, -1.7f, 2.2f, 0.9f}, 1);
  TensorF y = latent({-2.0f, 1.0f, 0.0f, 3.0f}, 1).clone(true);
  const TensorF q = TensorF::from({1}, {4.0f});
  const TensorF qt = TensorF::from({1}, {0.25f});
  auto dist = [&] { return mean(square(ste_round(y, q, qt) - target)); };
  const float before = dist().item();
  for (int step = 0; step < 2000; ++step) {
    y.zero_grad();
    const TensorF d = dist();
    backward(d);
    y.mutable_value() -= 0.05f * y.grad();
  }
  const float after = dist().item();
  CHECK(after < before);
  // Reachable optimum: every target within half a quantisation step.
  CHECK(after <= 0.125f * 0.125f + 1e-6f);
}

TEST_CASE("soft_symbols limits and gradients") {
  Rng rng(5);
  const TensorD q = TensorD::from({1}, {1.0});
  // Low temperature, fractional part 0.2: hard rounding with or without noise.
  const TensorD y = TensorD::from({1, 1, 1, 4}, {0.2, 1.2, -2.8, 3.2});
  for (bool noise : {false, true}) {
    const TensorD s = soft_symbols(y, q, 1e-4, rng, noise);
    CHECK(s.at(0) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(s.at(1) == doctest::Approx(1.0));
    CHECK(s.at(2) == doctest::Approx(-3.0));
    CHECK(s.at(3) == doctest::Approx(3.0));
  }
  // High temperature: near-identity plus the noise sample.
  Rng a(9), b(9);
  const TensorD s = soft_symbols(y, q, 1e3, a, true);
  for (Index i = 0; i < 4; ++i) {
    const double u = b.uniform() - 0.5;
    CHECK(s.at(i) == doctest::Approx(y.at(i) + u).epsilon(1e-4));
  }

  // Finite differences lose meaning once the composite flattens (slopes of
  // 1e-9 at tau = 0.05), so the check runs at moderate temperatures.
  std::mt19937 mt(21);
  for (double tau : {1.0, 0.3}) {
    for (int trial = 0; trial < 10; ++trial) {
      const TensorD yy = inrvc::testing::uniform_away({1, 2, 3, 3}, mt, {-2.5, -1.5, -0.5, 0.5, 1.5, 2.5}, 0.05, -3, 3);
      const TensorD qq = TensorD::from({2}, {1.0, 1.0});
      const double err = grad_check({yy}, [&](const std::vector<TensorD>& l) {
        Rng fixed(trial);
        return soft_symbols(l[0], qq, tau, fixed, false);
      }, mt, 1e-5);
      CHECK(err < 1e-4);
      backward(sum(soft_symbols(yy, qq, tau, rng, false)));
      for (Index i = 0; i < yy.numel(); ++i) CHECK(yy.grad()(i) > 0.0);
      yy.zero_grad();
    }
  }
}

TEST_CASE("soft-round temperature schedule") {
  CHECK(soft_round_tau(0, 300) == doctest::Approx(0.3f));
  CHECK(soft_round_tau(299, 300) == doctest::Approx(1e-4f));
  for (Index s = 1; s < 300; ++s) CHECK(soft_round_tau(s, 300) < soft_round_tau(s - 1, 300));
  CHECK(soft_round_tau(150, 301) == doctest::Approx(std::sqrt(0.3f * 1e-4f)));
}

TEST_CASE("inverse scales in Q4.12") {
  CHECK(encode_scale(1.0f) == 4096);
  CHECK(decode_scale(4096) == 1.0f);
  CHECK(encode_scale(0.0f) == 1);
  CHECK(encode_scale(100.0f) == 65535);
  for (std::uint16_t c : {std::uint16_t{1}, std::uint16_t{777}, std::uint16_t{65535}}) {
    CHECK(encode_scale(decode_scale(c)) == c);
  }
  const TensorF qt = TensorF::from({3}, {0.3337f, 1.0f, 2.71828f}, true);
  const TensorF c = coded_scale(qt);
  for (Index i = 0; i < 3; ++i) CHECK(c.at(i) == decode_scale(encode_scale(qt.at(i))));
  backward(sum(c));
  CHECK(qt.grad()(0) == doctest::Approx(1.0f));
}

TEST_CASE("q_glob table") {
  const QGlobTable t;
  CHECK(t.weight(0) == doctest::Approx(1.4f));
  CHECK(t.weight(1) == doctest::Approx(1.2f));
  CHECK(t.weight(2) == doctest::Approx(1.02f));
  for (int l = 1; l < 6; ++l) CHECK(t.weight(l) <= t.weight(l - 1));
  CHECK_THROWS_AS(t.weight(-1), ParamError);
}
