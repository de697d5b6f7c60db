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
#include <vector>

#include "inrvc/errors.hpp"
#include "inrvc/metrics.hpp"
#include "inrvc/ops.hpp"
#include "inrvc/overfit.hpp"
#include "inrvc/rng.hpp"
#include "inrvc/synthetic.hpp"

using namespace inrvc;

namespace {

TensorF constant_image(Index H, Index W, float v) { return TensorF::constant({1, 3, H, W}, v); }

TensorF noise_image(Index H, Index W, std::uint64_t seed) {
  Rng rng(seed);
  ArrayX<float> v(3 * H * W);
  for (Index i = 0; i < v.size(); ++i) v(i) = float(rng.uniform());
  return TensorF({1, 3, H, W}, std::move(v));
}

// Independent oracle: normal equations solved by elimination, then
// composite Simpson integration of the fitted log-rate.
std::vector<double> cubic_fit(const std::vector<RdPoint>& pts) {
  double A[4][5] = {};
  for (const auto& p : pts) {
    double pw[7];
    pw[0] = 1;
    for (int k = 1; k < 7; ++k) pw[k] = pw[k - 1] * p.quality;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) A[i][j] += pw[i + j];
      A[i][4] += pw[i] * std::log(p.rate);
    }
  }
  for (int c = 0; c < 4; ++c)
    for (int r = c + 1; r < 4; ++r) {
      const double f = A[r][c] / A[c][c];
      for (int k = c; k < 5; ++k) A[r][k] -= f * A[c][k];
    }
  std::vector<double> x(4);
  for (int r = 3; r >= 0; --r) {
    double s = A[r][4];
    for (int k = r + 1; k < 4; ++k) s -= A[r][k] * x[k];
    x[r] = s / A[r][r];
  }
  return x;
}

double simpson(const std::vector<double>& c, double lo, double hi) {
  const int n = 20000;
  const double h = (hi - lo) / n;
  auto f = [&](double q) { return c[0] + q * (c[1] + q * (c[2] + q * c[3])); };
  double s = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * f(lo + i * h);
  return s * h / 3;
}

const std::vector<RdPoint> kAnchor = {{0.1, 30}, {0.2, 33}, {0.4, 36}, {0.8, 39}};
const std::vector<RdPoint> kTest = {{0.08, 30.5}, {0.17, 33.4}, {0.35, 36.2}, {0.7, 39.3}};

}  // namespace

TEST_CASE("psnr cases") {
  const TensorF a = noise_image(16, 16, 1);
  CHECK(psnr(a, a) == 100.0);
  ArrayX<float> shifted = a.value();
  for (Index i = 0; i < shifted.size(); ++i) shifted(i) += (i % 2 ? 1 : -1) / 255.0f;
  CHECK(psnr(a, TensorF(a.shape(), shifted)) == doctest::Approx(20 * std::log10(255.0)).epsilon(1e-5));
  CHECK(psnr(constant_image(4, 4, 0), constant_image(4, 4, 1)) == doctest::Approx(0.0));
  CHECK_THROWS_AS(psnr(a, noise_image(16, 8, 2)), ShapeError);
}

TEST_CASE("ms-ssim properties") {
  const auto clip = synthetic_clip(SceneConfig{SceneKind::kMixed, 160, 160, 2, 1.5, 3});
  CHECK(ms_ssim_scales(160) == 5);
  CHECK(ms_ssim_scales(128) == 4);
  CHECK(ms_ssim_scales(16) == 1);
  CHECK(ms_ssim(clip[0], clip[0]) == doctest::Approx(1.0).epsilon(1e-9));
  const TensorF noise = noise_image(160, 160, 4);
  CHECK(ms_ssim(clip[0], noise) < 0.9);
  CHECK(ms_ssim(clip[0], clip[1]) == doctest::Approx(ms_ssim(clip[1], clip[0])).epsilon(1e-12));
  const TensorF small = noise_image(24, 40, 5);
  CHECK(ms_ssim(small, small) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(ms_ssim(small, noise), ShapeError);
}

TEST_CASE("ms-ssim gradient is finite and points uphill") {
  const auto clip = synthetic_clip(SceneConfig{SceneKind::kTexture, 48, 48, 1, 1.0, 6});
  const TensorD x(clip[0].shape(), clip[0].value().cast<double>());
  ArrayX<double> noisy = x.value();
  Rng rng(7);
  for (Index i = 0; i < noisy.size(); ++i) noisy(i) += 0.05 * (rng.uniform() - 0.5);
  const TensorD y(x.shape(), noisy, true);
  const TensorD s = ms_ssim_tensor(x, y);
  backward(s);
  CHECK(y.grad().allFinite());
  const ArrayX<double> stepped = noisy + 1e-3 * y.grad() / y.grad().abs().maxCoeff();
  CHECK(ms_ssim_tensor(x, TensorD(x.shape(), stepped)).item() > s.item());
}

TEST_CASE("distortion kinds") {
  const TensorF a = noise_image(32, 32, 8);
  CHECK(distortion_value(a, a, DistortionKind::kMse) == 0.0);
  CHECK(distortion_value(a, a, DistortionKind::kMsSsim) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(distortion_value(constant_image(8, 8, 0), constant_image(8, 8, 1), DistortionKind::kMse) ==
        doctest::Approx(1.0));
  CHECK_THROWS_AS(distortion(a, noise_image(16, 32, 1), DistortionKind::kMse), ShapeError);
}

TEST_CASE("bd-rate") {
  CHECK(bd_rate(kAnchor, kAnchor) == doctest::Approx(0.0).epsilon(1e-9));
  std::vector<RdPoint> half = kAnchor;
  for (auto& p : half) p.rate *= 0.5;
  CHECK(bd_rate(half, kAnchor) == doctest::Approx(-50.0).epsilon(1e-9));
  // Fixture pair, value from an independent polynomial fit and quadrature.
  const double got = bd_rate(kTest, kAnchor);
  CHECK(std::abs(got - -20.58348108342283) < 0.01);
  const double lo = 30.5, hi = 39.0;
  const double oracle =
      (std::exp((simpson(cubic_fit(kTest), lo, hi) - simpson(cubic_fit(kAnchor), lo, hi)) /
                (hi - lo)) - 1) * 100;
  CHECK(std::abs(got - oracle) < 0.01);
  // Two points fall back to a line.
  CHECK(bd_rate({{0.05, 30}, {0.2, 36}}, {{0.1, 30}, {0.4, 36}}) == doctest::Approx(-50.0));
  CHECK_THROWS_AS(bd_rate({{0.1, 20}, {0.2, 25}}, kAnchor), RangeError);
  CHECK_THROWS_AS(bd_rate({{0.1, 30}}, kAnchor), ParamError);
}
