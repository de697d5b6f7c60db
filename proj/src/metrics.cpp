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


#include "inrvc/metrics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "inrvc/errors.hpp"
#include "inrvc/ops.hpp"

namespace inrvc {

double mse(const TensorF& a, const TensorF& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("metric operands " + to_string(a.shape()) + " and " + to_string(b.shape()));
  }
  const ArrayX<double> d = a.value().cast<double>() - b.value().cast<double>();
  return d.square().mean();
}

double psnr(const TensorF& a, const TensorF& b) {
  const double e = mse(a, b);
  if (e == 0.0) return 100.0;
  return std::min(100.0, -10.0 * std::log10(e));
}

int ms_ssim_scales(Index min_extent) {
  int s = 1;
  while (s < 5 && (min_extent >> s) >= 10) ++s;
  return s;
}

namespace {

constexpr double kMsWeights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

// Separable Gaussian window as a [1, 1, k, k] kernel.
template <typename S>
Tensor<S> window(Index k) {
  std::vector<double> g(k);
  double total = 0;
  for (Index i = 0; i < k; ++i) {
    const double d = double(i) - double(k - 1) / 2.0;
    g[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
    total += g[i];
  }
  ArrayX<S> v(k * k);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j) v(i * k + j) = S(g[i] * g[j] / (total * total));
  return Tensor<S>({1, 1, k, k}, std::move(v));
}

}  // namespace

template <typename S>
Tensor<S> ms_ssim_tensor(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.shape() != b.shape() || a.rank() != 4) {
    throw ShapeError("ms_ssim operands " + to_string(a.shape()) + " and " + to_string(b.shape()));
  }
  const Index N = a.dim(0) * a.dim(1), H = a.dim(2), W = a.dim(3);
  const int scales = ms_ssim_scales(std::min(H, W));
  const S c1 = S(0.01 * 0.01), c2 = S(0.03 * 0.03);
  double wsum = 0;
  for (int s = 0; s < scales; ++s) wsum += kMsWeights[s];
  // Channels become batch entries so one single-channel window covers all.
  Tensor<S> x = reshape(a, {N, 1, H, W}), y = reshape(b, {N, 1, H, W});
  Tensor<S> total;
  for (int s = 0; s < scales; ++s) {
    const Index k = std::min<Index>(11, std::min(x.dim(2), x.dim(3)));
    const Tensor<S> win = window<S>(k);
    auto blur = [&](const Tensor<S>& t) { return conv2d(t, win, 1, 0); };
    const Tensor<S> mx = blur(x), my = blur(y);
    const Tensor<S> sxx = blur(x * x) - mx * mx;
    const Tensor<S> syy = blur(y * y) - my * my;
    const Tensor<S> sxy = blur(x * y) - mx * my;
    const Tensor<S> cs = (sxy * S(2) + c2) / (sxx + syy + c2);
    Tensor<S> term;
    if (s + 1 == scales) {
      const Tensor<S> lum = (mx * my * S(2) + c1) / (mx * mx + my * my + c1);
      term = mean(lum * cs);
    } else {
      term = mean(cs);
    }
    // Negative means (anti-correlated content) are clipped before the power.
    const S w = S(kMsWeights[s] / wsum);
    const Tensor<S> powed = exp(log(clamp(term, S(1e-8), S(1e8))) * w);
    total = total.defined() ? total * powed : powed;
    if (s + 1 < scales) {
      x = avg_pool2(x);
      y = avg_pool2(y);
    }
  }
  return total;
}

double ms_ssim(const TensorF& a, const TensorF& b) {
  return ms_ssim_tensor<double>(TensorD(a.shape(), a.value().cast<double>()),
                                TensorD(b.shape(), b.value().cast<double>()))
      .item();
}

namespace {

// Least-squares polynomial of log(rate) in quality.
Eigen::VectorXd fit_log_rate(const std::vector<RdPoint>& pts) {
  const int deg = std::min<int>(3, static_cast<int>(pts.size()) - 1);
  Eigen::MatrixXd A(pts.size(), deg + 1);
  Eigen::VectorXd y(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!(pts[i].rate > 0.0)) throw ParamError("rates must be positive");
    for (int d = 0; d <= deg; ++d) A(i, d) = std::pow(pts[i].quality, d);
    y(i) = std::log(pts[i].rate);
  }
  return A.colPivHouseholderQr().solve(y);
}

double integral(const Eigen::VectorXd& c, double lo, double hi) {
  double s = 0;
  for (int d = 0; d < c.size(); ++d) {
    s += c(d) * (std::pow(hi, d + 1) - std::pow(lo, d + 1)) / double(d + 1);
  }
  return s;
}

}  // namespace

double bd_rate(std::vector<RdPoint> test, std::vector<RdPoint> anchor) {
  if (test.size() < 2 || anchor.size() < 2) throw ParamError("BD-rate needs two points per curve");
  auto range = [](const std::vector<RdPoint>& v) {
    auto [lo, hi] = std::minmax_element(v.begin(), v.end(), [](const RdPoint& a, const RdPoint& b) {
      return a.quality < b.quality;
    });
    return std::pair{lo->quality, hi->quality};
  };
  const auto [tl, th] = range(test);
  const auto [al, ah] = range(anchor);
  const double lo = std::max(tl, al), hi = std::min(th, ah);
  if (!(hi > lo)) throw RangeError("RD curves do not overlap in quality");
  const Eigen::VectorXd ct = fit_log_rate(test), ca = fit_log_rate(anchor);
  const double diff = (integral(ct, lo, hi) - integral(ca, lo, hi)) / (hi - lo);
  return (std::exp(diff) - 1.0) * 100.0;
}

template Tensor<float> ms_ssim_tensor(const Tensor<float>&, const Tensor<float>&);
template Tensor<double> ms_ssim_tensor(const Tensor<double>&, const Tensor<double>&);

}  // namespace inrvc
