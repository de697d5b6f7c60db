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


// Quality metrics in RGB space and Bjontegaard rate differences.

#ifndef INRVC_METRICS_HPP_
#define INRVC_METRICS_HPP_

#include <vector>

#include "inrvc/tensor.hpp"

namespace inrvc {

// Images are [1, 3, H, W] (or any equal shapes for mse/psnr) in [0, 1].
// Throw ShapeError on mismatched shapes.
double mse(const TensorF& a, const TensorF& b);
// 10 log10(1 / MSE), 100 dB when the images are identical.
double psnr(const TensorF& a, const TensorF& b);

// Scales used for a given smaller image extent: the coarsest scale keeps at
// least 10 px, up to 5 scales (160 px and above). Windows are 11 taps, shrunk
// to the plane where it is smaller.
int ms_ssim_scales(Index min_extent);

// Differentiable multi-scale SSIM with the usual window (11 taps, sigma 1.5),
// constants (0.01, 0.03) and exponents, renormalised over the used scales.
template <typename S>
Tensor<S> ms_ssim_tensor(const Tensor<S>& a, const Tensor<S>& b);
double ms_ssim(const TensorF& a, const TensorF& b);

struct RdPoint {
  double rate;     // bpp
  double quality;  // dB or any monotone quality score
};

// Average rate difference (percent) of `test` against `anchor` at equal
// quality: log-rate is fitted as a polynomial (cubic, lower with fewer
// points) of quality per curve and integrated over the overlapping quality
// range. Throws ParamError with fewer than 2 points per curve and
// RangeError when the quality ranges do not overlap.
double bd_rate(std::vector<RdPoint> test, std::vector<RdPoint> anchor);

}  // namespace inrvc

#endif  // INRVC_METRICS_HPP_
