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


// Analysis networks: a strided conv image encoder producing one gamma || beta
// latent plane per level, and a coarse-to-fine flow pyramid whose features
// modulate the encoder stages of predicted frames.

#ifndef INRVC_NETWORKS_HPP_
#define INRVC_NETWORKS_HPP_

#include <vector>

#include "inrvc/layers.hpp"

namespace inrvc {

struct EncoderConfig {
  Index width = 32;
  Index latent_channels = 8;  // C per stream; each level has 2C channels
  int levels = 3;
  double head_gain = 0.5;
};

struct MotionConfig {
  Index width = 16;
  int levels = 3;
};

// Motion features per frame: flow (2) and the warped reference (3).
constexpr Index kMotionFeatures = 5;

template <typename S>
struct MotionPyramid {
  // Entry j is at resolution H / 2^j, finest first. Flow is in pixels of its
  // own level (channel 0 = dx, 1 = dy).
  std::vector<Tensor<S>> flow;
  std::vector<Tensor<S>> features;
};

template <typename S>
class MotionEstimator {
 public:
  MotionEstimator() = default;
  MotionEstimator(const MotionConfig& config, Rng& rng);

  // Throws ShapeError unless x and ref match and divide by 2^(levels-1).
  MotionPyramid<S> forward(const Tensor<S>& x, const Tensor<S>& ref) const;
  ParamList<S> params() const;

 private:
  MotionConfig config_;
  std::vector<std::vector<Conv2d<S>>> refiners_;  // per level, five layers
};

template <typename S>
class ImageEncoder {
 public:
  ImageEncoder() = default;
  ImageEncoder(const EncoderConfig& config, Rng& rng);

  const EncoderConfig& config() const { return config_; }

  // x is [1, 3, H, W] in [0, 1]. `motion` holds one feature map per level at
  // that level's resolution with 2 * kMotionFeatures channels (two
  // references, the second zero for P-frames); empty for intra frames.
  // Returns planes [1, 2C, H/2^l, W/2^l] for l = 1..L (index l-1).
  std::vector<Tensor<S>> forward(const Tensor<S>& x,
                                 const std::vector<Tensor<S>>& motion = {}) const;

  // Motion features of one or two references pooled to the encoder levels.
  static std::vector<Tensor<S>> conditioning(const MotionPyramid<S>& m1,
                                             const MotionPyramid<S>* m2, int levels);

  std::vector<Conv2d<S>>& heads() { return heads_; }
  ParamList<S> params() const;

 private:
  EncoderConfig config_;
  std::vector<Conv2d<S>> down_, res_a_, res_b_, heads_, mod_;
};

}  // namespace inrvc

#endif  // INRVC_NETWORKS_HPP_
