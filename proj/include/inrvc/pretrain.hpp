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


// Offline pretraining on short clips, followed by calibration of the
// weight-update prior.

#ifndef INRVC_PRETRAIN_HPP_
#define INRVC_PRETRAIN_HPP_

#include <functional>
#include <string>
#include <vector>

#include "inrvc/overfit.hpp"

namespace inrvc {

using Corpus = std::vector<std::vector<TensorF>>;  // clips of >= 3 frames

struct PretrainConfig {
  int steps = 1500;
  Index crop = 64;
  double lambda = 2048.0;
  DistortionKind distortion = DistortionKind::kMse;
  double lr = 3e-3;
  double grad_clip = 1.0;     // joint gradient norm cap, 0 disables
  double rate_warmup = 0.25;  // fraction of steps over which the rate weight ramps up from 0
  float tau_start = 0.5f, tau_end = 0.1f;
  double mask_end = 0.7;        // fraction of steps after which the mask is 0
  double motion_weight = 1.0;   // photometric loss on the motion estimate
  int calibration_frames = 4;
  int calibration_steps = 30;
  int prior_steps = 400;
  int log_every = 50;
  std::uint64_t seed = 1;
  std::string rescue_path;      // last good model is written here on divergence

  void validate() const;  // ConfigError
};

struct PretrainLog {
  int step = 0;
  double loss = 0, bpp = 0, psnr = 0, mask = 1, seconds = 0;
};

// Each step codes a three-frame group (intra, a forward-predicted frame two
// ahead, and the bidirectional frame between them) from a random crop and
// minimises its mean rate-distortion loss. Returns a model with the mask at 0
// and a calibrated prior. Throws TrainError on a non-finite loss.
CodecModel pretrain(const Corpus& corpus, const CodecConfig& config, const PretrainConfig& p,
                    const std::function<void(const PretrainLog&)>& log = {});

// Fits the weight-update prior to symbol statistics gathered from short
// overfits of `frames` and rebuilds its coding table.
void calibrate_prior(CodecModel& model, const std::vector<TensorF>& frames, const RdConfig& rd,
                     int steps_per_frame, int fit_steps);

}  // namespace inrvc

#endif  // INRVC_PRETRAIN_HPP_
