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


// Per-frame online optimisation of what gets transmitted: the latents, the
// per-channel quantiser steps and the entropy-head weight update, against
// the frame's rate-distortion objective.

#ifndef INRVC_OVERFIT_HPP_
#define INRVC_OVERFIT_HPP_

#include <cstdint>
#include <vector>

#include "inrvc/codec.hpp"

namespace inrvc {

enum class DistortionKind { kMse, kMsSsim };

// MSE, or 200 (1 - MS-SSIM). Throws ShapeError.
template <typename S>
Tensor<S> distortion(const Tensor<S>& x, const Tensor<S>& xhat, DistortionKind kind);
double distortion_value(const TensorF& x, const TensorF& xhat, DistortionKind kind);

struct RdConfig {
  // Objective per frame: bits / pixel + q_glob * lambda * d(x, xhat).
  double lambda = 256.0;
  DistortionKind distortion = DistortionKind::kMse;
  int steps_intra = 300;
  int steps_inter = 100;
  int eval_every = 10;
  double lr_latent = 1e-3;
  double lr_quant = 1e-3;
  double lr_update = 1e-4;
  float tau_start = 0.3f;
  float tau_end = 0.1f;
  // Initial weight-update quantiser: symbols = round(q_psi * delta), values
  // qt_psi * symbols.
  double q_psi = 256.0;
  std::uint64_t seed = 1;

  // Throws ConfigError.
  void validate() const;
  int steps_for(FrameType t) const { return t == FrameType::kIntra ? steps_intra : steps_inter; }
};

// Encoder-side view of the frame being coded.
struct FrameJob {
  TensorF frame;           // [1, 3, H, W], unpadded
  FramePacket header;      // display, type, references, layer
  const FrameBuffer* buffer = nullptr;
  const UpdateState* state = nullptr;
  float q_glob = 1.0f;
};

struct OverfitResult {
  FramePacket packet;
  FrameDecision decision;
  DecodedFrame decoded;  // exactly what the decoder reconstructs
  UpdateState next_state;
  double initial_objective = 0.0;  // hard, at the warm start
  double best_objective = 0.0;
  int best_step = 0;
  int retries = 0;
  double soft_bits = 0.0;  // relaxed rate at the selected iterate
  double true_bits = 0.0;  // framed packet size * 8
  std::vector<std::pair<int, double>> trace;  // (step, hard objective)
};

// Latents predicted by the encoder for a padded frame (motion-conditioned
// against the references held in the buffer).
std::vector<TensorF> encoder_latents(const CodecModel& model, const TensorF& padded,
                                     const FramePacket& header, const FrameBuffer& buffer);

// Runs `steps` optimiser steps (0 codes the warm start), evaluating the hard
// objective through the real coder every eval_every steps and at the end,
// and returns the best evaluated iterate. A non-finite loss rolls back to the
// warm start with halved learning rates once; a second one throws
// OverfitError.
OverfitResult overfit_frame(const CodecRuntime& rt, const FrameJob& job, const RdConfig& config,
                            int steps);

}  // namespace inrvc

#endif  // INRVC_OVERFIT_HPP_
