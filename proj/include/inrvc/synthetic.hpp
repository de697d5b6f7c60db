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


// Procedural video clips: moving shapes over textured backgrounds, drifting
// noise textures and global pans. Used as the pretraining corpus and as test
// material; fully determined by the seed.

#ifndef INRVC_SYNTHETIC_HPP_
#define INRVC_SYNTHETIC_HPP_

#include <cstdint>
#include <vector>

#include "inrvc/tensor.hpp"

namespace inrvc {

enum class SceneKind { kShapes, kTexture, kPan, kMixed };

struct SceneConfig {
  SceneKind kind = SceneKind::kMixed;
  Index height = 64, width = 64;
  int frames = 8;
  double speed = 1.5;  // pixels per frame, typical magnitude
  std::uint64_t seed = 1;
};

// Frames [1, 3, H, W] in [0, 1], display order.
std::vector<TensorF> synthetic_clip(const SceneConfig& c);

// `clips` clips of mixed kinds with varied seeds.
std::vector<std::vector<TensorF>> synthetic_corpus(int clips, Index height, Index width,
                                                   int frames, std::uint64_t seed);

}  // namespace inrvc

#endif  // INRVC_SYNTHETIC_HPP_
