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


// The pretrained model, its checkpoint file, and the frame-level coding path
// shared by the encoder (for every hard evaluation) and the decoder.

#ifndef INRVC_CODEC_HPP_
#define INRVC_CODEC_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "inrvc/bitstream.hpp"
#include "inrvc/decoder.hpp"
#include "inrvc/entropy_model.hpp"
#include "inrvc/networks.hpp"

namespace inrvc {

struct CodecConfig {
  Index latent_channels = 8;
  int levels = 3;
  EncoderConfig encoder;
  MotionConfig motion;
  DecoderConfig decoder;
  EntropyConfig entropy;
  Index prior_width = 8;
  int prior_half_width = 32;
  QGlobTable qglob;
  std::uint64_t seed = 1;

  // Copies the shared sizes into the sub-configs. Throws ConfigError.
  void propagate();
};

CodecConfig default_config();

struct CodecModel {
  CodecConfig config;
  ImageEncoder<float> encoder;
  MotionEstimator<float> motion;
  Decoder<float> decoder;
  EntropyModel<float> entropy;
  FactorizedPrior<float> prior;
  FreqTable prior_table;
  std::vector<TensorF> log_q, log_qt;  // per level [2C]: quantiser initialisation
  double lambda = 0.0;                 // lambda the model was pretrained at

  explicit CodecModel(CodecConfig c);

  void set_mask(double m);
  // Rebuilds the weight-update coding table from the prior.
  void refresh_prior_table();
  // Every learned tensor under a unique name.
  ParamList<float> params() const;
};

// Checkpoint: versioned config, every named tensor and the prior table.
std::vector<std::uint8_t> serialize_checkpoint(const CodecModel& m);
// Throws FormatError / VersionError / ConfigError.
CodecModel parse_checkpoint(const std::vector<std::uint8_t>& bytes);
std::uint64_t checkpoint_hash(const CodecModel& m);
void save_checkpoint(const CodecModel& m, const std::string& path);
CodecModel load_checkpoint(const std::string& path);

// Frame-independent inference state: compiled decoder, frozen entropy head.
class CodecRuntime {
 public:
  // Requires mask decay to have finished. Leaves of the model's entropy and
  // prior networks stop recording gradients.
  CodecRuntime(const CodecModel& model, Index patch);

  const CodecModel& model() const { return model_; }
  Index patch() const { return patch_; }
  const CompiledDecoder<float>& decoder() const { return decoder_; }
  const std::vector<FrozenLinear<float>>& frozen_head() const { return frozen_; }
  const HeadResidual<float>& residual_layout() const { return layout_; }
  Index residual_size() const { return residual_size_; }
  std::uint64_t hash() const { return hash_; }

  // Inference head with a flat weight update applied.
  EntropyHead<float> head(const TensorF& psi) const;
  // Differentiable head for training the update.
  EntropyHead<float> training_head(const TensorF& psi) const;

  GaussianCoder& coder() const { return coder_; }

 private:
  const CodecModel& model_;
  Index patch_;
  CompiledDecoder<float> decoder_;
  std::vector<FrozenLinear<float>> frozen_;
  HeadResidual<float> layout_;
  Index residual_size_ = 0;
  std::uint64_t hash_ = 0;
  mutable GaussianCoder coder_;
};

struct DecodedFrame {
  TensorF image;                 // padded [1, 3, H, W]
  std::vector<TensorF> latents;  // dequantised, level l at index l-1
};

class FrameBuffer {
 public:
  void insert(int display, DecodedFrame f) { frames_[display] = std::move(f); }
  // Throws StateError for frames not held.
  const DecodedFrame& get(int display) const;
  bool contains(int display) const { return frames_.count(display) != 0; }
  // Drops everything not listed.
  void retain(const std::vector<int>& keep);
  std::size_t size() const { return frames_.size(); }

 private:
  std::map<int, DecodedFrame> frames_;
};

// Weight-update state carried along decode order: one flat update per level.
// Reset to zero at intra frames.
struct UpdateState {
  std::vector<TensorF> psi;
  static UpdateState zeros(const CodecRuntime& rt);
};

// Everything the encoder decided for a frame.
struct FrameDecision {
  std::vector<IntTensor> symbols;                     // per level
  std::vector<std::vector<std::uint16_t>> qt_codes;   // per level
  std::vector<std::vector<std::int32_t>> psi_symbols;  // per level, residual_size each
  std::vector<float> qt_psi;
};

// Contexts the entropy model sees for level l (1-based) of a frame.
LevelContext<float> level_context(const FramePacket& header, const FrameBuffer& buffer,
                                  const std::vector<TensorF>& planes, int level, int levels);

// Absolute update after applying decoded symbols to the carried state.
std::vector<TensorF> updated_psi(const UpdateState& base, const FramePacket& header,
                                 const std::vector<std::vector<std::int32_t>>& symbols);

// Range-codes a decision; `header` supplies type and references. Returns the
// packet with payload filled and sets *estimated_bits if given.
FramePacket encode_frame(const CodecRuntime& rt, FramePacket header, const FrameDecision& d,
                         const FrameBuffer& buffer, const UpdateState& state,
                         double* estimated_bits = nullptr);

// Decodes a packet. Throws StateError for missing references, DecodeError or
// FormatError for malformed payloads. `next_state` receives the carried
// update after this frame.
DecodedFrame decode_packet(const CodecRuntime& rt, const FramePacket& p, const FrameBuffer& buffer,
                           const UpdateState& state, Index height, Index width,
                           UpdateState* next_state = nullptr);

// Pads by edge replication to multiples of `unit`, and crops back.
TensorF pad_frame(const TensorF& x, Index unit);
TensorF crop_frame(const TensorF& x, Index height, Index width);
inline Index padded_extent(Index n, Index unit) { return (n + unit - 1) / unit * unit; }

}  // namespace inrvc

#endif  // INRVC_CODEC_HPP_
