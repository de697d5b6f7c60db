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


// Whole-sequence coding: GOP ordering, reference management, per-frame
// overfitting and the container.

#ifndef INRVC_PIPELINE_HPP_
#define INRVC_PIPELINE_HPP_

#include <functional>
#include <string>
#include <vector>

#include "inrvc/overfit.hpp"

namespace inrvc {

struct EncodeOptions {
  GopMode mode = GopMode::kLowDelay;
  int gop_length = 1;
  int intra_period = 0;   // 0: only the first frame is intra
  RdConfig rd;
  int overfit_steps = -1;  // >= 0 overrides the per-type defaults in rd
};

struct FrameReport {
  int display = 0, decode = 0;
  FrameType type = FrameType::kIntra;
  std::size_t bytes = 0;  // framed packet size
  double psnr = 0.0;
  double initial_objective = 0.0, best_objective = 0.0;
  int best_step = 0;
  double soft_bits = 0.0, true_bits = 0.0;
  double seconds = 0.0;
};

struct EncodeResult {
  SequenceHeader header;
  std::vector<std::uint8_t> bytes;
  std::vector<TensorF> reconstruction;  // display order, cropped
  std::vector<FrameReport> frames;      // decode order
  double bpp = 0.0, psnr = 0.0, ms_ssim = 0.0;
};

using FrameCallback = std::function<void(const FrameReport&)>;

// Frames must share one size. Throws ParamError / ConfigError.
EncodeResult encode_sequence(const CodecModel& model, const std::vector<TensorF>& frames,
                             const EncodeOptions& options, const FrameCallback& progress = {});

SequenceHeader make_header(const CodecModel& model, const CodecRuntime& rt, Index height,
                           Index width, int frames, const EncodeOptions& options);
// Throws ConfigError when the stream was not produced with this model.
void check_header(const SequenceHeader& h, const CodecModel& model, const CodecRuntime& rt);

struct DecodeResult {
  SequenceHeader header;
  std::vector<TensorF> frames;  // display order, cropped
};

// Throws FormatError / VersionError / CorruptError for container problems
// and ConfigError for a model mismatch.
DecodeResult decode_sequence(const CodecModel& model, const std::vector<std::uint8_t>& bytes);

// Mean per-frame quality in display order.
double mean_psnr(const std::vector<TensorF>& ref, const std::vector<TensorF>& test);
double mean_ms_ssim(const std::vector<TensorF>& ref, const std::vector<TensorF>& test);

struct RdRow {
  double lambda = 0.0, bpp = 0.0, psnr = 0.0, ms_ssim = 0.0;
};

// One full encode per lambda (measured bytes). Throws ParamError for fewer
// than two values.
std::vector<RdRow> lambda_sweep(const CodecModel& model, const std::vector<TensorF>& frames,
                                const std::vector<double>& lambdas, EncodeOptions options,
                                const std::function<void(const RdRow&)>& progress = {});

// CSV with header "lambda,bpp,psnr,ms_ssim".
std::string rd_csv(const std::vector<RdRow>& rows);
// Throws FormatError.
std::vector<RdRow> parse_rd_csv(const std::string& text);

}  // namespace inrvc

#endif  // INRVC_PIPELINE_HPP_
