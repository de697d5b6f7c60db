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


// Raw frame IO: binary PPM (P6, 8-bit) files and interleaved RGB24 files
// described by a sidecar text file "<width> <height> <frames>".

#ifndef INRVC_IO_HPP_
#define INRVC_IO_HPP_

#include <string>
#include <vector>

#include "inrvc/tensor.hpp"

namespace inrvc {

// Frames are [1, 3, H, W] floats in [0, 1]. Throw IoError / FormatError.
TensorF read_ppm(const std::string& path);
// Rounds to 8 bits; written to a temporary file and renamed into place.
void write_ppm(const TensorF& frame, const std::string& path);
std::vector<std::uint8_t> encode_ppm(const TensorF& frame);
TensorF decode_ppm(const std::vector<std::uint8_t>& bytes);

// Every *.ppm in a directory in lexicographic order; all must share a size.
std::vector<TensorF> read_ppm_dir(const std::string& dir);
void write_ppm_dir(const std::vector<TensorF>& frames, const std::string& dir);

// path is the .rgb file; the sidecar is path + ".txt".
std::vector<TensorF> read_rgb24(const std::string& path);
void write_rgb24(const std::vector<TensorF>& frames, const std::string& path);

// Directory -> PPM sequence, anything else -> RGB24 with sidecar.
std::vector<TensorF> read_frames(const std::string& path);
void write_frames(const std::vector<TensorF>& frames, const std::string& path);

// Atomic whole-file write (temporary + rename).
void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> read_file(const std::string& path);

// Frame quantised to 8 bits and back, as the file formats store it.
TensorF to_8bit(const TensorF& frame);

}  // namespace inrvc

#endif  // INRVC_IO_HPP_
