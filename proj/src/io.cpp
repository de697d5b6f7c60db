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


#include "inrvc/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "inrvc/errors.hpp"

namespace inrvc {

namespace fs = std::filesystem;

namespace {

std::uint8_t to_byte(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

void check_frame(const TensorF& f) {
  if (f.rank() != 4 || f.dim(0) != 1 || f.dim(1) != 3) {
    throw ShapeError("frames are 1 x 3 x H x W, got " + to_string(f.shape()));
  }
}

}  // namespace

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  const std::string tmp = path + ".partial";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot create " + tmp);
    f.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!f) {
      std::remove(tmp.c_str());
      throw IoError("cannot write " + tmp);
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw IoError("cannot move output into " + path + ": " + ec.message());
  }
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
}

std::vector<std::uint8_t> encode_ppm(const TensorF& frame) {
  check_frame(frame);
  const Index H = frame.dim(2), W = frame.dim(3);
  const std::string head = "P6\n" + std::to_string(W) + " " + std::to_string(H) + "\n255\n";
  std::vector<std::uint8_t> out(head.begin(), head.end());
  out.reserve(out.size() + 3 * H * W);
  for (Index y = 0; y < H; ++y)
    for (Index x = 0; x < W; ++x)
      for (Index c = 0; c < 3; ++c) out.push_back(to_byte(frame.at((c * H + y) * W + x)));
  return out;
}

TensorF decode_ppm(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  // Header tokens are separated by whitespace; '#' starts a comment.
  auto token = [&]() {
    std::string t;
    while (pos < bytes.size()) {
      const char c = static_cast<char>(bytes[pos]);
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        if (!t.empty()) break;
        ++pos;
      } else {
        t.push_back(c);
        ++pos;
      }
    }
    return t;
  };
  if (token() != "P6") throw FormatError("not a binary PPM (P6) file");
  long W, H, maxval;
  try {
    W = std::stol(token());
    H = std::stol(token());
    maxval = std::stol(token());
  } catch (const std::exception&) {
    throw FormatError("malformed PPM header");
  }
  if (W <= 0 || H <= 0 || maxval != 255) throw FormatError("only 8-bit PPM files are supported");
  ++pos;  // single whitespace before the raster
  if (bytes.size() < pos + std::size_t(3 * W * H)) throw FormatError("truncated PPM raster");
  ArrayX<float> v(3 * H * W);
  for (long y = 0; y < H; ++y)
    for (long x = 0; x < W; ++x)
      for (long c = 0; c < 3; ++c) v((c * H + y) * W + x) = bytes[pos++] / 255.0f;
  return TensorF({1, 3, H, W}, std::move(v));
}

TensorF read_ppm(const std::string& path) { return decode_ppm(read_file(path)); }
void write_ppm(const TensorF& frame, const std::string& path) { write_file(path, encode_ppm(frame)); }

std::vector<TensorF> read_ppm_dir(const std::string& dir) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".ppm") names.push_back(e.path().string());
  }
  std::sort(names.begin(), names.end());
  if (names.empty()) throw IoError("no .ppm files in " + dir);
  std::vector<TensorF> out;
  for (const auto& n : names) {
    out.push_back(read_ppm(n));
    if (out.back().shape() != out.front().shape()) throw FormatError(n + " differs in size");
  }
  return out;
}

void write_ppm_dir(const std::vector<TensorF>& frames, const std::string& dir) {
  fs::create_directories(dir);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%05zu.ppm", t);
    write_ppm(frames[t], (fs::path(dir) / name).string());
  }
}

std::vector<TensorF> read_rgb24(const std::string& path) {
  std::ifstream side(path + ".txt");
  if (!side) throw IoError("missing sidecar " + path + ".txt");
  long W = 0, H = 0, T = 0;
  if (!(side >> W >> H >> T) || W <= 0 || H <= 0 || T <= 0) {
    throw FormatError("sidecar must hold positive width, height and frame count");
  }
  const auto bytes = read_file(path);
  if (bytes.size() != std::size_t(3 * W * H * T)) {
    throw FormatError("raw file size does not match the sidecar");
  }
  std::vector<TensorF> out;
  std::size_t pos = 0;
  for (long t = 0; t < T; ++t) {
    ArrayX<float> v(3 * H * W);
    for (long y = 0; y < H; ++y)
      for (long x = 0; x < W; ++x)
        for (long c = 0; c < 3; ++c) v((c * H + y) * W + x) = bytes[pos++] / 255.0f;
    out.emplace_back(Shape{1, 3, H, W}, std::move(v));
  }
  return out;
}

void write_rgb24(const std::vector<TensorF>& frames, const std::string& path) {
  if (frames.empty()) throw ParamError("no frames to write");
  const Index H = frames[0].dim(2), W = frames[0].dim(3);
  std::vector<std::uint8_t> bytes;
  for (const auto& f : frames) {
    check_frame(f);
    if (f.dim(2) != H || f.dim(3) != W) throw ShapeError("frames differ in size");
    for (Index y = 0; y < H; ++y)
      for (Index x = 0; x < W; ++x)
        for (Index c = 0; c < 3; ++c) bytes.push_back(to_byte(f.at((c * H + y) * W + x)));
  }
  const std::string side = std::to_string(W) + " " + std::to_string(H) + " " +
                           std::to_string(frames.size()) + "\n";
  write_file(path + ".txt", std::vector<std::uint8_t>(side.begin(), side.end()));
  write_file(path, bytes);
}

std::vector<TensorF> read_frames(const std::string& path) {
  return fs::is_directory(path) ? read_ppm_dir(path) : read_rgb24(path);
}

void write_frames(const std::vector<TensorF>& frames, const std::string& path) {
  if (fs::is_directory(path) || fs::path(path).extension().empty()) {
    write_ppm_dir(frames, path);
  } else {
    write_rgb24(frames, path);
  }
}

TensorF to_8bit(const TensorF& frame) {
  ArrayX<float> v = frame.value();
  for (Index i = 0; i < v.size(); ++i) v(i) = to_byte(v(i)) / 255.0f;
  return TensorF(frame.shape(), std::move(v));
}

}  // namespace inrvc
