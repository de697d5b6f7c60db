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


// Range coder over 16-bit frequency tables, plus the discretised-Gaussian
// tables the entropy model codes latents with.
//
// The coder keeps a 56-bit interval inside a 64-bit register and emits bytes
// with LZMA-style carry propagation, so per-symbol truncation loss is below
// 2^-32 relative. Every table is derived from integers or from doubles
// computed with IEEE basic operations only, so encoder and decoder agree on
// any conforming platform.

#ifndef INRVC_RANGE_CODER_HPP_
#define INRVC_RANGE_CODER_HPP_

#include <cstddef>
#include <cstdint>
#include <unordered_map>
#include <vector>

namespace inrvc {

constexpr int kFreqBits = 16;
constexpr std::uint32_t kFreqTotal = 1u << kFreqBits;

class FreqTable {
 public:
  FreqTable() = default;
  // Throws SymbolError unless every entry is >= 1 and the sum is 2^16.
  static FreqTable from_frequencies(const std::vector<std::uint32_t>& freq);
  // Quantises a probability vector (any positive scale) into frequencies
  // >= 1 summing to 2^16 by largest remainder.
  static FreqTable from_pmf(const std::vector<double>& pmf);

  std::size_t size() const { return cum_.empty() ? 0 : cum_.size() - 1; }
  std::uint32_t cum(std::size_t s) const { return cum_[s]; }
  std::uint32_t freq(std::size_t s) const { return cum_[s + 1] - cum_[s]; }
  // Symbol whose interval contains value (< 2^16).
  std::size_t find(std::uint32_t value) const;
  std::vector<std::uint32_t> frequencies() const;

 private:
  std::vector<std::uint32_t> cum_;
};

class RangeEncoder {
 public:
  // Throws SymbolError if symbol >= table.size().
  void encode(const FreqTable& table, std::size_t symbol);
  void encode_interval(std::uint32_t cum, std::uint32_t freq);
  // Equiprobable bits, 1 <= nbits <= 16.
  void encode_bits(std::uint32_t value, int nbits);
  std::vector<std::uint8_t> finish();

 private:
  void shift_low();
  void normalize();

  std::uint64_t low_ = 0;
  std::uint64_t range_ = (std::uint64_t{1} << 56) - 1;
  std::uint8_t cache_ = 0;
  std::uint64_t cache_size_ = 1;
  bool first_ = true;
  std::vector<std::uint8_t> out_;
};

class RangeDecoder {
 public:
  RangeDecoder(const std::uint8_t* data, std::size_t size);
  explicit RangeDecoder(const std::vector<std::uint8_t>& bytes)
      : RangeDecoder(bytes.data(), bytes.size()) {}

  // Throws DecodeError on streams no encoder could have produced.
  std::size_t decode(const FreqTable& table);
  std::uint32_t decode_bits(int nbits);

 private:
  std::uint8_t next_byte();
  void normalize();

  const std::uint8_t* data_;
  std::size_t size_, pos_ = 0;
  std::uint64_t code_ = 0;
  std::uint64_t range_ = (std::uint64_t{1} << 56) - 1;
};

// exp() from basic IEEE operations (reproducible across libms).
double stable_exp(double x);
// Upper-tail standard normal probability Q(x) via a Chebyshev erfc fit
// (fractional error < 1.2e-7).
double normal_upper_tail(double x);
// Mass of [lo, hi] under N(0, 1), computed on the tail that keeps precision.
double normal_mass(double lo, double hi);

// Gaussian parameters in the fixed-point form both coder sides see.
constexpr double kSigmaMin = 0.04;
constexpr double kSigmaMax = 256.0;
constexpr double kProbMin = 1.0 / 65536.0;
constexpr int kSigmaLevels = 4096;
constexpr int kMuScale = 256;
constexpr std::int32_t kMuLimit = 1 << 20;
constexpr int kMaxWindow = 256;

struct GaussianCode {
  std::int32_t mu = 0;     // round(mu * 256), clamped to +-2^20
  std::int32_t sigma = 0;  // log-spaced index into [kSigmaMin, kSigmaMax]
};

GaussianCode quantize_gaussian(double mu, double sigma);
double code_mu(const GaussianCode& g);
double code_sigma(const GaussianCode& g);
// Window centre round(mu), half-width K.
std::int32_t code_center(const GaussianCode& g);
int window_half_width(double sigma);

// -log2 max(P(v), p_min) under the dequantised parameters.
double gaussian_bits(std::int32_t v, const GaussianCode& g);

// Table over the symbols [centre - K, centre + K] followed by one escape
// symbol. Symbol frequencies never exceed max(P, p_min) * 2^16, so the coded
// length is never below the probability-model estimate.
FreqTable gaussian_to_freq(double mu, double sigma, int half_width);

// Memoised tables keyed on (sub-integer mu offset, sigma index).
class GaussianCoder {
 public:
  void encode(RangeEncoder& enc, std::int32_t v, const GaussianCode& g);
  std::int32_t decode(RangeDecoder& dec, const GaussianCode& g);

 private:
  const FreqTable& table(const GaussianCode& g, std::int32_t center, int* half_width);
  std::unordered_map<std::int64_t, FreqTable> cache_;
};

// Elias-gamma code of n >= 1 in equiprobable bits.
void encode_gamma(RangeEncoder& enc, std::uint32_t n);
std::uint32_t decode_gamma(RangeDecoder& dec);

// Windowed table over [-half_width, half_width] plus escape for a fixed PMF
// (used by the factorized prior); out-of-window values escape with a gamma
// coded magnitude and a sign bit.
void encode_with_escape(RangeEncoder& enc, const FreqTable& table, int half_width,
                        std::int32_t v);
std::int32_t decode_with_escape(RangeDecoder& dec, const FreqTable& table, int half_width);

}  // namespace inrvc

#endif  // INRVC_RANGE_CODER_HPP_
