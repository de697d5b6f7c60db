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


#include "inrvc/range_coder.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "inrvc/errors.hpp"

namespace inrvc {
namespace {

constexpr std::uint64_t kTop = std::uint64_t{1} << 56;
constexpr std::uint64_t kBottom = std::uint64_t{1} << 48;
constexpr std::uint64_t kLowMask = kBottom - 1;
constexpr int kRegisterBytes = 7;

// ln(kSigmaMin) and ln(kSigmaMax) as literals so no libm call is involved in
// dequantisation.
constexpr double kLogSigmaMin = -3.2188758248682006;
constexpr double kLogSigmaMax = 5.5451774444795623;
constexpr double kLogSigmaStep = (kLogSigmaMax - kLogSigmaMin) / (kSigmaLevels - 1);

double erfc_cheb(double z) {
  const double az = std::abs(z);
  const double t = 1.0 / (1.0 + 0.5 * az);
  const double ans =
      t * stable_exp(-az * az - 1.26551223 +
                     t * (1.00002368 +
                     t * (0.37409196 +
                     t * (0.09678418 +
                     t * (-0.18628806 +
                     t * (0.27886807 +
                     t * (-1.13520398 +
                     t * (1.48851587 +
                     t * (-0.82215223 +
                     t * 0.17087277)))))))));
  return z >= 0.0 ? ans : 2.0 - ans;
}

}  // namespace

FreqTable FreqTable::from_frequencies(const std::vector<std::uint32_t>& freq) {
  FreqTable t;
  t.cum_.resize(freq.size() + 1, 0);
  for (std::size_t i = 0; i < freq.size(); ++i) {
    if (freq[i] == 0) throw SymbolError("zero frequency for symbol " + std::to_string(i));
    t.cum_[i + 1] = t.cum_[i] + freq[i];
  }
  if (freq.empty() || t.cum_.back() != kFreqTotal) {
    throw SymbolError("frequencies must sum to 65536");
  }
  return t;
}

FreqTable FreqTable::from_pmf(const std::vector<double>& pmf) {
  const std::size_t n = pmf.size();
  if (n == 0 || n > kFreqTotal) throw SymbolError("alphabet size out of range");
  double total = 0.0;
  for (double p : pmf) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw SymbolError("invalid probability");
    total += p;
  }
  const double budget = static_cast<double>(kFreqTotal - n);
  std::vector<std::uint32_t> f(n);
  std::vector<double> frac(n);
  std::uint32_t used = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = total > 0.0 ? pmf[i] / total * budget : budget / n;
    const double fl = std::floor(t);
    f[i] = 1 + static_cast<std::uint32_t>(fl);
    frac[i] = t - fl;
    used += f[i];
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t k = 0; used < kFreqTotal; k = (k + 1) % n) {
    ++f[order[k]];
    ++used;
  }
  return from_frequencies(f);
}

std::size_t FreqTable::find(std::uint32_t value) const {
  const auto it = std::upper_bound(cum_.begin() + 1, cum_.end(), value);
  return static_cast<std::size_t>(it - cum_.begin()) - 1;
}

std::vector<std::uint32_t> FreqTable::frequencies() const {
  std::vector<std::uint32_t> f(size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = freq(i);
  return f;
}

void RangeEncoder::encode(const FreqTable& table, std::size_t symbol) {
  if (symbol >= table.size()) {
    throw SymbolError("symbol " + std::to_string(symbol) + " outside alphabet of " +
                      std::to_string(table.size()));
  }
  encode_interval(table.cum(symbol), table.freq(symbol));
}

void RangeEncoder::encode_interval(std::uint32_t cum, std::uint32_t freq) {
  const std::uint64_t r = range_ >> kFreqBits;
  low_ += r * cum;
  range_ = r * freq;
  normalize();
}

void RangeEncoder::encode_bits(std::uint32_t value, int nbits) {
  if (nbits < 1 || nbits > 16 || value >= (1u << nbits)) {
    throw SymbolError("raw value does not fit the requested bit count");
  }
  const std::uint64_t r = range_ >> nbits;
  low_ += r * value;
  range_ = r;
  normalize();
}

void RangeEncoder::normalize() {
  while (range_ < kBottom) {
    range_ <<= 8;
    shift_low();
  }
}

void RangeEncoder::shift_low() {
  const std::uint8_t top = static_cast<std::uint8_t>(low_ >> 48);
  const std::uint8_t carry = static_cast<std::uint8_t>(low_ >> 56);
  if (top < 0xFF || carry != 0) {
    std::uint8_t pending = cache_;
    do {
      const std::uint8_t b = static_cast<std::uint8_t>(pending + carry);
      // The very first byte is the initial empty cache and is always zero.
      if (first_) first_ = false;
      else out_.push_back(b);
      pending = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = top;
  }
  ++cache_size_;
  low_ = (low_ & kLowMask) << 8;
}

std::vector<std::uint8_t> RangeEncoder::finish() {
  // Any value in [low, low + range) identifies the stream; pick the one with
  // the most trailing zero bytes, which the decoder supplies implicitly.
  low_ = (low_ + kLowMask) & ~kLowMask;
  shift_low();
  shift_low();
  while (!out_.empty() && out_.back() == 0) out_.pop_back();
  std::vector<std::uint8_t> out;
  out.swap(out_);
  low_ = 0;
  range_ = kTop - 1;
  cache_ = 0;
  cache_size_ = 1;
  first_ = true;
  return out;
}

RangeDecoder::RangeDecoder(const std::uint8_t* data, std::size_t size)
    : data_(data), size_(size) {
  for (int i = 0; i < kRegisterBytes; ++i) code_ = (code_ << 8) | next_byte();
}

std::uint8_t RangeDecoder::next_byte() {
  const std::uint8_t b = pos_ < size_ ? data_[pos_] : 0;
  ++pos_;
  return b;
}

void RangeDecoder::normalize() {
  while (range_ < kBottom) {
    code_ = (code_ << 8) | next_byte();
    range_ <<= 8;
  }
}

std::size_t RangeDecoder::decode(const FreqTable& table) {
  const std::uint64_t r = range_ >> kFreqBits;
  const std::uint64_t v = code_ / r;
  if (v >= kFreqTotal || code_ >= range_) throw DecodeError("code value outside the interval");
  const std::size_t s = table.find(static_cast<std::uint32_t>(v));
  code_ -= r * table.cum(s);
  range_ = r * table.freq(s);
  normalize();
  return s;
}

std::uint32_t RangeDecoder::decode_bits(int nbits) {
  if (nbits < 1 || nbits > 16) throw DecodeError("bad raw bit count");
  const std::uint64_t r = range_ >> nbits;
  const std::uint64_t v = code_ / r;
  if (v >= (std::uint64_t{1} << nbits)) throw DecodeError("raw bits outside the interval");
  code_ -= v * r;
  range_ = r;
  normalize();
  return static_cast<std::uint32_t>(v);
}

double stable_exp(double x) {
  if (std::isnan(x)) return x;
  if (x > 709.0) return HUGE_VAL;
  if (x < -745.0) return 0.0;
  constexpr double kInvLn2 = 1.44269504088896338700e+00;
  constexpr double kLn2Hi = 6.93147180369123816490e-01;
  constexpr double kLn2Lo = 1.90821492927058770002e-10;
  const double n = std::nearbyint(x * kInvLn2);
  const double r = (x - n * kLn2Hi) - n * kLn2Lo;
  double p = 1.0;
  for (int k = 13; k >= 1; --k) p = 1.0 + p * r / k;
  return std::ldexp(p, static_cast<int>(n));
}

double normal_upper_tail(double x) {
  return 0.5 * erfc_cheb(x * 0.70710678118654752440);
}

double normal_mass(double lo, double hi) {
  double p;
  if (lo >= 0.0) p = normal_upper_tail(lo) - normal_upper_tail(hi);
  else if (hi <= 0.0) p = normal_upper_tail(-hi) - normal_upper_tail(-lo);
  else p = 1.0 - normal_upper_tail(-lo) - normal_upper_tail(hi);
  return std::max(p, 0.0);
}

GaussianCode quantize_gaussian(double mu, double sigma) {
  GaussianCode g;
  const double m = std::clamp(mu * kMuScale, -static_cast<double>(kMuLimit),
                              static_cast<double>(kMuLimit));
  g.mu = static_cast<std::int32_t>(std::isfinite(m) ? std::round(m) : 0.0);
  const double s = std::clamp(std::isfinite(sigma) ? sigma : kSigmaMax, kSigmaMin, kSigmaMax);
  const double idx = std::round((std::log(s) - kLogSigmaMin) / kLogSigmaStep);
  g.sigma = static_cast<std::int32_t>(std::clamp(idx, 0.0, kSigmaLevels - 1.0));
  return g;
}

double code_mu(const GaussianCode& g) { return static_cast<double>(g.mu) / kMuScale; }

double code_sigma(const GaussianCode& g) {
  return stable_exp(kLogSigmaMin + g.sigma * kLogSigmaStep);
}

std::int32_t code_center(const GaussianCode& g) {
  return g.mu >= 0 ? (g.mu + kMuScale / 2) / kMuScale
                   : -((-g.mu + kMuScale / 2) / kMuScale);
}

int window_half_width(double sigma) {
  return static_cast<int>(std::min(static_cast<double>(kMaxWindow), std::ceil(6.0 * sigma + 1.5)));
}

double gaussian_bits(std::int32_t v, const GaussianCode& g) {
  const double mu = code_mu(g), s = code_sigma(g);
  const double p = normal_mass((v - 0.5 - mu) / s, (v + 0.5 - mu) / s);
  return -std::log2(std::max(p, kProbMin));
}

FreqTable gaussian_to_freq(double mu, double sigma, int half_width) {
  const int n = 2 * half_width + 1;
  std::vector<std::uint32_t> f(n + 1);
  std::uint64_t used = 0;
  for (int i = 0; i < n; ++i) {
    const double v = static_cast<double>(i - half_width);
    const double p = normal_mass((v - 0.5 - mu) / sigma, (v + 0.5 - mu) / sigma);
    f[i] = std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::floor(p * kFreqTotal)));
    used += f[i];
  }
  while (used >= kFreqTotal) {
    const auto it = std::max_element(f.begin(), f.begin() + n);
    --*it;
    --used;
  }
  f[n] = static_cast<std::uint32_t>(kFreqTotal - used);
  return FreqTable::from_frequencies(f);
}

const FreqTable& GaussianCoder::table(const GaussianCode& g, std::int32_t center,
                                      int* half_width) {
  const std::int32_t offset = g.mu - center * kMuScale;
  const std::int64_t key = (static_cast<std::int64_t>(offset) + kMuScale) * kSigmaLevels + g.sigma;
  const double sigma = code_sigma(g);
  *half_width = window_half_width(sigma);
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    it = cache_.emplace(key, gaussian_to_freq(static_cast<double>(offset) / kMuScale, sigma,
                                              *half_width)).first;
  }
  return it->second;
}

void GaussianCoder::encode(RangeEncoder& enc, std::int32_t v, const GaussianCode& g) {
  const std::int32_t c = code_center(g);
  int k;
  const FreqTable& t = table(g, c, &k);
  encode_with_escape(enc, t, k, v - c);
}

std::int32_t GaussianCoder::decode(RangeDecoder& dec, const GaussianCode& g) {
  const std::int32_t c = code_center(g);
  int k;
  const FreqTable& t = table(g, c, &k);
  return c + decode_with_escape(dec, t, k);
}

void encode_gamma(RangeEncoder& enc, std::uint32_t n) {
  if (n == 0) throw SymbolError("gamma code needs n >= 1");
  int len = 0;
  while ((n >> (len + 1)) != 0) ++len;
  for (int i = 0; i < len; ++i) enc.encode_bits(0, 1);
  enc.encode_bits(1, 1);
  for (int rem = len; rem > 0;) {
    const int chunk = std::min(rem, 16);
    rem -= chunk;
    enc.encode_bits((n >> rem) & ((1u << chunk) - 1), chunk);
  }
}

std::uint32_t decode_gamma(RangeDecoder& dec) {
  int len = 0;
  while (dec.decode_bits(1) == 0) {
    if (++len > 31) throw DecodeError("gamma prefix too long");
  }
  std::uint32_t n = 1;
  for (int rem = len; rem > 0;) {
    const int chunk = std::min(rem, 16);
    rem -= chunk;
    n = (n << chunk) | dec.decode_bits(chunk);
  }
  return n;
}

void encode_with_escape(RangeEncoder& enc, const FreqTable& table, int half_width,
                        std::int32_t v) {
  if (table.size() != static_cast<std::size_t>(2 * half_width + 2)) {
    throw SymbolError("table does not match window");
  }
  if (v >= -half_width && v <= half_width) {
    enc.encode(table, static_cast<std::size_t>(v + half_width));
    return;
  }
  enc.encode(table, static_cast<std::size_t>(2 * half_width + 1));
  const std::int64_t mag = std::abs(static_cast<std::int64_t>(v)) - half_width;
  if (mag > 0xFFFFFFFFll) throw SymbolError("value too large to escape");
  encode_gamma(enc, static_cast<std::uint32_t>(mag));
  enc.encode_bits(v < 0 ? 1 : 0, 1);
}

std::int32_t decode_with_escape(RangeDecoder& dec, const FreqTable& table, int half_width) {
  if (table.size() != static_cast<std::size_t>(2 * half_width + 2)) {
    throw DecodeError("table does not match window");
  }
  const std::size_t s = dec.decode(table);
  if (s <= static_cast<std::size_t>(2 * half_width)) {
    return static_cast<std::int32_t>(s) - half_width;
  }
  const std::int64_t mag = static_cast<std::int64_t>(decode_gamma(dec)) + half_width;
  if (mag > (std::int64_t{1} << 31) - 1) throw DecodeError("escaped value overflows");
  const bool neg = dec.decode_bits(1) != 0;
  return static_cast<std::int32_t>(neg ? -mag : mag);
}

}  // namespace inrvc
