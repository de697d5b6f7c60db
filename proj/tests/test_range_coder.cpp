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


#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "inrvc/errors.hpp"
#include "inrvc/range_coder.hpp"
#include "inrvc/rng.hpp"

using namespace inrvc;

namespace {

FreqTable random_table(Rng& rng, std::size_t n) {
  std::vector<double> p(n);
  for (auto& x : p) x = std::pow(rng.uniform(), 3.0) + 1e-6;
  return FreqTable::from_pmf(p);
}

double shannon_bits(const FreqTable& t, const std::vector<std::size_t>& s) {
  double b = 0.0;
  for (std::size_t x : s) b -= std::log2(static_cast<double>(t.freq(x)) / kFreqTotal);
  return b;
}

}  // namespace

TEST_CASE("freq tables") {
  const auto t = FreqTable::from_pmf({0.5, 0.25, 0.25});
  CHECK(t.freq(0) == 32768);
  CHECK(t.cum(2) == 49152);
  CHECK(t.find(0) == 0);
  CHECK(t.find(32767) == 0);
  CHECK(t.find(32768) == 1);
  CHECK(t.find(65535) == 2);
  CHECK_THROWS_AS(FreqTable::from_frequencies({0, 65536}), SymbolError);
  CHECK_THROWS_AS(FreqTable::from_frequencies({1, 2}), SymbolError);
  const auto tiny = FreqTable::from_pmf({1.0, 0.0, 0.0});
  CHECK(tiny.freq(1) == 1);
  CHECK(tiny.freq(0) == 65534);
}

TEST_CASE("single symbol and fair coins") {
  const auto coin = FreqTable::from_pmf({0.5, 0.5});
  RangeEncoder enc;
  enc.encode(coin, 1);
  const auto one = enc.finish();
  CHECK(one.size() <= 2);
  RangeDecoder dec(one);
  CHECK(dec.decode(coin) == 1);

  Rng rng(5);
  std::vector<std::size_t> s(1000);
  for (auto& x : s) x = rng.below(2);
  for (auto x : s) enc.encode(coin, x);
  const auto bytes = enc.finish();
  CHECK(bytes.size() * 8 <= 1000 + 64);
  RangeDecoder d2(bytes);
  for (auto x : s) CHECK(d2.decode(coin) == x);
  CHECK_THROWS_AS(enc.encode(coin, 2), SymbolError);
}

TEST_CASE("skewed source approaches its entropy") {
  const auto t = FreqTable::from_pmf({0.99, 0.01});
  Rng rng(6);
  const int n = 200000;
  RangeEncoder enc;
  std::vector<std::size_t> s(n);
  for (auto& x : s) x = rng.uniform() < 0.01 ? 1 : 0;
  for (auto x : s) enc.encode(t, x);
  const auto bytes = enc.finish();
  const double per = bytes.size() * 8.0 / n;
  CHECK(per == doctest::Approx(0.0808).epsilon(0.05));
  RangeDecoder dec(bytes);
  for (auto x : s) REQUIRE(dec.decode(t) == x);
}

TEST_CASE("random round trips stay within the Shannon bound") {
  Rng rng(7);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t alpha = 2 + rng.below(40);
    const FreqTable t = random_table(rng, alpha);
    const std::size_t len = trial % 10 == 0 ? 1000 + rng.below(2000) : rng.below(200);
    std::vector<std::size_t> s(len);
    for (auto& x : s) x = t.find(static_cast<std::uint32_t>(rng.below(kFreqTotal)));
    RangeEncoder enc;
    for (auto x : s) enc.encode(t, x);
    enc.encode_bits(static_cast<std::uint32_t>(trial & 0xFFF), 12);
    const auto bytes = enc.finish();
    RangeDecoder dec(bytes);
    bool ok = true;
    for (auto x : s) ok = ok && dec.decode(t) == x;
    ok = ok && dec.decode_bits(12) == static_cast<std::uint32_t>(trial & 0xFFF);
    REQUIRE(ok);
    if (len >= 1000) {
      CHECK(bytes.size() * 8.0 <= (shannon_bits(t, s) + 12) * 1.02 + 64);
    }
  }
}

TEST_CASE("gamma codes and escapes") {
  Rng rng(8);
  RangeEncoder enc;
  std::vector<std::uint32_t> ns{1, 2, 3, 7, 8, 1000, 65535, 65536, 0x7FFFFFFF};
  for (auto n : ns) encode_gamma(enc, n);
  const auto t = FreqTable::from_pmf({1, 2, 5, 2, 1, 0.1});
  std::vector<std::int32_t> vs{0, -2, 2, 3, -3, 100, -1000000};
  for (auto v : vs) encode_with_escape(enc, t, 2, v);
  const auto bytes = enc.finish();
  RangeDecoder dec(bytes);
  for (auto n : ns) CHECK(decode_gamma(dec) == n);
  for (auto v : vs) CHECK(decode_with_escape(dec, t, 2) == v);
}

TEST_CASE("deterministic exp and normal tail") {
  for (double x = -700; x < 700; x += 0.37) {
    CHECK(stable_exp(x) == doctest::Approx(std::exp(x)).epsilon(1e-14));
  }
  for (double x = -6; x < 6; x += 0.013) {
    CHECK(normal_upper_tail(x) ==
          doctest::Approx(0.5 * std::erfc(x / std::sqrt(2.0))).epsilon(2e-7));
  }
}

TEST_CASE("gaussian tables") {
  Rng rng(9);
  for (int i = 0; i < 2000; ++i) {
    const double mu = rng.uniform(-0.5, 0.5);
    const double sigma = std::exp(rng.uniform(std::log(kSigmaMin), std::log(kSigmaMax)));
    const auto t = gaussian_to_freq(mu, sigma, window_half_width(sigma));
    std::uint64_t total = 0;
    for (auto f : t.frequencies()) {
      CHECK(f >= 1);
      total += f;
    }
    CHECK(total == kFreqTotal);
  }
  const auto flat = gaussian_to_freq(0.0, 256.0, 8);
  for (int s = 1; s < 17; ++s) {
    CHECK(std::abs(static_cast<int>(flat.freq(s)) - static_cast<int>(flat.freq(0))) <= 1);
  }
  const auto peak = gaussian_to_freq(0.0, kSigmaMin, window_half_width(kSigmaMin));
  CHECK(peak.freq(window_half_width(kSigmaMin)) > 65500);

  GaussianCode g = quantize_gaussian(0.0, 1.0);
  CHECK(gaussian_bits(0, g) == doctest::Approx(1.385).epsilon(1e-3));
  CHECK(gaussian_bits(0, quantize_gaussian(0.0, kSigmaMin)) < 1e-6);
  CHECK(gaussian_bits(1000, g) == doctest::Approx(16.0));
}

TEST_CASE("gaussian coding replays with the estimate as a lower bound") {
  Rng rng(10);
  for (int trial = 0; trial < 40; ++trial) {
    GaussianCoder coder;
    RangeEncoder enc;
    const int n = 3000;
    std::vector<GaussianCode> params(n);
    std::vector<std::int32_t> vals(n);
    double est = 0.0;
    for (int i = 0; i < n; ++i) {
      const double mu = rng.uniform(-3, 3);
      const double sigma = std::exp(rng.uniform(std::log(0.05), std::log(trial % 2 ? 40.0 : 2.0)));
      params[i] = quantize_gaussian(mu, sigma);
      // Heavier tails than the model.
      const double x = mu + sigma * rng.normal() * (rng.uniform() < 0.02 ? 6.0 : 1.0);
      vals[i] = static_cast<std::int32_t>(std::round(x));
      est += gaussian_bits(vals[i], params[i]);
      coder.encode(enc, vals[i], params[i]);
    }
    const auto bytes = enc.finish();
    const double actual = bytes.size() * 8.0;
    CHECK(actual >= est - 1.0);
    CHECK(actual <= est * 1.02 + 64);
    GaussianCoder dcoder;
    RangeDecoder dec(bytes);
    bool ok = true;
    for (int i = 0; i < n; ++i) ok = ok && dcoder.decode(dec, params[i]) == vals[i];
    CHECK(ok);
  }
}

TEST_CASE("corrupt streams are detected or decode to something") {
  const auto t = FreqTable::from_pmf({0.5, 0.5});
  std::vector<std::uint8_t> junk(16, 0xFF);
  RangeDecoder dec(junk);
  CHECK_THROWS_AS(dec.decode(t), DecodeError);
}
