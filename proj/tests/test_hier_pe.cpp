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
#include <random>

#include "inrvc/errors.hpp"
#include "inrvc/hier_pe.hpp"

using namespace inrvc;

namespace {

// Brute-force mixed-radix digits: count upwards with carries.
std::vector<Index> count_digits(Index pos, const std::vector<int>& bases) {
  std::vector<Index> d(bases.size(), 0);
  for (Index p = 0; p < pos; ++p) {
    for (int i = static_cast<int>(bases.size()) - 1; i >= 0; --i) {
      if (++d[i] < bases[i]) break;
      d[i] = 0;
    }
  }
  return d;
}

}  // namespace

TEST_CASE("decompose matches a counting oracle") {
  CHECK(decompose(0, {2, 2, 2}) == std::vector<Index>{0, 0, 0});
  CHECK(decompose(5, {2, 2, 2}) == std::vector<Index>{1, 0, 1});
  CHECK(decompose(7, {4, 2}) == std::vector<Index>{3, 1});
  for (const std::vector<int>& b : {std::vector<int>{2, 2, 2}, {4, 2}, {3, 1, 5}, {2, 3, 4}}) {
    Index total = 1;
    for (int x : b) total *= x;
    for (Index p = 0; p < total; ++p) {
      const auto d = decompose(p, b);
      CHECK(d == count_digits(p, b));
      CHECK(recompose(d, b) == p);
    }
    CHECK_THROWS_AS(decompose(total, b), CoordError);
    CHECK_THROWS_AS(decompose(-1, b), CoordError);
  }
}

TEST_CASE("solve_weights") {
  const auto w = solve_weights(3, 8.0);
  CHECK(w[0] == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(w[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(w[2] == 1.0);
  CHECK(solve_weights(1, 3.0) == std::vector<double>{3.0});
  for (int L = 1; L <= 6; ++L) {
    for (double x : solve_weights(L, 1.0)) CHECK(x == 1.0);
    const auto u = solve_weights(L, 8.0, WeightPolicy::kUniform);
    double prod = 1.0;
    for (double x : u) prod *= x;
    CHECK(prod == doctest::Approx(8.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(solve_weights(2, 0.5), ParamError);
  CHECK_THROWS_AS(solve_weights(0, 2.0), ParamError);
  const auto v = solve_weights(2, 4.0);
  CHECK(v[0] > v[1]);
}

TEST_CASE("decompose_scaled") {
  const auto s1 = make_schedule({2, 3, 4}, 1.0);
  for (Index p = 0; p < 24; ++p) {
    const auto d = decompose(p, s1.bases);
    const auto r = decompose_scaled(static_cast<double>(p), s1);
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(r[i] == static_cast<double>(d[i]));
  }
  const auto s = make_schedule({2, 2}, 4.0);
  CHECK(s.weights[0] == doctest::Approx(4.0));
  const auto d = decompose_scaled(9.0, s);
  CHECK(d[0] == 4.0);
  CHECK(d[1] == 1.0);
  CHECK(recompose_scaled(d, s) == doctest::Approx(9.0).epsilon(1e-9));
  for (int p = 0; p < 16; ++p) {
    CHECK(recompose_scaled(decompose_scaled(p, s), s) == doctest::Approx(p).epsilon(1e-9));
  }
  const auto z = decompose_scaled(0.0, make_schedule({2, 2, 2}, 2.0));
  for (double x : z) CHECK(x == 0.0);
  CHECK_THROWS_AS(decompose_scaled(16.0, s), CoordError);
  const auto odd = make_schedule({2, 2, 2}, 2.0);
  for (int p = 0; p < 16; ++p) {
    const auto r = decompose_scaled(p, odd);
    for (int i = 0; i < 3; ++i) {
      CHECK(r[i] >= 0.0);
      CHECK(r[i] < odd.weights[i] * odd.bases[i]);
    }
  }
}

TEST_CASE("query_latent") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<float> u(-1, 1);
  ArrayX<float> v(4 * 3 * 3);
  for (Index i = 0; i < v.size(); ++i) v(i) = u(rng);
  TensorF grid({4, 3, 3}, v);
  auto q = query_latent(grid, {{1, 2}});
  CHECK(q.gamma.shape() == Shape{2, 1});
  CHECK(q.gamma.at(0) == grid.at(5));
  CHECK(q.gamma.at(1) == grid.at(9 + 5));
  CHECK(q.beta.at(0) == grid.at(18 + 5));
  auto c = query_latent(TensorF::constant({2, 3, 3}, 0.25f), {{0.3, 1.7}, {2, 0.5}});
  for (Index i = 0; i < 2; ++i) CHECK(c.gamma.at(i) == doctest::Approx(0.25f));
  auto mid = query_latent(grid, {{0.5, 0.5}});
  const float want = 0.25f * (grid.at(0) + grid.at(1) + grid.at(3) + grid.at(4));
  CHECK(mid.gamma.at(0) == doctest::Approx(want).epsilon(1e-6));
  CHECK_THROWS_AS(query_latent(grid, {{2.5, 0}}), CoordError);
}
