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


#include "inrvc/hier_pe.hpp"

#include <cmath>
#include <string>

#include "inrvc/errors.hpp"

namespace inrvc {

Index BaseSchedule::total() const {
  Index t = 1;
  for (int b : bases) t *= b;
  return t;
}

double BaseSchedule::scaled_total() const {
  double t = 1.0;
  for (std::size_t i = 0; i < bases.size(); ++i) t *= weights[i] * bases[i];
  return t;
}

std::vector<double> solve_weights(int levels, double k, WeightPolicy policy) {
  if (levels < 1) throw ParamError("level count must be at least 1");
  if (!(k >= 1.0)) throw ParamError("scale ratio must be >= 1, got " + std::to_string(k));
  std::vector<double> w(levels, 1.0);
  if (levels == 1) {
    w[0] = k;
    return w;
  }
  const double lk = std::log(k);
  if (policy == WeightPolicy::kUniform) {
    for (double& x : w) x = std::exp(lk / levels);
    return w;
  }
  const double L = levels;
  for (int i = 0; i < levels; ++i) {
    w[i] = std::exp(2.0 * (L - 1 - i) * lk / (L * (L - 1)));
  }
  return w;
}

BaseSchedule make_schedule(std::vector<int> bases, double k, WeightPolicy policy) {
  for (int b : bases) {
    if (b < 1) throw ParamError("bases must be positive");
  }
  BaseSchedule s;
  s.weights = solve_weights(static_cast<int>(bases.size()), k, policy);
  s.bases = std::move(bases);
  s.scale_ratio = k;
  return s;
}

std::vector<Index> decompose(Index pos, const std::vector<int>& bases) {
  Index total = 1;
  for (int b : bases) total *= b;
  if (pos < 0 || pos >= total) {
    throw CoordError("position " + std::to_string(pos) + " outside [0, " +
                     std::to_string(total) + ")");
  }
  std::vector<Index> digits(bases.size());
  Index stride = 1;
  for (int i = static_cast<int>(bases.size()) - 1; i >= 0; --i) {
    digits[i] = (pos / stride) % bases[i];
    stride *= bases[i];
  }
  return digits;
}

Index recompose(const std::vector<Index>& digits, const std::vector<int>& bases) {
  Index pos = 0, stride = 1;
  for (int i = static_cast<int>(bases.size()) - 1; i >= 0; --i) {
    pos += digits[i] * stride;
    stride *= bases[i];
  }
  return pos;
}

std::vector<double> decompose_scaled(double pos, const BaseSchedule& sched) {
  const double total = sched.scaled_total();
  if (!(pos >= 0.0 && pos < total)) {
    throw CoordError("position " + std::to_string(pos) + " outside [0, " +
                     std::to_string(total) + ")");
  }
  std::vector<double> digits(sched.bases.size());
  double stride = 1.0;
  for (int i = sched.levels() - 1; i >= 0; --i) {
    const double base = sched.weights[i] * sched.bases[i];
    digits[i] = std::fmod(std::floor(pos / stride), base);
    stride *= base;
  }
  return digits;
}

double recompose_scaled(const std::vector<double>& digits, const BaseSchedule& sched) {
  double pos = 0.0, stride = 1.0;
  for (int i = sched.levels() - 1; i >= 0; --i) {
    pos += digits[i] * stride;
    stride *= sched.weights[i] * sched.bases[i];
  }
  return pos;
}

LatentQuery query_latent(const Tensor<float>& grid, const std::vector<GridCoord>& coords) {
  if (grid.rank() != 3 || grid.dim(0) % 2 != 0) {
    throw ShapeError("latent grid must be 2C x h x w, got " + to_string(grid.shape()));
  }
  const Index c = grid.dim(0) / 2;
  const Tensor<float> all = interp_bilinear(grid, coords);
  return {slice(all, 0, 0, c), slice(all, 0, c, 2 * c)};
}

}  // namespace inrvc
