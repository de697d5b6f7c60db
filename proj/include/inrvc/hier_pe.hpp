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


// Hierarchical mixed-radix positional encoding.
//
// Levels are indexed coarse to fine: entry 0 of every per-level vector is the
// coarsest level (decoder level L), the last entry the finest. The digit of
// level i has a stride equal to the product of all finer bases, so
// pos = sum_i digit_i * stride_i.

#ifndef INRVC_HIER_PE_HPP_
#define INRVC_HIER_PE_HPP_

#include <utility>
#include <vector>

#include "inrvc/ops.hpp"
#include "inrvc/tensor.hpp"

namespace inrvc {

enum class WeightPolicy {
  kLogEven,  // log w_i linearly spaced, finest weight 1
  kUniform,  // w_i = k^(1/L)
};

struct BaseSchedule {
  std::vector<int> bases;       // coarse to fine, all >= 1
  double scale_ratio = 1.0;     // k
  std::vector<double> weights;  // coarse to fine, product k

  int levels() const { return static_cast<int>(bases.size()); }
  Index total() const;            // product of bases
  double scaled_total() const;    // product of w_i * B_i
};

// Throws ParamError for L < 1 or k < 1.
std::vector<double> solve_weights(int levels, double k,
                                  WeightPolicy policy = WeightPolicy::kLogEven);

BaseSchedule make_schedule(std::vector<int> bases, double k,
                           WeightPolicy policy = WeightPolicy::kLogEven);

// Integer digits; throws CoordError unless 0 <= pos < total().
std::vector<Index> decompose(Index pos, const std::vector<int>& bases);
Index recompose(const std::vector<Index>& digits, const std::vector<int>& bases);

// Real digits under the rescaled bases w_i * B_i:
//   digit_i = floor(pos / prod_{j finer than i}(w_j B_j)) mod (w_i B_i).
// Throws CoordError unless 0 <= pos < scaled_total().
std::vector<double> decompose_scaled(double pos, const BaseSchedule& sched);
double recompose_scaled(const std::vector<double>& digits,
                        const BaseSchedule& sched);

struct LatentQuery {
  Tensor<float> gamma;  // [C, P]
  Tensor<float> beta;   // [C, P]
};

// Samples a level grid holding gamma || beta along channels (2C x h x w) at
// local (row, col) positions. Throws CoordError outside the grid.
LatentQuery query_latent(const Tensor<float>& grid,
                         const std::vector<GridCoord>& coords);

}  // namespace inrvc

#endif  // INRVC_HIER_PE_HPP_
