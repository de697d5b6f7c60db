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


// Adaptive-moment optimiser over parameter groups, and the cosine schedule.

#ifndef INRVC_OPTIM_HPP_
#define INRVC_OPTIM_HPP_

#include <vector>

#include "inrvc/nn.hpp"

namespace inrvc {

template <typename S>
class Adam {
 public:
  explicit Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void add(const ParamList<S>& params, double lr);
  // One update of every parameter from its accumulated gradient (absent
  // gradients count as zero), learning rates multiplied by lr_scale. Clears
  // the gradients.
  void step(double lr_scale = 1.0);
  void zero_grad();
  // False if any accumulated gradient is non-finite.
  bool gradients_finite() const;
  // Rescales all gradients so their joint L2 norm is at most max_norm.
  // Returns the norm before rescaling.
  double clip_grad_norm(double max_norm);
  void set_lr_factor(double f) { factor_ = f; }
  long steps() const { return t_; }

 private:
  struct Slot {
    Tensor<S> tensor;
    double lr;
    ArrayX<double> m, v;
  };
  double beta1_, beta2_, eps_;
  double factor_ = 1.0;
  long t_ = 0;
  std::vector<Slot> slots_;
};

// 0.5 (1 + cos(pi step / steps)), reaching 0 at step == steps.
double cosine_lr(long step, long steps);

}  // namespace inrvc

#endif  // INRVC_OPTIM_HPP_
