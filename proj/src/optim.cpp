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


#include "inrvc/optim.hpp"

#include <algorithm>
#include <cmath>

namespace inrvc {

template <typename S>
void Adam<S>::add(const ParamList<S>& params, double lr) {
  for (const auto& p : params) {
    const Index n = p.tensor.numel();
    slots_.push_back({p.tensor, lr, ArrayX<double>::Zero(n), ArrayX<double>::Zero(n)});
  }
}

template <typename S>
void Adam<S>::step(double lr_scale) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, double(t_));
  const double c2 = 1.0 - std::pow(beta2_, double(t_));
  for (auto& s : slots_) {
    const ArrayX<double> g = s.tensor.grad().template cast<double>();
    s.m = beta1_ * s.m + (1.0 - beta1_) * g;
    s.v = beta2_ * s.v + (1.0 - beta2_) * g.square();
    const double lr = s.lr * lr_scale * factor_;
    auto& val = s.tensor.mutable_value();
    val -= ((lr / c1) * s.m / ((s.v / c2).sqrt() + eps_)).template cast<S>();
    s.tensor.zero_grad();
  }
}

template <typename S>
void Adam<S>::zero_grad() {
  for (auto& s : slots_) s.tensor.zero_grad();
}

template <typename S>
bool Adam<S>::gradients_finite() const {
  return std::all_of(slots_.begin(), slots_.end(),
                     [](const Slot& s) { return s.tensor.grad().isFinite().all(); });
}

template <typename S>
double Adam<S>::clip_grad_norm(double max_norm) {
  double sq = 0.0;
  for (const auto& s : slots_) {
    const auto& g = s.tensor.node()->grad;
    if (g.size()) sq += g.template cast<double>().square().sum();
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && std::isfinite(norm)) {
    const S f = S(max_norm / norm);
    for (auto& s : slots_) {
      auto& g = s.tensor.node()->grad;
      if (g.size()) g *= f;
    }
  }
  return norm;
}

double cosine_lr(long step, long steps) {
  if (steps <= 0 || step >= steps) return 0.0;
  return 0.5 * (1.0 + std::cos(M_PI * double(step) / double(steps)));
}

template class Adam<float>;
template class Adam<double>;

}  // namespace inrvc
