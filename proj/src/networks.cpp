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


#include "inrvc/networks.hpp"

#include <string>

#include "inrvc/errors.hpp"

namespace inrvc {

namespace {

template <typename S>
Tensor<S> centred(const Tensor<S>& x) {
  return x + S(-0.5);
}

}  // namespace

template <typename S>
MotionEstimator<S>::MotionEstimator(const MotionConfig& config, Rng& rng) : config_(config) {
  if (config.levels < 1 || config.width < 1) throw ParamError("bad motion configuration");
  const Index w = config.width;
  for (int j = 0; j < config.levels; ++j) {
    std::vector<Conv2d<S>> r;
    r.emplace_back(3 + 3 + 2, w, 3, 1, rng);
    for (int k = 0; k < 3; ++k) r.emplace_back(w, w, 3, 1, rng);
    r.emplace_back(w, 2, 3, 1, rng, 0.1);
    refiners_.push_back(std::move(r));
  }
}

template <typename S>
MotionPyramid<S> MotionEstimator<S>::forward(const Tensor<S>& x, const Tensor<S>& ref) const {
  if (x.shape() != ref.shape() || x.rank() != 4 || x.dim(1) != 3) {
    throw ShapeError("motion inputs " + to_string(x.shape()) + " and " + to_string(ref.shape()));
  }
  const int L = config_.levels;
  const Index div = Index{1} << (L - 1);
  if (x.dim(2) % div || x.dim(3) % div) {
    throw ShapeError("motion input " + to_string(x.shape()) + " not divisible by " +
                     std::to_string(div));
  }
  std::vector<Tensor<S>> xs{x}, rs{ref};
  for (int j = 1; j < L; ++j) {
    xs.push_back(avg_pool2(xs.back()));
    rs.push_back(avg_pool2(rs.back()));
  }
  MotionPyramid<S> out;
  out.flow.resize(L);
  out.features.resize(L);
  Tensor<S> flow = Tensor<S>::zeros({1, 2, xs[L - 1].dim(2), xs[L - 1].dim(3)});
  for (int j = L - 1; j >= 0; --j) {
    Tensor<S> h = concat<S>({centred(xs[j]), centred(warp_bilinear(rs[j], flow)), flow}, 1);
    const auto& r = refiners_[j];
    for (std::size_t k = 0; k + 1 < r.size(); ++k) h = relu(r[k](h));
    flow = flow + r.back()(h);
    out.flow[j] = flow;
    out.features[j] = concat<S>({flow, centred(warp_bilinear(rs[j], flow))}, 1);
    if (j > 0) flow = upsample_bilinear2x(flow) * S(2);
  }
  return out;
}

template <typename S>
ParamList<S> MotionEstimator<S>::params() const {
  ParamList<S> out;
  for (std::size_t j = 0; j < refiners_.size(); ++j) {
    for (std::size_t k = 0; k < refiners_[j].size(); ++k) {
      append(out, "motion.l" + std::to_string(j) + ".c" + std::to_string(k) + ".",
             refiners_[j][k].params());
    }
  }
  return out;
}

template <typename S>
ImageEncoder<S>::ImageEncoder(const EncoderConfig& config, Rng& rng) : config_(config) {
  if (config.levels < 1 || config.width < 1 || config.latent_channels < 1) {
    throw ParamError("bad encoder configuration");
  }
  const Index w = config.width;
  for (int l = 0; l < config.levels; ++l) {
    down_.emplace_back(l == 0 ? 3 : w, w, 3, 2, rng);
    res_a_.emplace_back(w, w, 3, 1, rng);
    res_b_.emplace_back(w, w, 3, 1, rng, 0.3);
    heads_.emplace_back(w, 2 * config.latent_channels, 1, 1, rng, config.head_gain);
    mod_.emplace_back(2 * kMotionFeatures, 2 * w, 1, 1, rng, 0.1);
  }
}

template <typename S>
std::vector<Tensor<S>> ImageEncoder<S>::forward(const Tensor<S>& x,
                                                const std::vector<Tensor<S>>& motion) const {
  const int L = config_.levels;
  if (x.rank() != 4 || x.dim(0) != 1 || x.dim(1) != 3) {
    throw ShapeError("encoder input " + to_string(x.shape()));
  }
  const Index div = Index{1} << L;
  if (x.dim(2) % div || x.dim(3) % div) {
    throw ShapeError("encoder input " + to_string(x.shape()) + " not divisible by " +
                     std::to_string(div));
  }
  if (!motion.empty() && static_cast<int>(motion.size()) != L) {
    throw ShapeError("motion conditioning needs one map per level");
  }
  const Index w = config_.width;
  std::vector<Tensor<S>> out;
  Tensor<S> h = centred(x);
  for (int l = 0; l < L; ++l) {
    h = relu(down_[l](h));
    if (!motion.empty()) {
      const Tensor<S> ab = mod_[l](motion[l]);
      h = h * (slice(ab, 1, 0, w) + S(1)) + slice(ab, 1, w, 2 * w);
    }
    h = h + res_b_[l](relu(res_a_[l](h)));
    out.push_back(heads_[l](h));
  }
  return out;
}

template <typename S>
std::vector<Tensor<S>> ImageEncoder<S>::conditioning(const MotionPyramid<S>& m1,
                                                     const MotionPyramid<S>* m2, int levels) {
  if (static_cast<int>(m1.features.size()) < levels) {
    throw ShapeError("motion pyramid shallower than the encoder");
  }
  std::vector<Tensor<S>> out;
  for (int l = 0; l < levels; ++l) {
    const Tensor<S> a = avg_pool2(m1.features[l]);
    const Tensor<S> b = m2 ? avg_pool2(m2->features[l]) : Tensor<S>::zeros(a.shape());
    out.push_back(concat<S>({a, b}, 1));
  }
  return out;
}

template <typename S>
ParamList<S> ImageEncoder<S>::params() const {
  ParamList<S> out;
  for (int l = 0; l < config_.levels; ++l) {
    const std::string p = "enc.l" + std::to_string(l) + ".";
    append(out, p + "down.", down_[l].params());
    append(out, p + "res_a.", res_a_[l].params());
    append(out, p + "res_b.", res_b_[l].params());
    append(out, p + "head.", heads_[l].params());
    append(out, p + "mod.", mod_[l].params());
  }
  return out;
}

template class MotionEstimator<float>;
template class MotionEstimator<double>;
template class ImageEncoder<float>;
template class ImageEncoder<double>;

}  // namespace inrvc
