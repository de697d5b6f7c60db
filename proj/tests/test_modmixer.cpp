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

#include "gradcheck.hpp"
#include "inrvc/modmixer.hpp"

using namespace inrvc;
using inrvc::testing::uniform;

namespace {

double rel_err(const ArrayX<double>& a, const ArrayX<double>& b) {
  const double d = std::max({a.matrix().norm(), b.matrix().norm(), 1e-30});
  return (a - b).matrix().norm() / d;
}

// Dense evaluation of the expanded layer on one token, written directly from
// the branch definition with Eigen matrices.
Eigen::VectorXd oracle(const ExpandedLinear<double>& lin, const Eigen::VectorXd& h) {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(lin.out_features());
  for (const auto& br : lin.branches()) {
    Eigen::VectorXd z = h;
    for (const auto& f : br.factors) {
      z = ConstMapRM<double>(f.data(), f.dim(0), f.dim(1)) * z;
    }
    for (Index o = 0; o < lin.out_features(); ++o) {
      y(o) += br.gamma_w.at(o) * z(o) + br.beta_w.at(o) * h.sum() +
              br.gamma_b.at(o) * br.bias.at(o) + br.beta_b.at(o);
    }
  }
  return y;
}

void randomize(ExpandedLinear<double>& lin, Rng& rng) {
  for (auto& br : lin.branches()) {
    for (auto* t : {&br.bias, &br.gamma_w, &br.beta_w, &br.gamma_b, &br.beta_b}) {
      auto& v = t->mutable_value();
      for (Index i = 0; i < v.size(); ++i) v(i) = rng.uniform(-1, 1);
    }
  }
}

}  // namespace

TEST_CASE("contraction matches branch-by-branch evaluation") {
  Rng rng(11);
  for (int t = 0; t < 30; ++t) {
    const Index in = 1 + rng.below(32), out = 1 + rng.below(32);
    const int m = 1 + static_cast<int>(rng.below(3));
    ExpandedLinear<double> lin(in, out, m, rng);
    randomize(lin, rng);
    const ContractedLinear<double> c = contract(lin);
    for (int k = 0; k < 5; ++k) {
      Eigen::VectorXd h(in);
      for (Index i = 0; i < in; ++i) h(i) = rng.uniform(-1, 1);
      const Eigen::VectorXd want = oracle(lin, h);
      ArrayX<double> ha = h.array();
      TensorD ht(Shape{1, in, 1, 1}, ha);
      CHECK(rel_err(c.forward(ht).value(), want.array()) < 1e-10);
      CHECK(rel_err(lin.forward_expanded(ht).value(), want.array()) < 1e-10);
    }
  }
}

TEST_CASE("contraction examples") {
  Rng rng(1);
  ExpandedLinear<double> one(3, 3, 1, rng);
  auto& b = one.branches()[0];
  b.gamma_w.mutable_value().setOnes();
  b.gamma_b.mutable_value().setOnes();
  b.bias.mutable_value() << 0.1, 0.2, 0.3;
  const auto c = contract(one);
  CHECK((c.weight.value() - b.factors[0].value()).abs().maxCoeff() == 0.0);
  CHECK((c.bias.value() - b.bias.value()).abs().maxCoeff() == 0.0);

  ExpandedLinear<double> two(2, 2, 2, rng);
  for (auto& br : two.branches()) {
    br.factors.resize(1);
    br.factors[0].mutable_value() << 1, 0, 0, 1;
    br.gamma_w.mutable_value().setConstant(0.5);
  }
  two.branches()[1].factors = {two.branches()[1].factors[0]};
  const auto c2 = contract(two);
  CHECK(c2.weight.value().isApprox(ArrayX<double>((ArrayX<double>(4) << 1, 0, 0, 1).finished())));
  CHECK(c2.bias.value().abs().maxCoeff() == 0.0);
}

TEST_CASE("block with mask zero is a doubled linear layer") {
  Rng rng(2);
  std::mt19937 mt(2);
  ModMixerBlock<double> block(4, 4, 1, 4, rng);
  auto& br = block.linear().branches()[0];
  br.factors[0].mutable_value().setZero();
  for (int i = 0; i < 4; ++i) br.factors[0].mutable_value()(i * 4 + i) = 1;
  br.gamma_w.mutable_value().setOnes();
  br.gamma_b.mutable_value().setOnes();
  block.set_mask(0.0);
  const TensorD h = uniform({2, 4, 3, 3}, mt, -1, 1, false);
  CHECK((block.forward_expanded(h).value() - 2.0 * h.value()).abs().maxCoeff() < 1e-12);

  ModMixerBlock<double> rb(5, 3, 3, 4, rng);
  rb.set_mask(0.0);
  const auto c = contract(rb);
  const TensorD g = uniform({1, 5, 4, 4}, mt, -1, 1, false);
  CHECK(rel_err(rb.forward_expanded(g).value(), c.forward(g).value()) < 1e-10);
}

TEST_CASE("residual consolidation is linear") {
  Rng rng(3);
  ExpandedLinear<double> lin(6, 5, 3, rng);
  randomize(lin, rng);
  const FrozenLinear<double> frozen = freeze(lin);
  LinearResidual<double> r = LinearResidual<double>::zeros(lin);
  const auto base = contract(lin);
  auto same = frozen.consolidate(r);
  CHECK((same.weight.value() - base.weight.value()).abs().maxCoeff() == 0.0);
  CHECK((same.bias.value() - base.bias.value()).abs().maxCoeff() == 0.0);

  r.d_beta_b[1].mutable_value().setConstant(0.25);
  auto bonly = frozen.consolidate(r);
  CHECK(((bonly.bias.value() - base.bias.value()) - 0.25).abs().maxCoeff() < 1e-15);

  for (auto& p : r.params()) {
    auto& v = p.tensor.mutable_value();
    for (Index i = 0; i < v.size(); ++i) v(i) = rng.uniform(-0.5, 0.5);
  }
  const auto a = frozen.consolidate(r);
  const auto b = contract(with_residual(lin, r));
  CHECK(rel_err(a.weight.value(), b.weight.value()) < 1e-12);
  CHECK(rel_err(a.bias.value(), b.bias.value()) < 1e-12);
}

TEST_CASE("mask decay") {
  CHECK(decay_mask(0, 100) == 1.0);
  CHECK(decay_mask(100, 100) == 0.0);
  CHECK(decay_mask(250, 100) == 0.0);
  CHECK(decay_mask(50, 100) == doctest::Approx(0.5).epsilon(1e-12));
  double prev = 1.0;
  for (int s = 0; s <= 120; ++s) {
    const double m = decay_mask(s, 100);
    CHECK(m <= prev);
    prev = m;
  }
}

TEST_CASE("token mixer gradients") {
  Rng rng(4);
  std::mt19937 mt(4);
  for (int t = 0; t < 5; ++t) {
    ModMixerBlock<double> block(3, 4, 2, 2, rng);
    block.set_mask(0.6);
    std::vector<TensorD> in{uniform({1, 3, 4, 2}, mt)};
    for (const auto& p : block.params()) in.push_back(p.tensor);
    auto f = [&](const std::vector<TensorD>& v) { return block.forward(v[0]); };
    CHECK(inrvc::testing::grad_check(in, f, mt) < 1e-3);
  }
}
