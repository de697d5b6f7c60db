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

#include "inrvc/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "inrvc/errors.hpp"

namespace inrvc {
namespace {

template <typename S>
using NodeT = detail::Node<S>;

template <typename S>
inline NodeT<S>* input(NodeT<S>& self, std::size_t i) {
  return self.inputs[i].get();
}

std::vector<Index> broadcast_strides(const Shape& in, const Shape& out) {
  std::vector<Index> st(out.size(), 0);
  Index s = 1;
  int od = static_cast<int>(out.size()) - 1;
  for (int d = static_cast<int>(in.size()) - 1; d >= 0; --d, --od) {
    st[od] = in[d] == 1 ? 0 : s;
    s *= in[d];
  }
  return st;
}

// Calls f(out_offset, a_offset, b_offset) for every element of `out`.
template <typename F>
void broadcast_loop(const Shape& out, const std::vector<Index>& sa,
                    const std::vector<Index>& sb, F&& f) {
  const Index n = numel(out);
  if (n == 0) return;
  const std::size_t r = out.size();
  if (r == 0) {
    f(0, 0, 0);
    return;
  }
  std::vector<Index> idx(r, 0);
  const Index inner = out[r - 1];
  const Index sa_in = sa[r - 1], sb_in = sb[r - 1];
  Index ia = 0, ib = 0;
  for (Index i = 0; i < n; i += inner) {
    Index pa = ia, pb = ib;
    for (Index j = 0; j < inner; ++j, pa += sa_in, pb += sb_in) {
      f(i + j, pa, pb);
    }
    for (int d = static_cast<int>(r) - 2; d >= 0; --d) {
      ++idx[d];
      ia += sa[d];
      ib += sb[d];
      if (idx[d] < out[d]) break;
      ia -= sa[d] * out[d];
      ib -= sb[d] * out[d];
      idx[d] = 0;
    }
  }
}

void require_rank(const Shape& s, std::size_t r, const char* what) {
  if (s.size() != r) {
    throw ShapeError(std::string(what) + " expects rank " + std::to_string(r) +
                     ", got " + to_string(s));
  }
}

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

inline double upper_tail(double z) { return 0.5 * std::erfc(z * kInvSqrt2); }
inline double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

struct BinMass {
  double p;        // Phi(b) - Phi(a)
  double dlog_da;  // d log p / d a
  double dlog_db;  // d log p / d b
};

// Mass of [a, b] under N(0,1) evaluated on whichever tail keeps precision,
// with log-derivatives that stay informative when the mass underflows.
BinMass bin_mass(double a, double b) {
  bool mirrored = false;
  if (b < 0.0) {
    const double t = a;
    a = -b;
    b = -t;
    mirrored = true;
  }
  BinMass m{};
  if (a > 0.0) {
    m.p = upper_tail(a) - upper_tail(b);
    if (m.p > 1e-280) {
      m.dlog_da = -normal_pdf(a) / m.p;
      m.dlog_db = normal_pdf(b) / m.p;
    } else {
      m.dlog_da = -(a + 1.0 / a);
      m.dlog_db = 0.0;
    }
  } else {
    m.p = 1.0 - upper_tail(-a) - upper_tail(b);
    const double p = std::max(m.p, 1e-300);
    m.dlog_da = -normal_pdf(a) / p;
    m.dlog_db = normal_pdf(b) / p;
  }
  if (mirrored) {
    const double t = m.dlog_da;
    m.dlog_da = -m.dlog_db;
    m.dlog_db = -t;
  }
  return m;
}

}  // namespace

Shape broadcast_shape(const Shape& a, const Shape& b) {
  const std::size_t r = std::max(a.size(), b.size());
  Shape out(r, 1);
  for (std::size_t i = 0; i < r; ++i) {
    const Index ea = i < r - a.size() ? 1 : a[i - (r - a.size())];
    const Index eb = i < r - b.size() ? 1 : b[i - (r - b.size())];
    if (ea != eb && ea != 1 && eb != 1) {
      throw ShapeError("cannot broadcast " + to_string(a) + " with " +
                       to_string(b));
    }
    out[i] = ea == 1 ? eb : ea;
  }
  return out;
}

template <typename S>
Tensor<S> elementwise(BinaryOp op, const Tensor<S>& a, const Tensor<S>& b) {
  using Array = ArrayX<S>;
  const Shape out_shape = broadcast_shape(a.shape(), b.shape());
  const bool same = a.shape() == b.shape();
  const auto& av = a.value();
  const auto& bv = b.value();
  Array out;
  std::vector<Index> sa, sb;
  if (same) {
    switch (op) {
      case BinaryOp::kAdd: out = av + bv; break;
      case BinaryOp::kSub: out = av - bv; break;
      case BinaryOp::kMul: out = av * bv; break;
      case BinaryOp::kDiv: out = av / bv; break;
    }
  } else {
    sa = broadcast_strides(a.shape(), out_shape);
    sb = broadcast_strides(b.shape(), out_shape);
    out.resize(numel(out_shape));
    const S* pa = av.data();
    const S* pb = bv.data();
    S* po = out.data();
    switch (op) {
      case BinaryOp::kAdd:
        broadcast_loop(out_shape, sa, sb, [&](Index i, Index x, Index y) { po[i] = pa[x] + pb[y]; });
        break;
      case BinaryOp::kSub:
        broadcast_loop(out_shape, sa, sb, [&](Index i, Index x, Index y) { po[i] = pa[x] - pb[y]; });
        break;
      case BinaryOp::kMul:
        broadcast_loop(out_shape, sa, sb, [&](Index i, Index x, Index y) { po[i] = pa[x] * pb[y]; });
        break;
      case BinaryOp::kDiv:
        broadcast_loop(out_shape, sa, sb, [&](Index i, Index x, Index y) { po[i] = pa[x] / pb[y]; });
        break;
    }
  }
  auto res = Tensor<S>::result(out_shape, std::move(out), {a, b}, "binary");
  if (res.requires_grad()) {
    res.set_backward([op, same, out_shape, sa, sb](NodeT<S>& self) {
      NodeT<S>* na = input(self, 0);
      NodeT<S>* nb = input(self, 1);
      const Array& g = self.grad;
      if (same) {
        if (na->requires_grad) {
          auto& ga = na->grad_buffer();
          switch (op) {
            case BinaryOp::kAdd:
            case BinaryOp::kSub: ga += g; break;
            case BinaryOp::kMul: ga += g * nb->value; break;
            case BinaryOp::kDiv: ga += g / nb->value; break;
          }
        }
        if (nb->requires_grad) {
          auto& gb = nb->grad_buffer();
          switch (op) {
            case BinaryOp::kAdd: gb += g; break;
            case BinaryOp::kSub: gb -= g; break;
            case BinaryOp::kMul: gb += g * na->value; break;
            case BinaryOp::kDiv:
              gb -= g * na->value / (nb->value * nb->value);
              break;
          }
        }
        return;
      }
      const S* pa = na->value.data();
      const S* pb = nb->value.data();
      const S* pg = g.data();
      if (na->requires_grad) {
        S* ga = na->grad_buffer().data();
        switch (op) {
          case BinaryOp::kAdd:
          case BinaryOp::kSub:
            broadcast_loop(out_shape, sa, sb, [&](Index i, Index x, Index) { ga[x] += pg[i]; });
            break;
          case BinaryOp::kMul:
            broadcast_loop(out_shape, sa, sb, [&](Index i, Index x, Index y) { ga[x] += pg[i] * pb[y]; });
            break;
          case BinaryOp::kDiv:
            broadcast_loop(out_shape, sa, sb, [&](Index i, Index x, Index y) { ga[x] += pg[i] / pb[y]; });
            break;
        }
      }
      if (nb->requires_grad) {
        S* gb = nb->grad_buffer().data();
        switch (op) {
          case BinaryOp::kAdd:
            broadcast_loop(out_shape, sa, sb, [&](Index i, Index, Index y) { gb[y] += pg[i]; });
            break;
          case BinaryOp::kSub:
            broadcast_loop(out_shape, sa, sb, [&](Index i, Index, Index y) { gb[y] -= pg[i]; });
            break;
          case BinaryOp::kMul:
            broadcast_loop(out_shape, sa, sb, [&](Index i, Index x, Index y) { gb[y] += pg[i] * pa[x]; });
            break;
          case BinaryOp::kDiv:
            broadcast_loop(out_shape, sa, sb, [&](Index i, Index x, Index y) {
              gb[y] -= pg[i] * pa[x] / (pb[y] * pb[y]);
            });
            break;
        }
      }
    });
  }
  return res;
}

template <typename S>
Tensor<S> elementwise(UnaryOp op, const Tensor<S>& a) {
  using Array = ArrayX<S>;
  const Array& x = a.value();
  Array y;
  switch (op) {
    case UnaryOp::kNeg: y = -x; break;
    case UnaryOp::kRelu: y = x.max(S(0)); break;
    case UnaryOp::kExp: y = x.exp(); break;
    case UnaryOp::kLog: y = x.log(); break;
    case UnaryOp::kSigmoid: y = S(1) / (S(1) + (-x).exp()); break;
    case UnaryOp::kTanh: y = x.tanh(); break;
    case UnaryOp::kSoftplus:
      y = (S(1) + (-x.abs()).exp()).log() + x.max(S(0));
      break;
    case UnaryOp::kSquare: y = x * x; break;
    case UnaryOp::kSqrt: y = x.sqrt(); break;
    case UnaryOp::kAbs: y = x.abs(); break;
  }
  auto res = Tensor<S>::result(a.shape(), std::move(y), {a}, "unary");
  if (res.requires_grad()) {
    res.set_backward([op](NodeT<S>& self) {
      NodeT<S>* na = input(self, 0);
      if (!na->requires_grad) return;
      const Array& g = self.grad;
      const Array& x = na->value;
      const Array& y = self.value;
      auto& ga = na->grad_buffer();
      switch (op) {
        case UnaryOp::kNeg: ga -= g; break;
        case UnaryOp::kRelu: ga += (x > S(0)).select(g, S(0)); break;
        case UnaryOp::kExp: ga += g * y; break;
        case UnaryOp::kLog: ga += g / x; break;
        case UnaryOp::kSigmoid: ga += g * y * (S(1) - y); break;
        case UnaryOp::kTanh: ga += g * (S(1) - y * y); break;
        case UnaryOp::kSoftplus: ga += g / (S(1) + (-x).exp()); break;
        case UnaryOp::kSquare: ga += S(2) * g * x; break;
        case UnaryOp::kSqrt: ga += g / (S(2) * y); break;
        case UnaryOp::kAbs: ga += g * x.sign(); break;
      }
    });
  }
  return res;
}

template <typename S>
Tensor<S> affine(const Tensor<S>& a, S scale, S shift) {
  ArrayX<S> y = a.value() * scale + shift;
  auto res = Tensor<S>::result(a.shape(), std::move(y), {a}, "affine");
  if (res.requires_grad()) {
    res.set_backward([scale](NodeT<S>& self) {
      NodeT<S>* na = input(self, 0);
      if (na->requires_grad) na->grad_buffer() += self.grad * scale;
    });
  }
  return res;
}

template <typename S>
Tensor<S> clamp(const Tensor<S>& a, S lo, S hi) {
  ArrayX<S> y = a.value().max(lo).min(hi);
  auto res = Tensor<S>::result(a.shape(), std::move(y), {a}, "clamp");
  if (res.requires_grad()) {
    res.set_backward([lo, hi](NodeT<S>& self) {
      NodeT<S>* na = input(self, 0);
      if (!na->requires_grad) return;
      const auto& x = na->value;
      na->grad_buffer() += (x > lo && x < hi).select(self.grad, S(0));
    });
  }
  return res;
}

template <typename S>
Tensor<S> sum(const Tensor<S>& a) {
  ArrayX<S> y = ArrayX<S>::Constant(1, a.value().sum());
  auto res = Tensor<S>::result(Shape{}, std::move(y), {a}, "sum");
  if (res.requires_grad()) {
    res.set_backward([](NodeT<S>& self) {
      NodeT<S>* na = input(self, 0);
      if (na->requires_grad) na->grad_buffer() += self.grad(0);
    });
  }
  return res;
}

template <typename S>
Tensor<S> mean(const Tensor<S>& a) {
  const S inv = S(1) / static_cast<S>(std::max<Index>(a.numel(), 1));
  return sum(a) * inv;
}

template <typename S>
Tensor<S> sum_to(const Tensor<S>& a, const Shape& target) {
  if (broadcast_shape(target, a.shape()) != a.shape()) {
    throw ShapeError("sum_to: " + to_string(target) + " does not broadcast to " +
                     to_string(a.shape()));
  }
  const Shape src = a.shape();
  const auto st = broadcast_strides(target, src);
  const std::vector<Index> unit(src.size(), 0);
  ArrayX<S> y = ArrayX<S>::Zero(numel(target));
  const S* pa = a.data();
  S* py = y.data();
  broadcast_loop(src, st, unit, [&](Index i, Index t, Index) { py[t] += pa[i]; });
  auto res = Tensor<S>::result(target, std::move(y), {a}, "sum_to");
  if (res.requires_grad()) {
    res.set_backward([src, st, unit](NodeT<S>& self) {
      NodeT<S>* na = input(self, 0);
      if (!na->requires_grad) return;
      S* ga = na->grad_buffer().data();
      const S* pg = self.grad.data();
      broadcast_loop(src, st, unit, [&](Index i, Index t, Index) { ga[i] += pg[t]; });
    });
  }
  return res;
}

template <typename S>
Tensor<S> reshape(const Tensor<S>& a, const Shape& shape) {
  if (numel(shape) != a.numel()) {
    throw ShapeError("reshape " + to_string(a.shape()) + " -> " + to_string(shape));
  }
  auto res = Tensor<S>::result(shape, a.value(), {a}, "reshape");
  if (res.requires_grad()) {
    res.set_backward([](NodeT<S>& self) {
      NodeT<S>* na = input(self, 0);
      if (na->requires_grad) na->grad_buffer() += self.grad;
    });
  }
  return res;
}

template <typename S>
Tensor<S> permute(const Tensor<S>& a, const std::vector<int>& perm) {
  const Shape& in = a.shape();
  const std::size_t r = in.size();
  if (perm.size() != r) throw ShapeError("permute: rank mismatch");
  Shape out(r);
  std::vector<Index> in_strides(r, 1);
  for (int d = static_cast<int>(r) - 2; d >= 0; --d) {
    in_strides[d] = in_strides[d + 1] * in[d + 1];
  }
  std::vector<Index> st(r);
  std::vector<bool> used(r, false);
  for (std::size_t i = 0; i < r; ++i) {
    if (perm[i] < 0 || perm[i] >= static_cast<int>(r) || used[perm[i]]) {
      throw ShapeError("permute: invalid permutation");
    }
    used[perm[i]] = true;
    out[i] = in[perm[i]];
    st[i] = in_strides[perm[i]];
  }
  const std::vector<Index> unit(r, 0);
  ArrayX<S> y(a.numel());
  const S* pa = a.data();
  S* py = y.data();
  broadcast_loop(out, st, unit, [&](Index i, Index s, Index) { py[i] = pa[s]; });
  auto res = Tensor<S>::result(out, std::move(y), {a}, "permute");
  if (res.requires_grad()) {
    res.set_backward([out, st, unit](NodeT<S>& self) {
      NodeT<S>* na = input(self, 0);
      if (!na->requires_grad) return;
      S* ga = na->grad_buffer().data();
      const S* pg = self.grad.data();
      broadcast_loop(out, st, unit, [&](Index i, Index s, Index) { ga[s] += pg[i]; });
    });
  }
  return res;
}

template <typename S>
Tensor<S> concat(const std::vector<Tensor<S>>& parts, int axis) {
  if (parts.empty()) throw ShapeError("concat of nothing");
  const Shape& first = parts[0].shape();
  if (axis < 0 || axis >= static_cast<int>(first.size())) {
    throw ShapeError("concat: bad axis");
  }
  Shape out = first;
  out[axis] = 0;
  for (const auto& p : parts) {
    Shape s = p.shape();
    if (s.size() != first.size()) throw ShapeError("concat: rank mismatch");
    out[axis] += s[axis];
    s[axis] = first[axis];
    if (s != first) throw ShapeError("concat: extent mismatch");
  }
  Index outer = 1, inner = 1;
  for (int d = 0; d < axis; ++d) outer *= first[d];
  for (std::size_t d = axis + 1; d < first.size(); ++d) inner *= first[d];
  std::vector<Index> widths;
  for (const auto& p : parts) widths.push_back(p.shape()[axis] * inner);
  const Index row = out[axis] * inner;
  ArrayX<S> y(numel(out));
  Index offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const S* src = parts[k].data();
    for (Index o = 0; o < outer; ++o) {
      std::copy(src + o * widths[k], src + (o + 1) * widths[k],
                y.data() + o * row + offset);
    }
    offset += widths[k];
  }
  auto res = Tensor<S>::result(out, std::move(y), parts, "concat");
  if (res.requires_grad()) {
    res.set_backward([widths, outer, row](NodeT<S>& self) {
      Index off = 0;
      for (std::size_t k = 0; k < widths.size(); ++k) {
        NodeT<S>* nk = input(self, k);
        if (nk->requires_grad) {
          S* g = nk->grad_buffer().data();
          for (Index o = 0; o < outer; ++o) {
            const S* src = self.grad.data() + o * row + off;
            for (Index j = 0; j < widths[k]; ++j) g[o * widths[k] + j] += src[j];
          }
        }
        off += widths[k];
      }
    });
  }
  return res;
}

template <typename S>
Tensor<S> slice(const Tensor<S>& a, int axis, Index begin, Index end) {
  const Shape& in = a.shape();
  if (axis < 0 || axis >= static_cast<int>(in.size()) || begin < 0 ||
      end > in[axis] || begin > end) {
    throw ShapeError("slice out of range on " + to_string(in));
  }
  Shape out = in;
  out[axis] = end - begin;
  Index outer = 1, inner = 1;
  for (int d = 0; d < axis; ++d) outer *= in[d];
  for (std::size_t d = axis + 1; d < in.size(); ++d) inner *= in[d];
  const Index src_row = in[axis] * inner;
  const Index dst_row = out[axis] * inner;
  const Index off = begin * inner;
  ArrayX<S> y(numel(out));
  for (Index o = 0; o < outer; ++o) {
    std::copy(a.data() + o * src_row + off, a.data() + o * src_row + off + dst_row,
              y.data() + o * dst_row);
  }
  auto res = Tensor<S>::result(out, std::move(y), {a}, "slice");
  if (res.requires_grad()) {
    res.set_backward([outer, src_row, dst_row, off](NodeT<S>& self) {
      NodeT<S>* na = input(self, 0);
      if (!na->requires_grad) return;
      S* g = na->grad_buffer().data();
      for (Index o = 0; o < outer; ++o) {
        for (Index j = 0; j < dst_row; ++j) {
          g[o * src_row + off + j] += self.grad(o * dst_row + j);
        }
      }
    });
  }
  return res;
}

template <typename S>
Tensor<S> matmul(const Tensor<S>& a, const Tensor<S>& b) {
  require_rank(a.shape(), 2, "matmul");
  require_rank(b.shape(), 2, "matmul");
  const Index m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw ShapeError("matmul inner extents " + to_string(a.shape()) + " x " +
                     to_string(b.shape()));
  }
  ArrayX<S> y(m * n);
  MapRM<S>(y.data(), m, n).noalias() =
      ConstMapRM<S>(a.data(), m, k) * ConstMapRM<S>(b.data(), k, n);
  auto res = Tensor<S>::result(Shape{m, n}, std::move(y), {a, b}, "matmul");
  if (res.requires_grad()) {
    res.set_backward([m, k, n](NodeT<S>& self) {
      NodeT<S>* na = input(self, 0);
      NodeT<S>* nb = input(self, 1);
      ConstMapRM<S> g(self.grad.data(), m, n);
      if (na->requires_grad) {
        MapRM<S>(na->grad_buffer().data(), m, k).noalias() +=
            g * ConstMapRM<S>(nb->value.data(), k, n).transpose();
      }
      if (nb->requires_grad) {
        MapRM<S>(nb->grad_buffer().data(), k, n).noalias() +=
            ConstMapRM<S>(na->value.data(), m, k).transpose() * g;
      }
    });
  }
  return res;
}

template <typename S>
Tensor<S> bmm(const Tensor<S>& a, const Tensor<S>& b, bool trans_a,
              bool trans_b) {
  require_rank(a.shape(), 3, "bmm");
  require_rank(b.shape(), 3, "bmm");
  const Index batch = a.dim(0);
  if (b.dim(0) != batch) throw ShapeError("bmm batch mismatch");
  const Index ar = a.dim(1), ac = a.dim(2), br = b.dim(1), bc = b.dim(2);
  const Index m = trans_a ? ac : ar;
  const Index k = trans_a ? ar : ac;
  const Index kb = trans_b ? bc : br;
  const Index n = trans_b ? br : bc;
  if (k != kb) {
    throw ShapeError("bmm inner extents " + to_string(a.shape()) + " x " +
                     to_string(b.shape()));
  }
  ArrayX<S> y(batch * m * n);
  for (Index i = 0; i < batch; ++i) {
    ConstMapRM<S> A(a.data() + i * ar * ac, ar, ac);
    ConstMapRM<S> B(b.data() + i * br * bc, br, bc);
    MapRM<S> Y(y.data() + i * m * n, m, n);
    if (trans_a && trans_b) Y.noalias() = A.transpose() * B.transpose();
    else if (trans_a) Y.noalias() = A.transpose() * B;
    else if (trans_b) Y.noalias() = A * B.transpose();
    else Y.noalias() = A * B;
  }
  auto res = Tensor<S>::result(Shape{batch, m, n}, std::move(y), {a, b}, "bmm");
  if (res.requires_grad()) {
    res.set_backward([=](NodeT<S>& self) {
      NodeT<S>* na = input(self, 0);
      NodeT<S>* nb = input(self, 1);
      for (Index i = 0; i < batch; ++i) {
        ConstMapRM<S> G(self.grad.data() + i * m * n, m, n);
        ConstMapRM<S> A(na->value.data() + i * ar * ac, ar, ac);
        ConstMapRM<S> B(nb->value.data() + i * br * bc, br, bc);
        // Y = opA(A) opB(B); d opA(A) = G opB(B)^T, d opB(B) = opA(A)^T G.
        if (na->requires_grad) {
          MapRM<S> GA(na->grad_buffer().data() + i * ar * ac, ar, ac);
          MatrixRM<S> dopa = trans_b ? MatrixRM<S>(G * B) : MatrixRM<S>(G * B.transpose());
          if (trans_a) GA.noalias() += dopa.transpose();
          else GA.noalias() += dopa;
        }
        if (nb->requires_grad) {
          MapRM<S> GB(nb->grad_buffer().data() + i * br * bc, br, bc);
          MatrixRM<S> dopb = trans_a ? MatrixRM<S>(A * G) : MatrixRM<S>(A.transpose() * G);
          if (trans_b) GB.noalias() += dopb.transpose();
          else GB.noalias() += dopb;
        }
      }
    });
  }
  return res;
}

template <typename S>
Tensor<S> softmax(const Tensor<S>& a) {
  if (a.rank() == 0) throw ShapeError("softmax of a scalar");
  const Index n = a.shape().back();
  const Index rows = a.numel() / std::max<Index>(n, 1);
  ArrayX<S> y(a.numel());
  for (Index r = 0; r < rows; ++r) {
    const auto x = a.value().segment(r * n, n);
    auto e = (x - x.maxCoeff()).exp();
    y.segment(r * n, n) = e / e.sum();
  }
  auto res = Tensor<S>::result(a.shape(), std::move(y), {a}, "softmax");
  if (res.requires_grad()) {
    res.set_backward([n, rows](NodeT<S>& self) {
      NodeT<S>* na = input(self, 0);
      if (!na->requires_grad) return;
      auto& ga = na->grad_buffer();
      for (Index r = 0; r < rows; ++r) {
        const auto yr = self.value.segment(r * n, n);
        const auto gr = self.grad.segment(r * n, n);
        const S dot = (yr * gr).sum();
        ga.segment(r * n, n) += yr * (gr - dot);
      }
    });
  }
  return res;
}

template <typename S>
Tensor<S> conv2d(const Tensor<S>& input_t, const Tensor<S>& kernel, int stride,
                 int pad, const Tensor<S>& bias) {
  require_rank(input_t.shape(), 4, "conv2d input");
  require_rank(kernel.shape(), 4, "conv2d kernel");
  const Index N = input_t.dim(0), C = input_t.dim(1), H = input_t.dim(2),
              W = input_t.dim(3);
  const Index O = kernel.dim(0), K = kernel.dim(2);
  if (kernel.dim(1) != C || kernel.dim(3) != K) {
    throw ShapeError("conv2d kernel " + to_string(kernel.shape()) +
                     " does not match input " + to_string(input_t.shape()));
  }
  if (stride < 1 || pad < 0 || H + 2 * pad < K || W + 2 * pad < K) {
    throw ShapeError("conv2d invalid geometry");
  }
  if (bias.defined() && bias.numel() != O) throw ShapeError("conv2d bias size");
  const Index Ho = (H + 2 * pad - K) / stride + 1;
  const Index Wo = (W + 2 * pad - K) / stride + 1;
  const Index rows = C * K * K, cols = Ho * Wo;

  auto im2col = [=](const S* x, S* out) {
    for (Index c = 0; c < C; ++c)
      for (Index ki = 0; ki < K; ++ki)
        for (Index kj = 0; kj < K; ++kj) {
          S* dst = out + ((c * K + ki) * K + kj) * cols;
          for (Index oy = 0; oy < Ho; ++oy) {
            const Index iy = oy * stride - pad + ki;
            if (iy < 0 || iy >= H) {
              std::fill(dst + oy * Wo, dst + (oy + 1) * Wo, S(0));
              continue;
            }
            const S* srow = x + (c * H + iy) * W;
            for (Index ox = 0; ox < Wo; ++ox) {
              const Index ix = ox * stride - pad + kj;
              dst[oy * Wo + ox] = (ix >= 0 && ix < W) ? srow[ix] : S(0);
            }
          }
        }
  };

  std::vector<S> colbuf(static_cast<std::size_t>(rows * cols));
  ArrayX<S> y(N * O * cols);
  ConstMapRM<S> Wm(kernel.data(), O, rows);
  for (Index n = 0; n < N; ++n) {
    im2col(input_t.data() + n * C * H * W, colbuf.data());
    MapRM<S> Y(y.data() + n * O * cols, O, cols);
    Y.noalias() = Wm * ConstMapRM<S>(colbuf.data(), rows, cols);
    if (bias.defined()) {
      Y.colwise() += Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, 1>>(bias.data(), O);
    }
  }
  std::vector<Tensor<S>> ins{input_t, kernel};
  if (bias.defined()) ins.push_back(bias);
  auto res = Tensor<S>::result(Shape{N, O, Ho, Wo}, std::move(y), ins, "conv2d");
  if (res.requires_grad()) {
    const bool has_bias = bias.defined();
    res.set_backward([=](NodeT<S>& self) {
      NodeT<S>* nx = input(self, 0);
      NodeT<S>* nk = input(self, 1);
      NodeT<S>* nb = has_bias ? input(self, 2) : nullptr;
      std::vector<S> cb(static_cast<std::size_t>(rows * cols));
      MatrixRM<S> gcols(rows, cols);
      ConstMapRM<S> Wk(nk->value.data(), O, rows);
      for (Index n = 0; n < N; ++n) {
        ConstMapRM<S> G(self.grad.data() + n * O * cols, O, cols);
        if (nk->requires_grad) {
          im2col(nx->value.data() + n * C * H * W, cb.data());
          MapRM<S>(nk->grad_buffer().data(), O, rows).noalias() +=
              G * ConstMapRM<S>(cb.data(), rows, cols).transpose();
        }
        if (nb && nb->requires_grad) {
          Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, 1>>(nb->grad_buffer().data(), O) +=
              G.rowwise().sum();
        }
        if (nx->requires_grad) {
          gcols.noalias() = Wk.transpose() * G;
          S* gx = nx->grad_buffer().data() + n * C * H * W;
          for (Index c = 0; c < C; ++c)
            for (Index ki = 0; ki < K; ++ki)
              for (Index kj = 0; kj < K; ++kj) {
                const S* src = gcols.data() + ((c * K + ki) * K + kj) * cols;
                for (Index oy = 0; oy < Ho; ++oy) {
                  const Index iy = oy * stride - pad + ki;
                  if (iy < 0 || iy >= H) continue;
                  S* grow = gx + (c * H + iy) * W;
                  for (Index ox = 0; ox < Wo; ++ox) {
                    const Index ix = ox * stride - pad + kj;
                    if (ix >= 0 && ix < W) grow[ix] += src[oy * Wo + ox];
                  }
                }
              }
        }
      }
    });
  }
  return res;
}

template <typename S>
Tensor<S> pointwise_linear(const Tensor<S>& x, const Tensor<S>& weight,
                           const Tensor<S>& bias) {
  require_rank(x.shape(), 4, "pointwise_linear input");
  require_rank(weight.shape(), 2, "pointwise_linear weight");
  const Index N = x.dim(0), I = x.dim(1), P = x.dim(2) * x.dim(3);
  const Index O = weight.dim(0);
  if (weight.dim(1) != I) {
    throw ShapeError("pointwise_linear weight " + to_string(weight.shape()) +
                     " vs input " + to_string(x.shape()));
  }
  if (bias.defined() && bias.numel() != O) {
    throw ShapeError("pointwise_linear bias size");
  }
  using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
  ArrayX<S> y(N * O * P);
  ConstMapRM<S> Wm(weight.data(), O, I);
  for (Index n = 0; n < N; ++n) {
    MapRM<S> Y(y.data() + n * O * P, O, P);
    Y.noalias() = Wm * ConstMapRM<S>(x.data() + n * I * P, I, P);
    if (bias.defined()) Y.colwise() += Eigen::Map<const Vec>(bias.data(), O);
  }
  std::vector<Tensor<S>> ins{x, weight};
  if (bias.defined()) ins.push_back(bias);
  auto res = Tensor<S>::result(Shape{N, O, x.dim(2), x.dim(3)}, std::move(y), ins,
                               "pointwise_linear");
  if (res.requires_grad()) {
    const bool has_bias = bias.defined();
    res.set_backward([=](NodeT<S>& self) {
      NodeT<S>* nx = input(self, 0);
      NodeT<S>* nw = input(self, 1);
      NodeT<S>* nb = has_bias ? input(self, 2) : nullptr;
      for (Index n = 0; n < N; ++n) {
        ConstMapRM<S> G(self.grad.data() + n * O * P, O, P);
        if (nw->requires_grad) {
          MapRM<S>(nw->grad_buffer().data(), O, I).noalias() +=
              G * ConstMapRM<S>(nx->value.data() + n * I * P, I, P).transpose();
        }
        if (nx->requires_grad) {
          MapRM<S>(nx->grad_buffer().data() + n * I * P, I, P).noalias() +=
              ConstMapRM<S>(nw->value.data(), O, I).transpose() * G;
        }
        if (nb && nb->requires_grad) {
          Eigen::Map<Vec>(nb->grad_buffer().data(), O) += G.rowwise().sum();
        }
      }
    });
  }
  return res;
}

template <typename S>
Tensor<S> instance_norm(const Tensor<S>& h, S eps) {
  require_rank(h.shape(), 4, "instance_norm");
  const Index planes = h.dim(0) * h.dim(1);
  const Index P = h.dim(2) * h.dim(3);
  if (P < 1) throw ShapeError("instance_norm on empty plane");
  ArrayX<S> y(h.numel());
  std::vector<S> inv(static_cast<std::size_t>(planes));
  for (Index p = 0; p < planes; ++p) {
    const auto x = h.value().segment(p * P, P);
    const S mu = x.mean();
    const S var = (x - mu).square().mean();
    inv[p] = S(1) / std::sqrt(var + eps);
    y.segment(p * P, P) = (x - mu) * inv[p];
  }
  auto res = Tensor<S>::result(h.shape(), std::move(y), {h}, "instance_norm");
  if (res.requires_grad()) {
    res.set_backward([planes, P, inv = std::move(inv)](NodeT<S>& self) {
      NodeT<S>* nh = input(self, 0);
      if (!nh->requires_grad) return;
      auto& gh = nh->grad_buffer();
      for (Index p = 0; p < planes; ++p) {
        const auto g = self.grad.segment(p * P, P);
        const auto yy = self.value.segment(p * P, P);
        const S mg = g.mean();
        const S mgy = (g * yy).mean();
        gh.segment(p * P, P) += inv[p] * (g - mg - yy * mgy);
      }
    });
  }
  return res;
}

namespace {

// Output sample i of a x2 half-pixel upsampling reads wa*x[ia] + wb*x[ib].
struct UpTap {
  Index ia, ib;
};

std::vector<UpTap> up_taps(Index n) {
  std::vector<UpTap> taps(static_cast<std::size_t>(2 * n));
  for (Index j = 0; j < n; ++j) {
    taps[2 * j] = {j, std::max<Index>(j - 1, 0)};
    taps[2 * j + 1] = {j, std::min<Index>(j + 1, n - 1)};
  }
  return taps;
}

}  // namespace

template <typename S>
Tensor<S> upsample_bilinear2x(const Tensor<S>& h) {
  require_rank(h.shape(), 4, "upsample_bilinear2x");
  const Index planes = h.dim(0) * h.dim(1), H = h.dim(2), W = h.dim(3);
  const Index H2 = 2 * H, W2 = 2 * W;
  const auto ty = up_taps(H);
  const auto tx = up_taps(W);
  const S wa = S(0.75), wb = S(0.25);
  ArrayX<S> y(planes * H2 * W2);
  std::vector<S> tmp(static_cast<std::size_t>(H * W2));
  for (Index p = 0; p < planes; ++p) {
    const S* x = h.data() + p * H * W;
    for (Index r = 0; r < H; ++r)
      for (Index c = 0; c < W2; ++c)
        tmp[r * W2 + c] = wa * x[r * W + tx[c].ia] + wb * x[r * W + tx[c].ib];
    S* out = y.data() + p * H2 * W2;
    for (Index r = 0; r < H2; ++r)
      for (Index c = 0; c < W2; ++c)
        out[r * W2 + c] = wa * tmp[ty[r].ia * W2 + c] + wb * tmp[ty[r].ib * W2 + c];
  }
  auto res = Tensor<S>::result(Shape{h.dim(0), h.dim(1), H2, W2}, std::move(y), {h},
                               "upsample_bilinear2x");
  if (res.requires_grad()) {
    res.set_backward([=](NodeT<S>& self) {
      NodeT<S>* nh = input(self, 0);
      if (!nh->requires_grad) return;
      std::vector<S> gt(static_cast<std::size_t>(H * W2));
      for (Index p = 0; p < planes; ++p) {
        std::fill(gt.begin(), gt.end(), S(0));
        const S* g = self.grad.data() + p * H2 * W2;
        for (Index r = 0; r < H2; ++r)
          for (Index c = 0; c < W2; ++c) {
            gt[ty[r].ia * W2 + c] += wa * g[r * W2 + c];
            gt[ty[r].ib * W2 + c] += wb * g[r * W2 + c];
          }
        S* gx = nh->grad_buffer().data() + p * H * W;
        for (Index r = 0; r < H; ++r)
          for (Index c = 0; c < W2; ++c) {
            gx[r * W + tx[c].ia] += wa * gt[r * W2 + c];
            gx[r * W + tx[c].ib] += wb * gt[r * W2 + c];
          }
      }
    });
  }
  return res;
}

template <typename S>
Tensor<S> avg_pool2(const Tensor<S>& h) {
  require_rank(h.shape(), 4, "avg_pool2");
  const Index planes = h.dim(0) * h.dim(1), H = h.dim(2), W = h.dim(3);
  const Index Ho = H / 2, Wo = W / 2;
  if (Ho < 1 || Wo < 1) throw ShapeError("avg_pool2 on plane smaller than 2x2");
  ArrayX<S> y(planes * Ho * Wo);
  for (Index p = 0; p < planes; ++p) {
    const S* x = h.data() + p * H * W;
    for (Index r = 0; r < Ho; ++r)
      for (Index c = 0; c < Wo; ++c) {
        const S* a = x + 2 * r * W + 2 * c;
        y(p * Ho * Wo + r * Wo + c) = S(0.25) * (a[0] + a[1] + a[W] + a[W + 1]);
      }
  }
  auto res = Tensor<S>::result(Shape{h.dim(0), h.dim(1), Ho, Wo}, std::move(y), {h},
                               "avg_pool2");
  if (res.requires_grad()) {
    res.set_backward([=](NodeT<S>& self) {
      NodeT<S>* nh = input(self, 0);
      if (!nh->requires_grad) return;
      auto& gh = nh->grad_buffer();
      for (Index p = 0; p < planes; ++p)
        for (Index r = 0; r < Ho; ++r)
          for (Index c = 0; c < Wo; ++c) {
            const S g = S(0.25) * self.grad(p * Ho * Wo + r * Wo + c);
            S* a = gh.data() + p * H * W + 2 * r * W + 2 * c;
            a[0] += g;
            a[1] += g;
            a[W] += g;
            a[W + 1] += g;
          }
    });
  }
  return res;
}

namespace {

struct Taps4 {
  Index i00, i01, i10, i11;
  double w00, w01, w10, w11;
};

Taps4 bilinear_taps(double r, double c, Index H, Index W) {
  Index r0 = static_cast<Index>(std::floor(r));
  Index c0 = static_cast<Index>(std::floor(c));
  r0 = std::clamp<Index>(r0, 0, std::max<Index>(H - 2, 0));
  c0 = std::clamp<Index>(c0, 0, std::max<Index>(W - 2, 0));
  const Index r1 = std::min(r0 + 1, H - 1);
  const Index c1 = std::min(c0 + 1, W - 1);
  const double fr = H > 1 ? r - static_cast<double>(r0) : 0.0;
  const double fc = W > 1 ? c - static_cast<double>(c0) : 0.0;
  return {r0 * W + c0, r0 * W + c1, r1 * W + c0, r1 * W + c1,
          (1 - fr) * (1 - fc), (1 - fr) * fc, fr * (1 - fc), fr * fc};
}

}  // namespace

template <typename S>
Tensor<S> interp_bilinear(const Tensor<S>& grid, const std::vector<GridCoord>& coords) {
  require_rank(grid.shape(), 3, "interp_bilinear");
  const Index C = grid.dim(0), H = grid.dim(1), W = grid.dim(2);
  const Index P = static_cast<Index>(coords.size());
  std::vector<Taps4> taps;
  taps.reserve(coords.size());
  for (const auto& rc : coords) {
    if (!(rc[0] >= 0.0 && rc[0] <= static_cast<double>(H - 1) && rc[1] >= 0.0 &&
          rc[1] <= static_cast<double>(W - 1))) {
      throw CoordError("position (" + std::to_string(rc[0]) + ", " +
                       std::to_string(rc[1]) + ") outside grid " +
                       to_string(grid.shape()));
    }
    taps.push_back(bilinear_taps(rc[0], rc[1], H, W));
  }
  ArrayX<S> y(C * P);
  for (Index c = 0; c < C; ++c) {
    const S* g = grid.data() + c * H * W;
    for (Index p = 0; p < P; ++p) {
      const Taps4& t = taps[p];
      y(c * P + p) = static_cast<S>(t.w00 * g[t.i00] + t.w01 * g[t.i01] +
                                    t.w10 * g[t.i10] + t.w11 * g[t.i11]);
    }
  }
  auto res = Tensor<S>::result(Shape{C, P}, std::move(y), {grid}, "interp_bilinear");
  if (res.requires_grad()) {
    res.set_backward([C, H, W, P, taps = std::move(taps)](NodeT<S>& self) {
      NodeT<S>* ng = input(self, 0);
      if (!ng->requires_grad) return;
      for (Index c = 0; c < C; ++c) {
        S* gg = ng->grad_buffer().data() + c * H * W;
        for (Index p = 0; p < P; ++p) {
          const Taps4& t = taps[p];
          const double g = self.grad(c * P + p);
          gg[t.i00] += static_cast<S>(t.w00 * g);
          gg[t.i01] += static_cast<S>(t.w01 * g);
          gg[t.i10] += static_cast<S>(t.w10 * g);
          gg[t.i11] += static_cast<S>(t.w11 * g);
        }
      }
    });
  }
  return res;
}

template <typename S>
Tensor<S> warp_bilinear(const Tensor<S>& img, const Tensor<S>& flow) {
  require_rank(img.shape(), 4, "warp_bilinear image");
  require_rank(flow.shape(), 4, "warp_bilinear flow");
  const Index N = img.dim(0), C = img.dim(1), H = img.dim(2), W = img.dim(3);
  if (flow.dim(0) != N || flow.dim(1) != 2 || flow.dim(2) != H || flow.dim(3) != W) {
    throw ShapeError("warp_bilinear flow " + to_string(flow.shape()) +
                     " vs image " + to_string(img.shape()));
  }
  const Index P = H * W;
  struct Sample {
    Index r0, c0, r1, c1;
    S fr, fc;
    bool clamp_r, clamp_c;
  };
  std::vector<Sample> smp(static_cast<std::size_t>(N * P));
  for (Index n = 0; n < N; ++n)
    for (Index r = 0; r < H; ++r)
      for (Index c = 0; c < W; ++c) {
        const Index p = r * W + c;
        const S sx = S(c) + flow.data()[(n * 2 + 0) * P + p];
        const S sy = S(r) + flow.data()[(n * 2 + 1) * P + p];
        const S cx = std::clamp<S>(sx, S(0), S(W - 1));
        const S cy = std::clamp<S>(sy, S(0), S(H - 1));
        Sample s;
        s.r0 = std::min<Index>(static_cast<Index>(std::floor(cy)), std::max<Index>(H - 2, 0));
        s.c0 = std::min<Index>(static_cast<Index>(std::floor(cx)), std::max<Index>(W - 2, 0));
        s.r1 = std::min(s.r0 + 1, H - 1);
        s.c1 = std::min(s.c0 + 1, W - 1);
        s.fr = H > 1 ? cy - S(s.r0) : S(0);
        s.fc = W > 1 ? cx - S(s.c0) : S(0);
        s.clamp_r = cy != sy || H == 1;
        s.clamp_c = cx != sx || W == 1;
        smp[n * P + p] = s;
      }
  ArrayX<S> y(img.numel());
  for (Index n = 0; n < N; ++n)
    for (Index ch = 0; ch < C; ++ch) {
      const S* x = img.data() + (n * C + ch) * P;
      for (Index p = 0; p < P; ++p) {
        const Sample& s = smp[n * P + p];
        y((n * C + ch) * P + p) =
            (1 - s.fr) * ((1 - s.fc) * x[s.r0 * W + s.c0] + s.fc * x[s.r0 * W + s.c1]) +
            s.fr * ((1 - s.fc) * x[s.r1 * W + s.c0] + s.fc * x[s.r1 * W + s.c1]);
      }
    }
  auto res = Tensor<S>::result(img.shape(), std::move(y), {img, flow}, "warp_bilinear");
  if (res.requires_grad()) {
    res.set_backward([N, C, W, P, smp = std::move(smp)](NodeT<S>& self) {
      NodeT<S>* ni = input(self, 0);
      NodeT<S>* nf = input(self, 1);
      for (Index n = 0; n < N; ++n)
        for (Index ch = 0; ch < C; ++ch) {
          const S* x = ni->value.data() + (n * C + ch) * P;
          const S* g = self.grad.data() + (n * C + ch) * P;
          for (Index p = 0; p < P; ++p) {
            const Sample& s = smp[n * P + p];
            const S v00 = x[s.r0 * W + s.c0], v01 = x[s.r0 * W + s.c1];
            const S v10 = x[s.r1 * W + s.c0], v11 = x[s.r1 * W + s.c1];
            if (ni->requires_grad) {
              S* gi = ni->grad_buffer().data() + (n * C + ch) * P;
              gi[s.r0 * W + s.c0] += g[p] * (1 - s.fr) * (1 - s.fc);
              gi[s.r0 * W + s.c1] += g[p] * (1 - s.fr) * s.fc;
              gi[s.r1 * W + s.c0] += g[p] * s.fr * (1 - s.fc);
              gi[s.r1 * W + s.c1] += g[p] * s.fr * s.fc;
            }
            if (nf->requires_grad) {
              S* gf = nf->grad_buffer().data() + n * 2 * P;
              if (!s.clamp_c) {
                gf[p] += g[p] * ((1 - s.fr) * (v01 - v00) + s.fr * (v11 - v10));
              }
              if (!s.clamp_r) {
                gf[P + p] += g[p] * ((1 - s.fc) * (v10 - v00) + s.fc * (v11 - v01));
              }
            }
          }
        }
    });
  }
  return res;
}

template <typename S>
Tensor<S> round_ste(const Tensor<S>& a) {
  ArrayX<S> y = a.value().unaryExpr([](S v) { return std::round(v); });
  auto res = Tensor<S>::result(a.shape(), std::move(y), {a}, "round_ste");
  if (res.requires_grad()) {
    res.set_backward([](NodeT<S>& self) {
      NodeT<S>* na = input(self, 0);
      if (na->requires_grad) na->grad_buffer() += self.grad;
    });
  }
  return res;
}

template <typename S>
Tensor<S> soft_round(const Tensor<S>& a, S tau) {
  if (!(tau > S(0))) throw ParamError("soft_round temperature must be positive");
  const double t = static_cast<double>(tau);
  const double norm = 0.5 / std::tanh(0.5 / t);
  ArrayX<S> y(a.numel());
  ArrayX<S> dy(a.numel());
  for (Index i = 0; i < a.numel(); ++i) {
    const double x = a.at(i);
    const double m = std::floor(x) + 0.5;
    const double th = std::tanh((x - m) / t);
    y(i) = static_cast<S>(m + norm * th);
    dy(i) = static_cast<S>(norm * (1.0 - th * th) / t);
  }
  auto res = Tensor<S>::result(a.shape(), std::move(y), {a}, "soft_round");
  if (res.requires_grad()) {
    res.set_backward([dy = std::move(dy)](NodeT<S>& self) {
      NodeT<S>* na = input(self, 0);
      if (na->requires_grad) na->grad_buffer() += self.grad * dy;
    });
  }
  return res;
}

template <typename S>
Tensor<S> gaussian_rate(const Tensor<S>& v, const Tensor<S>& mu,
                        const Tensor<S>& sigma, double p_min) {
  if (v.shape() != mu.shape() || v.shape() != sigma.shape()) {
    throw ShapeError("gaussian_rate operands must share a shape");
  }
  constexpr double kInvLn2 = 1.4426950408889634;
  const Index n = v.numel();
  ArrayX<S> bits(n);
  // Per element: d bits / d v, d bits / d sigma (d/dmu = -d/dv).
  ArrayX<S> dv(n), ds(n);
  for (Index i = 0; i < n; ++i) {
    const double s = sigma.at(i);
    const double d = static_cast<double>(v.at(i)) - mu.at(i);
    const double a = (d - 0.5) / s;
    const double b = (d + 0.5) / s;
    const BinMass m = bin_mass(a, b);
    bits(i) = static_cast<S>(-std::log2(std::max(m.p, p_min)));
    // bits = -log2 p with a,b as functions of (v, sigma).
    dv(i) = static_cast<S>(-kInvLn2 * (m.dlog_da + m.dlog_db) / s);
    ds(i) = static_cast<S>(kInvLn2 * (m.dlog_da * a + m.dlog_db * b) / s);
  }
  auto res = Tensor<S>::result(v.shape(), std::move(bits), {v, mu, sigma}, "gaussian_rate");
  if (res.requires_grad()) {
    res.set_backward([dv = std::move(dv), ds = std::move(ds)](NodeT<S>& self) {
      NodeT<S>* nv = input(self, 0);
      NodeT<S>* nm = input(self, 1);
      NodeT<S>* ns = input(self, 2);
      if (nv->requires_grad) nv->grad_buffer() += self.grad * dv;
      if (nm->requires_grad) nm->grad_buffer() -= self.grad * dv;
      if (ns->requires_grad) ns->grad_buffer() += self.grad * ds;
    });
  }
  return res;
}

#define INRVC_INSTANTIATE_OPS(S)                                                  \
  template Tensor<S> elementwise<S>(BinaryOp, const Tensor<S>&, const Tensor<S>&); \
  template Tensor<S> elementwise<S>(UnaryOp, const Tensor<S>&);                   \
  template Tensor<S> affine<S>(const Tensor<S>&, S, S);                          \
  template Tensor<S> clamp<S>(const Tensor<S>&, S, S);                           \
  template Tensor<S> sum<S>(const Tensor<S>&);                                   \
  template Tensor<S> mean<S>(const Tensor<S>&);                                  \
  template Tensor<S> sum_to<S>(const Tensor<S>&, const Shape&);                  \
  template Tensor<S> reshape<S>(const Tensor<S>&, const Shape&);                 \
  template Tensor<S> permute<S>(const Tensor<S>&, const std::vector<int>&);      \
  template Tensor<S> concat<S>(const std::vector<Tensor<S>>&, int);              \
  template Tensor<S> slice<S>(const Tensor<S>&, int, Index, Index);              \
  template Tensor<S> matmul<S>(const Tensor<S>&, const Tensor<S>&);              \
  template Tensor<S> bmm<S>(const Tensor<S>&, const Tensor<S>&, bool, bool);     \
  template Tensor<S> softmax<S>(const Tensor<S>&);                               \
  template Tensor<S> conv2d<S>(const Tensor<S>&, const Tensor<S>&, int, int,     \
                               const Tensor<S>&);                                \
  template Tensor<S> pointwise_linear<S>(const Tensor<S>&, const Tensor<S>&,     \
                                         const Tensor<S>&);                      \
  template Tensor<S> instance_norm<S>(const Tensor<S>&, S);                      \
  template Tensor<S> upsample_bilinear2x<S>(const Tensor<S>&);                   \
  template Tensor<S> avg_pool2<S>(const Tensor<S>&);                             \
  template Tensor<S> interp_bilinear<S>(const Tensor<S>&,                        \
                                        const std::vector<GridCoord>&);          \
  template Tensor<S> warp_bilinear<S>(const Tensor<S>&, const Tensor<S>&);       \
  template Tensor<S> round_ste<S>(const Tensor<S>&);                             \
  template Tensor<S> soft_round<S>(const Tensor<S>&, S);                         \
  template Tensor<S> gaussian_rate<S>(const Tensor<S>&, const Tensor<S>&,        \
                                      const Tensor<S>&, double);

INRVC_INSTANTIATE_OPS(float)
INRVC_INSTANTIATE_OPS(double)

#undef INRVC_INSTANTIATE_OPS

}  // namespace inrvc
