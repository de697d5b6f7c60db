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


#include "inrvc/overfit.hpp"

#include <cmath>
#include <limits>

#include "inrvc/errors.hpp"
#include "inrvc/metrics.hpp"
#include "inrvc/ops.hpp"
#include "inrvc/optim.hpp"

namespace inrvc {

template <typename S>
Tensor<S> distortion(const Tensor<S>& x, const Tensor<S>& xhat, DistortionKind kind) {
  if (x.shape() != xhat.shape()) {
    throw ShapeError("distortion operands " + to_string(x.shape()) + " and " +
                     to_string(xhat.shape()));
  }
  if (kind == DistortionKind::kMse) return mean(square(x - xhat));
  return (ms_ssim_tensor(x, xhat) * S(-200)) + S(200);
}

double distortion_value(const TensorF& x, const TensorF& xhat, DistortionKind kind) {
  if (kind == DistortionKind::kMse) return mse(x, xhat);
  if (x.shape() != xhat.shape()) throw ShapeError("distortion operands differ in shape");
  return 200.0 * (1.0 - ms_ssim(x, xhat));
}

void RdConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be positive");
  if (steps_intra < 0 || steps_inter < 0) throw ConfigError("negative step count");
  if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
  if (!(lr_latent > 0) || !(lr_quant > 0) || !(lr_update > 0)) {
    throw ConfigError("learning rates must be positive");
  }
  if (!(tau_start > 0) || !(tau_end > 0)) throw ConfigError("temperatures must be positive");
  if (!(q_psi > 0)) throw ConfigError("weight-update step must be positive");
}

std::vector<TensorF> encoder_latents(const CodecModel& model, const TensorF& padded,
                                     const FramePacket& header, const FrameBuffer& buffer) {
  if (header.type == FrameType::kIntra) return model.encoder.forward(padded);
  const auto m1 = model.motion.forward(padded, buffer.get(header.ref1).image);
  MotionPyramid<float> m2;
  if (header.ref2 >= 0) m2 = model.motion.forward(padded, buffer.get(header.ref2).image);
  return model.encoder.forward(
      padded, ImageEncoder<float>::conditioning(m1, header.ref2 >= 0 ? &m2 : nullptr,
                                                model.config.levels));
}

namespace {

// Everything the optimiser moves.
struct Variables {
  std::vector<TensorF> y, log_q, log_qt, delta;
  TensorF log_qpsi, log_qtpsi;  // [L]

  ParamList<float> latent_params() const {
    ParamList<float> p;
    for (const auto& t : y) p.push_back({"y", t});
    return p;
  }
  ParamList<float> quant_params() const {
    ParamList<float> p;
    for (std::size_t l = 0; l < log_q.size(); ++l) {
      p.push_back({"q", log_q[l]});
      p.push_back({"qt", log_qt[l]});
    }
    p.push_back({"qpsi", log_qpsi});
    p.push_back({"qtpsi", log_qtpsi});
    return p;
  }
  ParamList<float> update_params() const {
    ParamList<float> p;
    for (const auto& t : delta) p.push_back({"delta", t});
    return p;
  }
};

Variables warm_start(const CodecRuntime& rt, const std::vector<TensorF>& latents,
                     const RdConfig& cfg) {
  const CodecModel& m = rt.model();
  // Steps start at the pretrained values: the entropy model predicts in symbol
  // units, so rescaling them here would miscalibrate its priors.
  Variables v;
  const int L = m.config.levels;
  for (int l = 0; l < L; ++l) {
    v.y.push_back(latents[l].clone(true));
    v.log_q.emplace_back(m.log_q[l].shape(), m.log_q[l].value(), true);
    v.log_qt.emplace_back(m.log_qt[l].shape(), m.log_qt[l].value(), true);
    v.delta.push_back(TensorF::zeros({rt.residual_size()}, true));
  }
  v.log_qpsi = TensorF::constant({L}, float(std::log(cfg.q_psi)), true);
  v.log_qtpsi = TensorF::constant({L}, float(-std::log(cfg.q_psi)), true);
  return v;
}

std::vector<float> values(const TensorF& t) {
  return std::vector<float>(t.data(), t.data() + t.numel());
}

FrameDecision hard_decision(const Variables& v) {
  FrameDecision d;
  const TensorF qpsi = exp(v.log_qpsi.detach()), qtpsi = exp(v.log_qtpsi.detach());
  for (std::size_t l = 0; l < v.y.size(); ++l) {
    d.symbols.push_back(quantize(v.y[l].detach(), values(exp(v.log_q[l].detach()))));
    const TensorF qt = coded_scale(exp(v.log_qt[l].detach()));
    std::vector<std::uint16_t> codes;
    for (float s : values(qt)) codes.push_back(encode_scale(s));
    d.qt_codes.push_back(std::move(codes));
    const TensorF sym = round_ste(v.delta[l].detach() * qpsi.at(Index(l)));
    std::vector<std::int32_t> s;
    for (Index i = 0; i < sym.numel(); ++i) s.push_back(static_cast<std::int32_t>(sym.at(i)));
    d.psi_symbols.push_back(std::move(s));
    d.qt_psi.push_back(qtpsi.at(Index(l)));
  }
  return d;
}

struct Evaluation {
  double objective = std::numeric_limits<double>::infinity();
  FrameDecision decision;
  FramePacket packet;
  DecodedFrame decoded;
  UpdateState next;
};

Evaluation evaluate(const CodecRuntime& rt, const FrameJob& job, const Variables& v,
                    const RdConfig& cfg) {
  const Index H = job.frame.dim(2), W = job.frame.dim(3);
  const Index unit = rt.patch();
  Evaluation e;
  e.decision = hard_decision(v);
  e.packet = encode_frame(rt, job.header, e.decision, *job.buffer, *job.state);
  e.decoded = decode_packet(rt, e.packet, *job.buffer, *job.state, padded_extent(H, unit),
                            padded_extent(W, unit), &e.next);
  const double bits = 8.0 * double(framed_size(e.packet));
  const double d = distortion_value(job.frame, crop_frame(e.decoded.image, H, W), cfg.distortion);
  e.objective = bits / double(H * W) + job.q_glob * cfg.lambda * d;
  return e;
}

// Relaxed objective: soft-rounded symbols for the rates, straight-through
// rounding on everything the decoder consumes. Returns (loss, soft bits).
std::pair<TensorF, double> soft_objective(const CodecRuntime& rt, const FrameJob& job,
                                          const Variables& v, const RdConfig& cfg, float tau,
                                          double side_bits, Rng& rng) {
  const CodecModel& m = rt.model();
  const int L = m.config.levels;
  const Index H = job.frame.dim(2), W = job.frame.dim(3);
  const TensorF qpsi = exp(v.log_qpsi), qtpsi = exp(v.log_qtpsi);
  const bool intra = job.header.type == FrameType::kIntra;
  std::vector<TensorF> yhat(L);
  for (int l = 0; l < L; ++l) {
    yhat[l] = ste_round(v.y[l], exp(v.log_q[l]), coded_scale(exp(v.log_qt[l])));
  }
  TensorF bits = TensorF::scalar(float(side_bits));
  for (int l = L; l >= 1; --l) {
    const TensorF ql = slice(qpsi, 0, l - 1, l), qtl = slice(qtpsi, 0, l - 1, l);
    const TensorF scaled = v.delta[l - 1] * ql;
    TensorF psi = round_ste(scaled) * qtl;
    if (!intra) psi = psi + job.state->psi[l - 1];
    const auto head = rt.training_head(psi);
    LevelContext<float> ctx;
    if (l < L) ctx.coarser = yhat[l];
    if (job.header.ref1 >= 0) ctx.ref1 = job.buffer->get(job.header.ref1).latents[l - 1];
    if (job.header.ref2 >= 0) ctx.ref2 = job.buffer->get(job.header.ref2).latents[l - 1];
    const TensorF sym = soft_symbols(v.y[l - 1], exp(v.log_q[l - 1]), tau, rng);
    bits = bits + level_bits(m.entropy, head, l, yhat[l - 1], sym, ctx);
    // Weight-update symbols: the same relaxation, without channels.
    TensorF relaxed = soft_round(scaled, tau);
    relaxed = soft_round(relaxed + Tensor<float>(relaxed.shape(),
                                                 ArrayX<float>::NullaryExpr(relaxed.numel(), [&] {
                                                   return float(rng.uniform() - 0.5);
                                                 })),
                         tau);
    bits = bits + sum(m.prior.bits(relaxed));
  }
  const TensorF ref = job.header.ref1 >= 0 ? job.buffer->get(job.header.ref1).image : TensorF();
  const TensorF xhat = crop_frame(decode_frame(rt.decoder(), yhat, ref), H, W);
  const TensorF d = distortion(job.frame, xhat, cfg.distortion);
  const double soft_bits = bits.item();
  return {bits * float(1.0 / double(H * W)) + d * float(job.q_glob * cfg.lambda), soft_bits};
}

bool finite(const ParamList<float>& p) {
  for (const auto& x : p) {
    if (!x.tensor.value().allFinite()) return false;
  }
  return true;
}

}  // namespace

OverfitResult overfit_frame(const CodecRuntime& rt, const FrameJob& job, const RdConfig& cfg,
                            int steps) {
  cfg.validate();
  if (!job.buffer || !job.state) throw ParamError("frame job needs a buffer and a state");
  const CodecModel& m = rt.model();
  const TensorF padded = pad_frame(job.frame, rt.patch());
  const auto init = encoder_latents(m, padded, job.header, *job.buffer);
  std::vector<TensorF> init_latents;
  for (const auto& t : init) init_latents.push_back(t.detach());

  OverfitResult out;
  double lr_scale = 1.0;
  for (int attempt = 0;; ++attempt) {
    Variables v = warm_start(rt, init_latents, cfg);
    Evaluation best = evaluate(rt, job, v, cfg);
    out.initial_objective = best.objective;
    out.best_step = 0;
    out.trace.assign(1, {0, best.objective});
    // Side information the relaxed rate cannot see: packet fields and framing.
    FramePacket side = best.packet;
    side.payload.clear();
    const double side_bits = 8.0 * double(framed_size(side));
    auto all = [](const Variables& x) {
      ParamList<float> p = x.latent_params();
      append(p, "", x.quant_params());
      append(p, "", x.update_params());
      return p;
    };
    std::vector<ArrayX<float>> best_values = snapshot(all(v));

    Adam<float> opt;
    opt.add(v.latent_params(), cfg.lr_latent * lr_scale);
    opt.add(v.quant_params(), cfg.lr_quant * lr_scale);
    opt.add(v.update_params(), cfg.lr_update * lr_scale);
    Rng rng(cfg.seed ^ (std::uint64_t(job.header.display) * 0x9E3779B97F4A7C15ull));
    bool diverged = false;
    for (int step = 1; step <= steps; ++step) {
      const float tau = soft_round_tau(step - 1, steps, cfg.tau_start, cfg.tau_end);
      auto [loss, soft] = soft_objective(rt, job, v, cfg, tau, side_bits, rng);
      if (!std::isfinite(loss.item())) {
        diverged = true;
        break;
      }
      backward(loss);
      if (!opt.gradients_finite()) {
        diverged = true;
        break;
      }
      opt.step(cosine_lr(step - 1, steps));
      if (!finite(all(v))) {
        diverged = true;
        break;
      }
      if (step % cfg.eval_every == 0 || step == steps) {
        Evaluation e = evaluate(rt, job, v, cfg);
        out.trace.push_back({step, e.objective});
        if (e.objective < best.objective) {
          best = std::move(e);
          best_values = snapshot(all(v));
          out.best_step = step;
        }
      }
    }
    if (diverged) {
      if (attempt == 0) {
        lr_scale *= 0.5;
        ++out.retries;
        continue;
      }
      throw OverfitError("non-finite objective after rollback (frame " +
                         std::to_string(job.header.display) + ")");
    }
    restore(all(v), best_values);
    {
      Rng quiet(0);
      out.soft_bits = soft_objective(rt, job, v, cfg, cfg.tau_end, side_bits, quiet).second;
    }
    out.best_objective = best.objective;
    out.packet = std::move(best.packet);
    out.decision = std::move(best.decision);
    out.decoded = std::move(best.decoded);
    out.next_state = std::move(best.next);
    out.true_bits = 8.0 * double(framed_size(out.packet));
    return out;
  }
}

template Tensor<float> distortion(const Tensor<float>&, const Tensor<float>&, DistortionKind);
template Tensor<double> distortion(const Tensor<double>&, const Tensor<double>&, DistortionKind);

}  // namespace inrvc
