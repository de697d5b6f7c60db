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


#include "inrvc/pretrain.hpp"

#include <chrono>
#include <cmath>
#include <map>

#include "inrvc/errors.hpp"
#include "inrvc/metrics.hpp"
#include "inrvc/ops.hpp"
#include "inrvc/optim.hpp"

namespace inrvc {

void PretrainConfig::validate() const {
  if (steps < 1) throw ConfigError("pretraining needs at least one step");
  if (crop < 16) throw ConfigError("crop too small");
  if (!(lambda > 0)) throw ConfigError("lambda must be positive");
  if (!(lr > 0)) throw ConfigError("learning rate must be positive");
  if (!(mask_end > 0 && mask_end <= 1)) throw ConfigError("mask_end must lie in (0, 1]");
  if (!(tau_start > 0 && tau_end > 0)) throw ConfigError("temperatures must be positive");
  if (log_every < 1) throw ConfigError("log_every must be >= 1");
  if (!(rate_warmup >= 0 && rate_warmup < 1)) throw ConfigError("rate_warmup must lie in [0, 1)");
}

namespace {

TensorF crop(const TensorF& x, Index top, Index left, Index size) {
  return slice(slice(x, 2, top, top + size), 3, left, left + size).detach();
}

struct Coded {
  TensorF bits, dist, xhat;
  std::vector<TensorF> yhat;
};

Coded code_training_frame(const CodecModel& m, const TensorF& x, const TensorF* r1,
                          const TensorF* r2, const std::vector<TensorF>* l1,
                          const std::vector<TensorF>* l2, float tau, DistortionKind kind,
                          TensorF* aux, Rng& rng) {
  const int L = m.config.levels;
  std::vector<TensorF> cond;
  if (r1) {
    const auto m1 = m.motion.forward(x, *r1);
    MotionPyramid<float> m2;
    if (r2) m2 = m.motion.forward(x, *r2);
    cond = ImageEncoder<float>::conditioning(m1, r2 ? &m2 : nullptr, L);
    TensorF a = mean(square(warp_bilinear(*r1, m1.flow[0]) - x));
    if (r2) a = a + mean(square(warp_bilinear(*r2, m2.flow[0]) - x));
    *aux = aux->defined() ? *aux + a : a;
  }
  const auto y = m.encoder.forward(x, cond);
  Coded c;
  c.yhat.resize(L);
  for (int l = 0; l < L; ++l) {
    c.yhat[l] = ste_round(y[l], exp(m.log_q[l]), coded_scale(exp(m.log_qt[l])));
  }
  const auto head = m.entropy.head();
  // Per-channel inverse scales travel as 16-bit codes.
  c.bits = TensorF::scalar(float(16 * 2 * m.config.latent_channels * L));
  for (int l = L; l >= 1; --l) {
    LevelContext<float> ctx;
    if (l < L) ctx.coarser = c.yhat[l];
    if (l1) ctx.ref1 = (*l1)[l - 1];
    if (l2) ctx.ref2 = (*l2)[l - 1];
    const TensorF sym = soft_symbols(y[l - 1], exp(m.log_q[l - 1]), tau, rng);
    c.bits = c.bits + level_bits(m.entropy, head, l, c.yhat[l - 1], sym, ctx);
  }
  c.xhat = m.decoder.forward(c.yhat, r1 ? *r1 : TensorF(), m.config.decoder.pretrain_patch);
  c.dist = distortion(x, c.xhat, kind);
  return c;
}

std::vector<TensorF> detached(const std::vector<TensorF>& v) {
  std::vector<TensorF> out;
  for (const auto& t : v) out.push_back(t.detach());
  return out;
}

}  // namespace

CodecModel pretrain(const Corpus& corpus, const CodecConfig& config, const PretrainConfig& p,
                    const std::function<void(const PretrainLog&)>& log) {
  p.validate();
  if (corpus.empty()) throw ParamError("empty pretraining corpus");
  for (const auto& clip : corpus) {
    if (clip.size() < 3) throw ParamError("pretraining clips need at least 3 frames");
    if (clip[0].dim(2) < p.crop || clip[0].dim(3) < p.crop) {
      throw ParamError("corpus frames are smaller than the crop");
    }
  }
  CodecModel m(config);
  if (p.crop % m.config.decoder.pretrain_patch) throw ConfigError("crop must tile into patches");
  m.lambda = p.lambda;
  const ParamList<float> params = [&] {
    ParamList<float> all;
    for (const auto& q : m.params()) {
      if (q.name.rfind("prior.", 0) != 0) all.push_back(q);
    }
    return all;
  }();
  Adam<float> opt;
  opt.add(params, p.lr);
  Rng rng(p.seed);
  const QGlobTable& qg = m.config.qglob;
  const float wq[3] = {qg.weight(0), qg.weight(1), qg.weight(2)};
  const Index mask_end = std::max<Index>(1, Index(std::llround(p.mask_end * p.steps)));
  auto last_good = snapshot(params);
  const auto t0 = std::chrono::steady_clock::now();
  double acc_loss = 0, acc_bpp = 0, acc_psnr = 0;
  int acc_n = 0;
  for (int step = 0; step < p.steps; ++step) {
    const double mask = decay_mask(step, mask_end);
    m.set_mask(mask);
    const float tau = soft_round_tau(step, p.steps, p.tau_start, p.tau_end);
    const auto& clip = corpus[rng.below(corpus.size())];
    const int stride = clip.size() >= 5 && rng.below(2) ? 2 : 1;
    const int start = int(rng.below(clip.size() - 2 * stride));
    const Index H = clip[0].dim(2), W = clip[0].dim(3);
    const Index top = Index(rng.below(H - p.crop + 1)), left = Index(rng.below(W - p.crop + 1));
    const TensorF x0 = crop(clip[start], top, left, p.crop);
    const TensorF x1 = crop(clip[start + stride], top, left, p.crop);
    const TensorF x2 = crop(clip[start + 2 * stride], top, left, p.crop);
    TensorF aux;
    const Coded c0 = code_training_frame(m, x0, nullptr, nullptr, nullptr, nullptr, tau,
                                         p.distortion, &aux, rng);
    const TensorF r0 = c0.xhat.detach();
    const auto l0 = detached(c0.yhat);
    const Coded c2 = code_training_frame(m, x2, &r0, nullptr, &l0, nullptr, tau, p.distortion,
                                         &aux, rng);
    const TensorF r2 = c2.xhat.detach();
    const auto l2 = detached(c2.yhat);
    const Coded c1 =
        code_training_frame(m, x1, &r0, &r2, &l0, &l2, tau, p.distortion, &aux, rng);
    const double pixels = double(p.crop * p.crop);
    const float lam = float(p.lambda);
    const double warm = p.rate_warmup * p.steps;
    const double rate_weight = warm > 0 ? std::min(1.0, step / warm) : 1.0;
    TensorF loss = (c0.bits + c2.bits + c1.bits) * float(rate_weight / (3.0 * pixels)) +
                   (c0.dist * (wq[0] * lam) + c2.dist * (wq[1] * lam) + c1.dist * (wq[2] * lam)) *
                       (1.0f / 3.0f) +
                   aux * float(p.motion_weight / 3.0);
    bool ok = std::isfinite(loss.item());
    if (ok) {
      backward(loss);
      ok = opt.gradients_finite();
    }
    if (!ok) {
      restore(params, last_good);
      if (!p.rescue_path.empty()) save_checkpoint(m, p.rescue_path);
      throw TrainError("non-finite loss at step " + std::to_string(step) +
                       (p.rescue_path.empty() ? "" : "; last good model in " + p.rescue_path));
    }
    if (p.grad_clip > 0) opt.clip_grad_norm(p.grad_clip);
    opt.step(cosine_lr(step, p.steps) * 0.9 + 0.1);
    acc_loss += loss.item();
    acc_bpp += (c0.bits.item() + c1.bits.item() + c2.bits.item()) / (3.0 * pixels);
    acc_psnr += (psnr(x0, c0.xhat.detach()) + psnr(x1, c1.xhat.detach()) +
                 psnr(x2, c2.xhat.detach())) / 3.0;
    ++acc_n;
    if ((step + 1) % p.log_every == 0 || step + 1 == p.steps) {
      last_good = snapshot(params);
      if (log) {
        PretrainLog e;
        e.step = step + 1;
        e.loss = acc_loss / acc_n;
        e.bpp = acc_bpp / acc_n;
        e.psnr = acc_psnr / acc_n;
        e.mask = mask;
        e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        log(e);
      }
      acc_loss = acc_bpp = acc_psnr = 0;
      acc_n = 0;
    }
  }
  m.set_mask(0.0);

  std::vector<TensorF> calib;
  for (int i = 0; i < p.calibration_frames; ++i) {
    const auto& clip = corpus[std::size_t(i) % corpus.size()];
    calib.push_back(crop(clip[std::size_t(i) % clip.size()], 0, 0, p.crop));
  }
  RdConfig rd;
  rd.lambda = p.lambda;
  rd.distortion = p.distortion;
  rd.seed = p.seed;
  calibrate_prior(m, calib, rd, p.calibration_steps, p.prior_steps);
  return m;
}

void calibrate_prior(CodecModel& model, const std::vector<TensorF>& frames, const RdConfig& rd,
                     int steps_per_frame, int fit_steps) {
  std::map<std::int32_t, double> counts;
  {
    const CodecRuntime rt(model, model.config.decoder.patch);
    for (std::size_t i = 0; i < frames.size(); ++i) {
      FrameBuffer buffer;
      const UpdateState state = UpdateState::zeros(rt);
      FrameJob job;
      job.frame = frames[i];
      job.header.display = std::uint16_t(i);
      job.buffer = &buffer;
      job.state = &state;
      job.q_glob = model.config.qglob.weight(0);
      const OverfitResult r = overfit_frame(rt, job, rd, steps_per_frame);
      for (const auto& level : r.decision.psi_symbols)
        for (std::int32_t s : level) counts[s] += 1.0;
    }
  }
  const int half = model.config.prior_half_width;
  // Histogram with a light floor so unseen values keep some mass.
  std::vector<float> vals, weights;
  double total = 0;
  for (int v = -half; v <= half; ++v) {
    const double c = (counts.count(v) ? counts[v] : 0.0) + 0.05;
    vals.push_back(float(v));
    weights.push_back(float(c));
    total += c;
  }
  const Index n = Index(vals.size());
  const TensorF xs({n}, Eigen::Map<ArrayX<float>>(vals.data(), n));
  const TensorF ws({n}, Eigen::Map<ArrayX<float>>(weights.data(), n) / float(total));
  const auto params = model.prior.params();
  set_requires_grad(params, true);
  Adam<float> opt;
  opt.add(params, 1e-2);
  for (int s = 0; s < fit_steps; ++s) {
    const TensorF loss = sum(model.prior.bits(xs) * ws);
    backward(loss);
    opt.step(cosine_lr(s, fit_steps) * 0.9 + 0.1);
  }
  set_requires_grad(params, false);
  model.refresh_prior_table();
}

}  // namespace inrvc
