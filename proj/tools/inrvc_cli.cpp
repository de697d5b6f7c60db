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


// inrvc command-line front end.
//
// Exit status: 0 success, 2 format error (unreadable container, frames or
// checkpoint), 3 corrupt stream, 4 configuration error (bad arguments,
// checkpoint mismatch), 1 anything else.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "inrvc/errors.hpp"
#include "inrvc/io.hpp"
#include "inrvc/metrics.hpp"
#include "inrvc/pipeline.hpp"
#include "inrvc/pretrain.hpp"
#include "inrvc/synthetic.hpp"

using namespace inrvc;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kOther = 1, kFormat = 2, kCorrupt = 3, kConfig = 4 };

GopMode parse_mode(const std::string& s) {
  if (s == "ld") return GopMode::kLowDelay;
  if (s == "ra") return GopMode::kRandomAccess;
  throw ConfigError("mode must be ld or ra");
}

DistortionKind parse_distortion(const std::string& s) {
  if (s == "mse") return DistortionKind::kMse;
  if (s == "ms-ssim") return DistortionKind::kMsSsim;
  throw ConfigError("distortion must be mse or ms-ssim");
}

std::string read_text(const std::string& path) {
  const auto b = read_file(path);
  return std::string(b.begin(), b.end());
}

void write_text(const std::string& path, const std::string& s) {
  write_file(path, std::vector<std::uint8_t>(s.begin(), s.end()));
}

CodecModel load_model(const std::string& path) {
  try {
    return load_checkpoint(path);
  } catch (const IoError&) {
    throw;
  }
}

struct CodingArgs {
  std::string mode = "ld";
  int gop = 1;
  int intra_period = 0;
  double lambda = 256.0;
  int overfit_steps = -1;
  std::string distortion = "mse";

  EncodeOptions options() const {
    EncodeOptions o;
    o.mode = parse_mode(mode);
    o.gop_length = o.mode == GopMode::kLowDelay ? 1 : gop;
    o.intra_period = intra_period;
    o.rd.lambda = lambda;
    o.rd.distortion = parse_distortion(distortion);
    o.overfit_steps = overfit_steps;
    return o;
  }

  void add(CLI::App* c) {
    c->add_option("--mode", mode, "GOP structure: ld or ra")->capture_default_str();
    c->add_option("--gop", gop, "GOP length (random access, power of two)")->capture_default_str();
    c->add_option("--intra-period", intra_period, "intra period in frames, 0 = first frame only")
        ->capture_default_str();
    c->add_option("--lambda", lambda, "rate-distortion trade-off")->capture_default_str();
    c->add_option("--overfit-steps", overfit_steps,
                  "optimisation steps per frame, -1 = 300 intra / 100 inter")
        ->capture_default_str();
    c->add_option("--distortion", distortion, "mse or ms-ssim")->capture_default_str();
  }
};

void print_frame(const FrameReport& f) {
  static const char* kType = "IPB";
  std::fprintf(stderr, "frame %3d %c  %6zu bytes  %6.2f dB  J %.4f -> %.4f (step %d)  %.1fs\n",
               f.display, kType[int(f.type)], f.bytes, f.psnr, f.initial_objective,
               f.best_objective, f.best_step, f.seconds);
}

Corpus load_corpus(const std::string& spec, int clips, Index size, int frames, std::uint64_t seed) {
  if (spec == "synthetic") return synthetic_corpus(clips, size, size, frames, seed);
  // A directory of frames is one clip; a directory of directories is many.
  Corpus out;
  std::vector<std::string> dirs;
  for (const auto& e : fs::directory_iterator(spec)) {
    if (e.is_directory()) dirs.push_back(e.path().string());
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) dirs.push_back(spec);
  for (const auto& d : dirs) out.push_back(read_frames(d));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"inrvc: implicit neural video codec"};
  app.require_subcommand(1);

  // encode
  std::string in, out, ckpt, recon;
  CodingArgs coding;
  auto* enc = app.add_subcommand("encode", "compress a frame sequence");
  enc->add_option("--input", in, "PPM directory or .rgb file with sidecar")->required();
  enc->add_option("--output", out, "bitstream path")->required();
  enc->add_option("--checkpoint", ckpt, "pretrained model")->required();
  enc->add_option("--recon", recon, "also write the encoder-side reconstruction here");
  coding.add(enc);

  // decode
  auto* dec = app.add_subcommand("decode", "reconstruct frames from a bitstream");
  dec->add_option("--input", in, "bitstream path")->required();
  dec->add_option("--output", out, "PPM directory or .rgb file")->required();
  dec->add_option("--checkpoint", ckpt, "pretrained model")->required();

  // metrics
  std::string ref_path, test_path, stream_path;
  auto* met = app.add_subcommand("metrics", "PSNR and MS-SSIM between two sequences");
  met->add_option("--ref", ref_path, "reference frames")->required();
  met->add_option("--test", test_path, "test frames")->required();
  met->add_option("--bitstream", stream_path, "report bpp of this stream as well");

  // sweep
  std::vector<double> lambdas;
  std::string csv;
  int synth_frames = 8;
  Index synth_size = 64;
  auto* sw = app.add_subcommand("sweep", "encode at several lambdas and write an RD curve");
  sw->add_option("--lambdas", lambdas, "comma-separated lambda values")->required()->delimiter(',');
  sw->add_option("--csv", csv, "output CSV")->required();
  sw->add_option("--checkpoint", ckpt, "pretrained model")->required();
  sw->add_option("--input", in, "frames; a synthetic clip is used when omitted");
  sw->add_option("--frames", synth_frames, "synthetic clip length")->capture_default_str();
  sw->add_option("--size", synth_size, "synthetic clip size")->capture_default_str();
  coding.add(sw);

  // bdrate
  std::string anchor_csv, quality = "psnr";
  auto* bd = app.add_subcommand("bdrate", "Bjontegaard rate difference of two RD curves");
  bd->add_option("--test", test_path, "test CSV")->required();
  bd->add_option("--anchor", anchor_csv, "anchor CSV")->required();
  bd->add_option("--quality", quality, "psnr or ms_ssim")->capture_default_str();

  // pretrain
  std::string corpus_spec = "synthetic";
  PretrainConfig pc;
  std::string pre_distortion = "mse";
  int corpus_clips = 16, corpus_frames = 8;
  Index corpus_size = 96;
  Index patch = 32;
  bool uneven = true, concat = false, scaled_pe = true;
  auto* pre = app.add_subcommand("pretrain", "train a model on a corpus");
  pre->set_config("--config", "", "INI/TOML file with any of these options");
  pre->add_option("--corpus", corpus_spec, "'synthetic', a PPM directory, or a directory of them")
      ->capture_default_str();
  pre->add_option("--out", out, "checkpoint path")->required();
  pre->add_option("--steps", pc.steps)->capture_default_str();
  pre->add_option("--crop", pc.crop)->capture_default_str();
  pre->add_option("--lambda", pc.lambda)->capture_default_str();
  pre->add_option("--lr", pc.lr)->capture_default_str();
  pre->add_option("--distortion", pre_distortion)->capture_default_str();
  pre->add_option("--seed", pc.seed)->capture_default_str();
  pre->add_option("--clips", corpus_clips, "synthetic corpus size")->capture_default_str();
  pre->add_option("--clip-frames", corpus_frames)->capture_default_str();
  pre->add_option("--clip-size", corpus_size)->capture_default_str();
  pre->add_option("--patch", patch, "inference patch size")->capture_default_str();
  pre->add_option("--uneven-groups", uneven)->capture_default_str();
  pre->add_option("--concat-fusion", concat)->capture_default_str();
  pre->add_option("--scaled-pe", scaled_pe)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*enc) {
      const CodecModel model = load_model(ckpt);
      const auto frames = read_frames(in);
      const EncodeResult r = encode_sequence(model, frames, coding.options(), print_frame);
      write_file(out, r.bytes);
      if (!recon.empty()) write_frames(r.reconstruction, recon);
      std::printf("frames %zu  bytes %zu  bpp %.4f  psnr %.3f  ms_ssim %.5f\n", frames.size(),
                  r.bytes.size(), r.bpp, r.psnr, r.ms_ssim);
    } else if (*dec) {
      const CodecModel model = load_model(ckpt);
      const DecodeResult r = decode_sequence(model, read_file(in));
      write_frames(r.frames, out);
      std::printf("frames %zu  %dx%d\n", r.frames.size(), r.header.width, r.header.height);
    } else if (*met) {
      const auto a = read_frames(ref_path), b = read_frames(test_path);
      std::printf("psnr %.4f\nms_ssim %.6f\n", mean_psnr(a, b), mean_ms_ssim(a, b));
      if (!stream_path.empty()) {
        const auto bytes = read_file(stream_path);
        std::printf("bpp %.6f\n", measure_bpp(bytes.size(), a.size(), a[0].dim(2), a[0].dim(3)));
      }
    } else if (*sw) {
      const CodecModel model = load_model(ckpt);
      std::vector<TensorF> frames;
      if (!in.empty()) {
        frames = read_frames(in);
      } else {
        frames = synthetic_clip(SceneConfig{SceneKind::kMixed, synth_size, synth_size, synth_frames,
                                            1.5, 2024});
      }
      const auto rows = lambda_sweep(model, frames, lambdas, coding.options(), [](const RdRow& r) {
        std::fprintf(stderr, "lambda %g  bpp %.4f  psnr %.3f  ms_ssim %.5f\n", r.lambda, r.bpp,
                     r.psnr, r.ms_ssim);
      });
      write_text(csv, rd_csv(rows));
    } else if (*bd) {
      if (quality != "psnr" && quality != "ms_ssim") throw ConfigError("quality must be psnr or ms_ssim");
      auto curve = [&](const std::string& path) {
        std::vector<RdPoint> pts;
        for (const auto& r : parse_rd_csv(read_text(path))) {
          pts.push_back({r.bpp, quality == "psnr" ? r.psnr : r.ms_ssim});
        }
        return pts;
      };
      std::printf("bd_rate %.4f %%\n", bd_rate(curve(test_path), curve(anchor_csv)));
    } else if (*pre) {
      pc.distortion = parse_distortion(pre_distortion);
      const Corpus corpus = load_corpus(corpus_spec, corpus_clips, corpus_size, corpus_frames, pc.seed);
      CodecConfig cfg = default_config();
      cfg.decoder.patch = patch;
      cfg.decoder.scaled_pe = scaled_pe;
      cfg.entropy.uneven_groups = uneven;
      cfg.entropy.fusion = concat ? Fusion::kConcat : Fusion::kModulation;
      cfg.seed = pc.seed;
      pc.rescue_path = out + ".rescue";
      const CodecModel m = pretrain(corpus, cfg, pc, [](const PretrainLog& e) {
        std::fprintf(stderr, "step %5d  loss %.4f  bpp %.4f  psnr %.2f  mask %.3f  %.0fs\n", e.step,
                     e.loss, e.bpp, e.psnr, e.mask, e.seconds);
      });
      save_checkpoint(m, out);
      std::printf("checkpoint %s  hash %016llx\n", out.c_str(),
                  static_cast<unsigned long long>(checkpoint_hash(m)));
    }
    return kOk;
  } catch (const CorruptError& e) {
    std::cerr << e.what() << '\n';
    return kCorrupt;
  } catch (const FormatError& e) {
    std::cerr << e.what() << '\n';
    return kFormat;
  } catch (const VersionError& e) {
    std::cerr << e.what() << '\n';
    return kFormat;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kConfig;
  } catch (const ParamError& e) {
    std::cerr << e.what() << '\n';
    return kConfig;
  } catch (const IoError& e) {
    std::cerr << e.what() << '\n';
    return kFormat;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
}
