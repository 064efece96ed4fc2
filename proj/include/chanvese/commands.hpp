#pragma once

// Subcommands of the chanvese tool. Each returns a process exit status and
// writes artifacts only under RunConfig::outdir.

#include <cstdio>
#include <filesystem>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "chanvese/config.hpp"
#include "chanvese/cvloss.hpp"
#include "chanvese/fixtures.hpp"
#include "chanvese/metrics.hpp"
#include "chanvese/netpbm.hpp"
#include "chanvese/preprocess.hpp"
#include "chanvese/rgb_pipeline.hpp"
#include "chanvese/solver.hpp"

namespace chanvese {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Relative gradient error above which loss-demo fails.
inline constexpr double kGradCheckLimit = 1e-3;

/// Independent seed for a named random stream (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + (stream + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Fixed "%.12g" format used by every CSV.
inline std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace detail {

enum SeedStream : std::uint64_t { kGaussianNoise = 0, kSaltPepper = 3, kProbes = 6, kLogits = 7 };

/// A loaded input: either one channel or three.
struct Input {
  std::optional<GrayImage> gray;
  std::optional<RgbImage> rgb;
  std::size_t rows() const { return gray ? gray->rows() : rgb->rows(); }
  std::size_t cols() const { return gray ? gray->cols() : rgb->cols(); }
};

inline Input load_input(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  Input in;
  switch (sniff_netpbm(bytes)) {
    case NetpbmKind::Pgm: in.gray = load_pgm(bytes); break;
    case NetpbmKind::Ppm: in.rgb = load_ppm(bytes); break;
    case NetpbmKind::Unknown:
      throw NetpbmError(NetpbmError::Kind::BadMagic, "'" + path.string() + "' is not a binary PGM (P5) or PPM (P6)");
  }
  return in;
}

using GrayOp = std::function<GrayImage(const GrayImage&, std::size_t channel)>;

inline RgbImage map_channels(const RgbImage& img, const GrayOp& op) {
  return RgbImage(op(img.r(), 0), op(img.g(), 1), op(img.b(), 2));
}

inline LevelSet initial_level_set(const RunConfig& cfg, std::size_t rows, std::size_t cols) {
  if (cfg.radius > 0.0) {
    return init_circle(rows, cols, (static_cast<double>(cols) - 1.0) / 2.0, (static_cast<double>(rows) - 1.0) / 2.0,
                       cfg.radius, cfg.cv.h);
  }
  return default_init(rows, cols, cfg.cv.h);
}

inline GrayImage preprocess_for_segment(const RunConfig& cfg, const GrayImage& img, std::size_t channel) {
  GrayImage out = img;
  if (cfg.noise) {
    NoiseSpec spec = cfg.noise_spec;
    spec.kind = *cfg.noise;
    const std::uint64_t stream = (*cfg.noise == NoiseSpec::Kind::Gaussian ? kGaussianNoise : kSaltPepper) + channel;
    spec.seed = derive_seed(cfg.seed, stream);
    out = apply_noise(out, spec);
  }
  if (cfg.filter) {
    FilterSpec spec = cfg.filter_spec;
    spec.kind = *cfg.filter;
    out = apply_filter(out, spec);
  }
  return out;
}

inline std::string energy_csv(const std::vector<double>& trace) {
  std::string csv = "iteration,energy\n";
  for (std::size_t i = 0; i < trace.size(); ++i) csv += std::to_string(i) + "," + format_real(trace[i]) + "\n";
  return csv;
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NetpbmError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

// Input problems are usage errors; failures while writing artifacts are not.
inline void write_artifact(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  try {
    write_file(path, bytes);
  } catch (const IoError& e) {
    throw std::runtime_error(e.what());
  }
}

inline void write_artifact(const std::filesystem::path& path, const std::string& text) {
  write_artifact(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

inline void prepare_outdir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
}

}  // namespace detail

/// Segments a PGM (single channel) or PPM (per channel plus aggregation).
///
/// Writes mask.pgm and an overlay (overlay.pgm / overlay.ppm); RGB inputs also
/// get mask_r.pgm, mask_g.pgm and mask_b.pgm. With emit_trace, energy.csv (or
/// energy_{r,g,b}.csv) holds the energy per iteration.
inline int cmd_segment(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto input = detail::load_input(cfg.input);
    detail::prepare_outdir(cfg.outdir);
    const LevelSet init = detail::initial_level_set(cfg, input.rows(), input.cols());
    bool all_converged = true;

    if (input.gray) {
      const GrayImage img = detail::preprocess_for_segment(cfg, *input.gray, 0);
      const auto res = segment(img, init, cfg.cv);
      all_converged = res.converged;
      detail::write_artifact(cfg.outdir / "mask.pgm", save_pgm(mask_to_image(res.mask)));
      detail::write_artifact(cfg.outdir / "overlay.pgm", save_pgm(overlay_contour(img, res.mask)));
      if (cfg.emit_trace) detail::write_artifact(cfg.outdir / "energy.csv", detail::energy_csv(res.energy_trace));
      out << "iterations: " << res.iterations << "\n"
          << "final_energy: " << format_real(res.energy_trace.back()) << "\n"
          << "c1: " << format_real(res.final_c1) << "\n"
          << "c2: " << format_real(res.final_c2) << "\n";
    } else {
      const RgbImage img = detail::map_channels(
          *input.rgb, [&](const GrayImage& ch, std::size_t c) { return detail::preprocess_for_segment(cfg, ch, c); });
      const auto res = segment_rgb(img, init, cfg.cv, cfg.rule);
      detail::write_artifact(cfg.outdir / "mask.pgm", save_pgm(mask_to_image(res.mask)));
      detail::write_artifact(cfg.outdir / "mask_r.pgm", save_pgm(mask_to_image(res.channels.r)));
      detail::write_artifact(cfg.outdir / "mask_g.pgm", save_pgm(mask_to_image(res.channels.g)));
      detail::write_artifact(cfg.outdir / "mask_b.pgm", save_pgm(mask_to_image(res.channels.b)));
      detail::write_artifact(cfg.outdir / "overlay.ppm", save_ppm(overlay_contour(img, res.mask)));
      static constexpr const char* names[3] = {"r", "g", "b"};
      for (std::size_t c = 0; c < 3; ++c) {
        const auto& r = res.per_channel[c];
        all_converged = all_converged && r.converged;
        if (cfg.emit_trace) {
          detail::write_artifact(cfg.outdir / ("energy_" + std::string(names[c]) + ".csv"),
                                 detail::energy_csv(r.energy_trace));
        }
        out << names[c] << ".iterations: " << r.iterations << "\n"
            << names[c] << ".final_energy: " << format_real(r.energy_trace.back()) << "\n"
            << names[c] << ".c1: " << format_real(r.final_c1) << "\n"
            << names[c] << ".c2: " << format_real(r.final_c2) << "\n";
      }
      out << "rule: " << to_string(cfg.rule) << "\n";
    }
    if (!all_converged) {
      err << "warning: reached max_iters=" << cfg.cv.max_iters << " before phi became stationary\n";
    }
    return kExitOk;
  });
}

struct PipelineVariant {
  std::string file_stem;
  std::string label;
};

/// The nine preprocessing variants, in output order.
inline const std::vector<PipelineVariant>& pipeline_variants() {
  static const std::vector<PipelineVariant> v = {
      {"01_original", "Original Image"},
      {"02_gaussian_noisy", "Gaussian Noisy Image"},
      {"03_salt_pepper_noisy", "Salt and Pepper Noisy Image"},
      {"04_gaussian_filtered", "Gaussian Filtered"},
      {"05_median_filtered", "Median Filtered"},
      {"06_gaussian_salt_pepper", "Gaussian Salt and Pepper Image"},
      {"07_gaussian_salt_pepper_filtered", "Gaussian Salt and Pepper Filtered"},
      {"08_median_salt_pepper_filtered", "Median Salt and Pepper Filtered"},
      {"09_median_gaussian_salt_pepper_filtered", "Median Gaussian Salt and Pepper Filtered"},
  };
  return v;
}

/// Builds the nine variants of one channel, in pipeline_variants() order.
inline std::vector<GrayImage> pipeline_channel(const RunConfig& cfg, const GrayImage& original, std::size_t channel) {
  const auto& ns = cfg.noise_spec;
  const auto& fs = cfg.filter_spec;
  const auto gn_seed = derive_seed(cfg.seed, detail::kGaussianNoise + channel);
  const auto sp_seed = derive_seed(cfg.seed, detail::kSaltPepper + channel);

  const GrayImage gaussian_noisy = add_gaussian_noise(original, ns.mean, ns.sigma, gn_seed);
  const GrayImage sp_noisy = add_salt_pepper(original, ns.amount, ns.salt_ratio, sp_seed);
  const GrayImage gaussian_filtered = gaussian_filter(gaussian_noisy, fs.sigma, fs.kernel_size);
  const GrayImage median_filtered = median_filter(sp_noisy, fs.window);
  const GrayImage both_noisy = add_salt_pepper(gaussian_noisy, ns.amount, ns.salt_ratio, sp_seed);
  const GrayImage both_gaussian = gaussian_filter(both_noisy, fs.sigma, fs.kernel_size);
  const GrayImage both_median = median_filter(both_noisy, fs.window);
  const GrayImage both_median_gaussian = gaussian_filter(both_median, fs.sigma, fs.kernel_size);
  return {original,     gaussian_noisy, sp_noisy,      gaussian_filtered,    median_filtered,
          both_noisy,   both_gaussian,  both_median,   both_median_gaussian};
}

/// Writes the nine preprocessing variants and metrics.csv (label,mse,rmse
/// against the original).
inline int cmd_pipeline(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto input = detail::load_input(cfg.input);
    detail::prepare_outdir(cfg.outdir);
    const auto& variants = pipeline_variants();
    std::vector<double> errors(variants.size());

    if (input.gray) {
      const auto images = pipeline_channel(cfg, *input.gray, 0);
      for (std::size_t i = 0; i < variants.size(); ++i) {
        detail::write_artifact(cfg.outdir / (variants[i].file_stem + ".pgm"), save_pgm(images[i]));
        errors[i] = mse(images[i], images[0]);
      }
    } else {
      std::array<std::vector<GrayImage>, 3> per_channel;
      for (std::size_t c = 0; c < 3; ++c) per_channel[c] = pipeline_channel(cfg, input.rgb->channel(c), c);
      for (std::size_t i = 0; i < variants.size(); ++i) {
        const RgbImage img(per_channel[0][i], per_channel[1][i], per_channel[2][i]);
        detail::write_artifact(cfg.outdir / (variants[i].file_stem + ".ppm"), save_ppm(img));
        errors[i] = mse(img, *input.rgb);
      }
    }

    std::string csv = "label,mse,rmse\n";
    for (std::size_t i = 0; i < variants.size(); ++i) {
      csv += variants[i].label + "," + format_real(errors[i]) + "," + format_real(std::sqrt(errors[i])) + "\n";
      out << variants[i].label << ": mse=" << format_real(errors[i]) << " rmse=" << format_real(std::sqrt(errors[i]))
          << "\n";
    }
    detail::write_artifact(cfg.outdir / "metrics.csv", csv);
    return kExitOk;
  });
}

/// Checks the analytic loss gradient against finite differences, then refines
/// seeded logits by gradient descent. Writes loss_trace.csv and mask.pgm.
inline int cmd_loss_demo(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto input = detail::load_input(cfg.input);
    const RgbImage img = input.rgb ? *input.rgb : RgbImage(*input.gray, *input.gray, *input.gray);
    detail::prepare_outdir(cfg.outdir);

    const PredictionField pred0 =
        seeded_logits(img.rows(), img.cols(), derive_seed(cfg.seed, detail::kLogits));

    NoiseRng probe_rng(derive_seed(cfg.seed, detail::kProbes));
    std::vector<std::size_t> probes(static_cast<std::size_t>(cfg.probes));
    for (auto& p : probes) p = static_cast<std::size_t>(probe_rng.below(img.rows() * img.cols()));
    const auto analytic_full = cv_loss_grad(img, pred0, cfg.loss);
    std::vector<double> analytic;
    for (auto p : probes) analytic.push_back(analytic_full[p]);
    const auto numeric = finite_diff_grad(img, pred0, cfg.loss, 1e-4, probes);
    const double grad_err = max_relative_error(analytic, numeric);
    out << "max_gradient_relative_error: " << format_real(grad_err) << "\n";
    if (grad_err > kGradCheckLimit) {
      err << "error: gradient check failed (" << format_real(grad_err) << " > " << format_real(kGradCheckLimit)
          << ")\n";
      return kExitFailure;
    }

    const auto res = refine(img, pred0, cfg.loss, cfg.lr, cfg.steps);
    std::string csv = "step,total\n";
    for (std::size_t i = 0; i < res.loss_trace.size(); ++i) {
      csv += std::to_string(i) + "," + format_real(res.loss_trace[i]) + "\n";
    }
    detail::write_artifact(cfg.outdir / "loss_trace.csv", csv);
    detail::write_artifact(cfg.outdir / "mask.pgm", save_pgm(mask_to_image(threshold_logits(res.field))));
    out << "initial_loss: " << format_real(res.loss_trace.front()) << "\n"
        << "final_loss: " << format_real(res.loss_trace.back()) << "\n";
    return kExitOk;
  });
}

/// Writes the synthetic disk fixtures used by the tests.
inline int cmd_make_fixtures(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    detail::prepare_outdir(cfg.outdir);
    detail::write_artifact(cfg.outdir / "disk_gray.pgm", save_pgm(fixtures::disk_image()));
    detail::write_artifact(cfg.outdir / "disk_rgb.ppm", save_ppm(fixtures::disk_rgb()));
    detail::write_artifact(cfg.outdir / "disk_truth.pgm", save_pgm(mask_to_image(fixtures::disk_truth())));
    out << "wrote fixtures to " << cfg.outdir.string() << "\n";
    return kExitOk;
  });
}

inline const char* usage_text() {
  return "usage: chanvese <command> [options]\n"
         "\n"
         "commands:\n"
         "  segment        segment a PGM or PPM image\n"
         "  pipeline       write the nine noise/filter variants and metrics.csv\n"
         "  loss-demo      gradient-check and refine the RGB Chan-Vese loss\n"
         "  make-fixtures  write the synthetic disk fixtures\n"
         "\n"
         "options:\n"
         "  --config FILE  flat JSON config (keys are the option names with '_')\n"
         "  --input PATH --outdir DIR --seed N --trace\n"
         "  --mu --nu --lambda1 --lambda2 --dt --eps --h --stationary-fraction\n"
         "  --max-iters --reinit-every --reinit-steps --radius\n"
         "  --noise none|gaussian|salt_pepper --noise-mean --sigma --amount --salt-ratio\n"
         "  --filter none|gaussian|median --filter-sigma --kernel-size --window\n"
         "  --rule AND|OR|MAJORITY\n"
         "  --mu-smooth --eps-tanh --lr --steps --probes\n";
}

/// Entry point shared by the executable and the tests. args excludes argv[0].
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty() || args[0] == "--help" || args[0] == "-h" || args[0] == "help") {
    (args.empty() ? err : out) << usage_text();
    return args.empty() ? kExitUsage : kExitOk;
  }
  const std::string& command = args[0];
  RunConfig cfg;
  try {
    cfg = parse_config(std::vector<std::string>(args.begin() + 1, args.end()));
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (command == "segment") return cmd_segment(cfg, out, err);
  if (command == "pipeline") return cmd_pipeline(cfg, out, err);
  if (command == "loss-demo") return cmd_loss_demo(cfg, out, err);
  if (command == "make-fixtures") return cmd_make_fixtures(cfg, out, err);
  err << "error: unknown command '" << command << "'\n" << usage_text();
  return kExitUsage;
}

}  // namespace chanvese
