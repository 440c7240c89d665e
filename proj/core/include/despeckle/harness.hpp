#pragma once

#include <functional>
#include <string>
#include <vector>

#include "despeckle/config.hpp"
#include "despeckle/manifest.hpp"

namespace despeckle {

/// Per-invocation switches that are not part of the config proper.
struct HarnessOptions {
  bool force = false;  // allow overwriting existing outputs
};

/// Runs fn(0..n-1) across up to `workers` threads. Tasks must be independent;
/// the first exception thrown by any task is rethrown after all tasks finish.
void parallel_for(size_t n, int workers, const std::function<void(size_t)>& fn);

/// Speckles every PGM in input_dir, `realizations` times each, writing
/// <stem>_rNN.pgm. Per-output seeds are noise_seed + index*stride +
/// realization with stride = max(10, realizations).
RunManifest cmd_simulate(const std::string& input_dir, const std::string& out_dir, const Config& cfg,
                         const HarnessOptions& opt);

/// Extracts patches from the PGMs in input_dir, speckles them, trains the
/// unrolled model, and writes checkpoint.dspk, loss.txt (one row per epoch)
/// and the manifest.
RunManifest cmd_train(const std::string& input_dir, const std::string& out_dir, const Config& cfg,
                      const HarnessOptions& opt);

/// Despeckles input_path (file or directory). infer_tau < 0 selects the
/// checkpoint's training tau. When ref_path is given, PSNR/SSIM per image
/// are emitted alongside.
RunManifest cmd_denoise(const std::string& checkpoint, const std::string& input_path,
                        const std::string& ref_path, const std::string& out_dir, const Config& cfg,
                        const HarnessOptions& opt);

/// One despeckled output per tau plus sweep.txt listing tau,
/// high-frequency energy (at config hfe_cutoff) and PSNR when a reference
/// is supplied.
RunManifest cmd_sweep_tau(const std::string& checkpoint, const std::string& image_path,
                          const std::vector<double>& taus, const std::string& ref_path,
                          const std::string& out_dir, const Config& cfg, const HarnessOptions& opt);

/// Sign-gradient attack against the checkpoint's predict pipeline; writes
/// adversarial.pgm, delta.pgm (min-max rescaled |f_adv - f|) and the report.
/// attack_epsilon == 0 short-circuits to f_adv = f.
RunManifest cmd_attack(const std::string& checkpoint, const std::string& noisy_path,
                       const std::string& clean_path, const std::string& out_dir, const Config& cfg,
                       const HarnessOptions& opt);

enum class EvalMode { FullReference, ReferenceFree };

/// FullReference: a = clean references, b = test images -> PSNR/SSIM.
/// ReferenceFree: a = noisy originals, b = denoised -> ENL/Cx/EPD-ROA.
/// Files pair up by sorted order; a trailing "mean" row averages the finite
/// entries per column.
RunManifest cmd_evaluate(EvalMode mode, const std::string& a_path, const std::string& b_path,
                         const std::string& out_dir, const Config& cfg, const HarnessOptions& opt);

/// Plain implicit heat steps on one image (no model).
RunManifest cmd_diffuse(const std::string& input_path, double tau, int steps, const std::string& out_dir,
                        const Config& cfg, const HarnessOptions& opt);

}  // namespace despeckle
