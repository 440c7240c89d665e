#include "despeckle/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "despeckle/attack.hpp"
#include "despeckle/checkpoint.hpp"
#include "despeckle/error.hpp"
#include "despeckle/image.hpp"
#include "despeckle/metrics.hpp"
#include "despeckle/model.hpp"
#include "despeckle/patches.hpp"
#include "despeckle/pgm.hpp"
#include "despeckle/speckle.hpp"
#include "despeckle/spectral.hpp"

namespace despeckle {

namespace fs = std::filesystem;

namespace {

std::vector<fs::path> collect_pgms(const std::string& path) {
  std::vector<fs::path> out;
  fs::path p(path);
  if (fs::is_regular_file(p)) {
    out.push_back(p);
  } else if (fs::is_directory(p)) {
    for (const auto& e : fs::directory_iterator(p))
      if (e.is_regular_file() && e.path().extension() == ".pgm") out.push_back(e.path());
    std::sort(out.begin(), out.end());
  } else {
    throw Error("no such file or directory: " + path);
  }
  return out;
}

void ensure_out_dir(const std::string& out_dir) {
  fs::create_directories(out_dir);
}

void refuse_existing(const std::vector<std::string>& paths, bool force) {
  if (force) return;
  for (const auto& p : paths)
    if (fs::exists(p)) throw Error(p + " already exists (pass --force to overwrite)");
}

// Quantize a Unit image exactly the way write_pgm will (round half-up).
Image quantize_byte(const Image& unit) {
  Image b = to_byte(unit);
  for (double& v : b.pixels) v = std::clamp(std::floor(v + 0.5), 0.0, 255.0);
  return b;
}

void write_pgm_atomic(const Image& byte_img, const std::string& path) {
  const std::string tmp = path + ".tmp";
  write_pgm(byte_img, tmp);
  fs::rename(tmp, path);
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Resolved tau for inference commands: explicit config value, or the
// checkpoint's training tau when negative.
double resolve_tau(const Config& cfg, const TrainingMeta& meta) {
  const double t = cfg.get_double("infer_tau");
  return t < 0.0 ? meta.tau_train : t;
}

MetricsRow mean_row(const std::vector<MetricsRow>& rows) {
  MetricsRow mean;
  mean.name = "mean";
  if (rows.empty()) return mean;
  for (const auto& [key, unused] : rows.front().values) {
    double acc = 0.0;
    int n = 0;
    for (const auto& row : rows) {
      for (const auto& [k, v] : row.values) {
        if (k == key && std::isfinite(v)) {
          acc += v;
          ++n;
        }
      }
    }
    mean.values.emplace_back(key, n > 0 ? acc / n : std::numeric_limits<double>::quiet_NaN());
  }
  return mean;
}

std::string metrics_table(const std::vector<MetricsRow>& rows) {
  std::ostringstream out;
  if (rows.empty()) return "";
  out << "image";
  for (const auto& [k, v] : rows.front().values) out << '\t' << k;
  out << '\n';
  for (const auto& row : rows) {
    out << row.name;
    for (const auto& [k, v] : row.values) out << '\t' << fmt(v);
    out << '\n';
  }
  return out.str();
}

}  // namespace

void parallel_for(size_t n, int workers, const std::function<void(size_t)>& fn) {
  if (workers < 1) workers = 1;
  const size_t nthreads = std::min<size_t>(static_cast<size_t>(workers), n);
  if (nthreads <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (size_t t = 0; t < nthreads; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        const size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

RunManifest cmd_simulate(const std::string& input_dir, const std::string& out_dir, const Config& cfg,
                         const HarnessOptions& opt) {
  const auto inputs = collect_pgms(input_dir);
  if (inputs.empty()) throw Error("cmd_simulate: no .pgm inputs in " + input_dir);
  const int looks = cfg.get_int("noise_looks");
  const uint64_t seed = cfg.get_u64("noise_seed");
  const int realizations = cfg.get_int("realizations");
  if (realizations < 1) throw Error("cmd_simulate: realizations must be >= 1");
  const uint64_t stride = static_cast<uint64_t>(std::max(10, realizations));

  ensure_out_dir(out_dir);
  RunManifest manifest;
  manifest.command = "simulate";
  manifest.config_snapshot = cfg.entries();
  manifest.seeds["noise_seed"] = seed;

  std::vector<std::string> out_paths;
  for (size_t i = 0; i < inputs.size(); ++i) {
    manifest.input_hashes[inputs[i].filename().string()] = hash_file(inputs[i].string());
    for (int r = 0; r < realizations; ++r) {
      char suffix[24];
      std::snprintf(suffix, sizeof(suffix), "_r%02d.pgm", r);
      out_paths.push_back((fs::path(out_dir) / (inputs[i].stem().string() + suffix)).string());
    }
  }
  const std::string manifest_path = (fs::path(out_dir) / "simulate_manifest.json").string();
  refuse_existing(out_paths, opt.force);
  refuse_existing({manifest_path}, opt.force);

  std::mutex hash_mutex;
  parallel_for(inputs.size() * static_cast<size_t>(realizations), cfg.get_int("workers"), [&](size_t task) {
    const size_t i = task / static_cast<size_t>(realizations);
    const int r = static_cast<int>(task % static_cast<size_t>(realizations));
    const Image clean = to_unit(read_pgm(inputs[i].string()));
    NoiseSpec spec{looks, seed + static_cast<uint64_t>(i) * stride + static_cast<uint64_t>(r)};
    const Image noisy = quantize_byte(apply_speckle(clean, spec));
    const std::string& path = out_paths[task];
    write_pgm_atomic(noisy, path);
    std::lock_guard<std::mutex> lock(hash_mutex);
    manifest.output_hashes[fs::path(path).filename().string()] = hash_file(path);
  });

  manifest.write(manifest_path);
  return manifest;
}

RunManifest cmd_train(const std::string& input_dir, const std::string& out_dir, const Config& cfg,
                      const HarnessOptions& opt) {
  const auto inputs = collect_pgms(input_dir);
  if (inputs.empty()) throw Error("cmd_train: no .pgm inputs in " + input_dir);

  ensure_out_dir(out_dir);
  const std::string ckpt_path = (fs::path(out_dir) / "checkpoint.dspk").string();
  const std::string loss_path = (fs::path(out_dir) / "loss.txt").string();
  const std::string manifest_path = (fs::path(out_dir) / "train_manifest.json").string();
  refuse_existing({ckpt_path, loss_path, manifest_path}, opt.force);

  RunManifest manifest;
  manifest.command = "train";
  manifest.config_snapshot = cfg.entries();
  manifest.seeds["train_seed"] = cfg.get_u64("train_seed");
  manifest.seeds["noise_seed"] = cfg.get_u64("noise_seed");

  std::vector<Image> images;
  for (const auto& p : inputs) {
    manifest.input_hashes[p.filename().string()] = hash_file(p.string());
    images.push_back(to_unit(read_pgm(p.string())));
  }

  PatchSet set = extract_patches(images, cfg.get_int("train_patch_size"), cfg.get_int("train_patch_count"),
                                 cfg.get_u64("train_seed"));
  NoiseSpec noise{cfg.get_int("noise_looks"), cfg.get_u64("noise_seed")};
  speckle_patchset(set, noise);

  ModelConfig mc;
  mc.depth = cfg.get_int("model_depth");
  mc.channels = cfg.get_int("model_channels");
  mc.tau_train = cfg.get_double("model_tau_train");
  mc.tied = cfg.get_bool("model_tied");
  UnrolledNet net(mc, cfg.get_u64("train_seed"));

  TrainSchedule schedule;
  schedule.epochs = cfg.get_int("train_epochs");
  schedule.batch = cfg.get_int("train_batch");
  schedule.lr = cfg.get_double("train_lr");
  schedule.lr_drop_epoch = cfg.get_int("train_lr_drop_epoch");
  schedule.lr_after = cfg.get_double("train_lr_after");
  schedule.seed = cfg.get_u64("train_seed");
  schedule.deterministic = cfg.get_bool("deterministic");

  const TrainResult result = train(net, set, noise, schedule);

  TrainingMeta meta;
  meta.tau_train = mc.tau_train;
  meta.looks = noise.looks;
  meta.epochs = schedule.epochs;
  meta.batch = schedule.batch;
  meta.lr = schedule.lr;
  meta.lr_drop_epoch = schedule.lr_drop_epoch;
  meta.lr_after = schedule.lr_after;
  meta.seed = schedule.seed;

  const std::string ckpt_tmp = ckpt_path + ".tmp";
  save_checkpoint(net, meta, ckpt_tmp);
  fs::rename(ckpt_tmp, ckpt_path);

  std::ostringstream loss;
  for (size_t e = 0; e < result.epoch_losses.size(); ++e)
    loss << (e + 1) << ' ' << fmt(result.epoch_losses[e]) << '\n';
  write_file_atomic(loss_path, loss.str());

  manifest.checkpoint_hash = hash_file(ckpt_path);
  manifest.output_hashes["checkpoint.dspk"] = manifest.checkpoint_hash;
  manifest.output_hashes["loss.txt"] = hash_file(loss_path);
  manifest.write(manifest_path);
  return manifest;
}

RunManifest cmd_denoise(const std::string& checkpoint, const std::string& input_path,
                        const std::string& ref_path, const std::string& out_dir, const Config& cfg,
                        const HarnessOptions& opt) {
  LoadedCheckpoint loaded = load_checkpoint(checkpoint);
  const double tau = resolve_tau(cfg, loaded.meta);
  if (tau < 0.0) throw Error("cmd_denoise: tau must be nonnegative");
  const double c = log_speckle_bias(loaded.meta.looks);

  const auto inputs = collect_pgms(input_path);
  if (inputs.empty()) throw Error("cmd_denoise: no inputs at " + input_path);
  std::vector<fs::path> refs;
  if (!ref_path.empty()) {
    refs = collect_pgms(ref_path);
    if (refs.size() != inputs.size())
      throw Error("cmd_denoise: reference count does not match input count");
  }

  ensure_out_dir(out_dir);
  std::vector<std::string> out_paths;
  for (const auto& p : inputs)
    out_paths.push_back((fs::path(out_dir) / (p.stem().string() + "_denoised.pgm")).string());
  const std::string manifest_path = (fs::path(out_dir) / "denoise_manifest.json").string();
  const std::string metrics_path = (fs::path(out_dir) / "metrics.jsonl").string();
  refuse_existing(out_paths, opt.force);
  refuse_existing({manifest_path, metrics_path}, opt.force);

  RunManifest manifest;
  manifest.command = "denoise";
  manifest.config_snapshot = cfg.entries();
  manifest.config_snapshot["infer_tau"] = fmt(tau);  // record the tau actually used
  manifest.checkpoint_hash = hash_file(checkpoint);
  for (const auto& p : inputs) manifest.input_hashes[p.filename().string()] = hash_file(p.string());
  for (const auto& p : refs) manifest.input_hashes[p.filename().string()] = hash_file(p.string());

  std::vector<MetricsRow> rows(inputs.size());
  std::mutex manifest_mutex;
  parallel_for(inputs.size(), cfg.get_int("workers"), [&](size_t i) {
    const Image noisy = to_unit(read_pgm(inputs[i].string()));
    const Image restored = predict_image(loaded.net, noisy, tau, c);
    const Image byte_img = quantize_byte(restored);
    write_pgm_atomic(byte_img, out_paths[i]);
    MetricsRow row;
    row.name = inputs[i].filename().string();
    if (!refs.empty()) {
      const Image ref = read_pgm(refs[i].string());
      row.values.emplace_back("psnr", psnr(ref, byte_img));
      row.values.emplace_back("ssim", ssim(ref, byte_img));
    }
    rows[i] = std::move(row);
    std::lock_guard<std::mutex> lock(manifest_mutex);
    manifest.output_hashes[fs::path(out_paths[i]).filename().string()] = hash_file(out_paths[i]);
  });

  if (!refs.empty()) {
    rows.push_back(mean_row(rows));
    manifest.metrics = rows;
    write_file_atomic(metrics_path, metrics_rows_to_jsonl(rows));
    manifest.output_hashes["metrics.jsonl"] = hash_file(metrics_path);
  }
  manifest.write(manifest_path);
  return manifest;
}

RunManifest cmd_sweep_tau(const std::string& checkpoint, const std::string& image_path,
                          const std::vector<double>& taus, const std::string& ref_path,
                          const std::string& out_dir, const Config& cfg, const HarnessOptions& opt) {
  if (taus.empty()) throw Error("cmd_sweep_tau: tau list must be nonempty");
  for (double t : taus)
    if (t < 0.0) throw Error("cmd_sweep_tau: taus must be nonnegative");

  LoadedCheckpoint loaded = load_checkpoint(checkpoint);
  const double c = log_speckle_bias(loaded.meta.looks);
  const double cutoff = cfg.get_double("hfe_cutoff");

  const Image noisy_byte = read_pgm(image_path);
  const Image noisy = to_unit(noisy_byte);
  Image ref;
  const bool have_ref = !ref_path.empty();
  if (have_ref) ref = read_pgm(ref_path);

  ensure_out_dir(out_dir);
  const fs::path stem = fs::path(image_path).stem();
  std::vector<std::string> out_paths;
  for (size_t k = 0; k < taus.size(); ++k) {
    char suffix[24];
    std::snprintf(suffix, sizeof(suffix), "_tau%02zu.pgm", k);
    out_paths.push_back((fs::path(out_dir) / (stem.string() + suffix)).string());
  }
  const std::string table_path = (fs::path(out_dir) / "sweep.txt").string();
  const std::string manifest_path = (fs::path(out_dir) / "sweep_manifest.json").string();
  refuse_existing(out_paths, opt.force);
  refuse_existing({table_path, manifest_path}, opt.force);

  RunManifest manifest;
  manifest.command = "sweep-tau";
  manifest.config_snapshot = cfg.entries();
  manifest.checkpoint_hash = hash_file(checkpoint);
  manifest.input_hashes[fs::path(image_path).filename().string()] = hash_file(image_path);
  if (have_ref) manifest.input_hashes[fs::path(ref_path).filename().string()] = hash_file(ref_path);

  std::vector<MetricsRow> rows(taus.size());
  std::mutex manifest_mutex;
  parallel_for(taus.size(), cfg.get_int("workers"), [&](size_t k) {
    const Image restored = predict_image(loaded.net, noisy, taus[k], c);
    const Image byte_img = quantize_byte(restored);
    write_pgm_atomic(byte_img, out_paths[k]);
    MetricsRow row;
    char name[32];
    std::snprintf(name, sizeof(name), "tau=%.6f", taus[k]);
    row.name = name;
    row.values.emplace_back("tau", taus[k]);
    row.values.emplace_back("high_freq_energy", high_freq_energy(to_array(restored), cutoff));
    if (have_ref) row.values.emplace_back("psnr", psnr(ref, byte_img));
    rows[k] = std::move(row);
    std::lock_guard<std::mutex> lock(manifest_mutex);
    manifest.output_hashes[fs::path(out_paths[k]).filename().string()] = hash_file(out_paths[k]);
  });

  manifest.metrics = rows;
  write_file_atomic(table_path, metrics_table(rows));
  manifest.output_hashes["sweep.txt"] = hash_file(table_path);
  manifest.write(manifest_path);
  return manifest;
}

RunManifest cmd_attack(const std::string& checkpoint, const std::string& noisy_path,
                       const std::string& clean_path, const std::string& out_dir, const Config& cfg,
                       const HarnessOptions& opt) {
  LoadedCheckpoint loaded = load_checkpoint(checkpoint);
  const double tau = resolve_tau(cfg, loaded.meta);
  const double c = log_speckle_bias(loaded.meta.looks);

  const Image noisy = to_unit(read_pgm(noisy_path));
  const Image clean = to_unit(read_pgm(clean_path));
  if (!noisy.same_shape(clean)) throw Error("cmd_attack: noisy/clean shape mismatch");

  AttackConfig acfg;
  acfg.epsilon = cfg.get_double("attack_epsilon");
  acfg.alpha = cfg.get_double("attack_alpha");
  acfg.steps = cfg.get_int("attack_steps");
  acfg.seed = cfg.get_u64("attack_seed");
  acfg.random_start = cfg.get_bool("attack_random_start");

  ensure_out_dir(out_dir);
  const std::string adv_path = (fs::path(out_dir) / "adversarial.pgm").string();
  const std::string delta_path = (fs::path(out_dir) / "delta.pgm").string();
  const std::string report_path = (fs::path(out_dir) / "attack_report.jsonl").string();
  const std::string manifest_path = (fs::path(out_dir) / "attack_manifest.json").string();
  refuse_existing({adv_path, delta_path, report_path, manifest_path}, opt.force);

  ModelAttackTarget target(loaded.net, tau, c);
  const Image f_adv = acfg.epsilon == 0.0 ? noisy : pgd_attack(target, noisy, clean, acfg);
  const AttackReport report = attack_report(target, noisy, f_adv, clean);

  // min-max rescale of |f_adv - f| so epsilon-scale perturbations are visible
  Image delta(noisy.height, noisy.width, Domain::Byte255);
  double lo = std::numeric_limits<double>::infinity(), hi = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < delta.size(); ++i) {
    const double d = std::abs(f_adv.pixels[i] - noisy.pixels[i]);
    delta.pixels[i] = d;
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  const double span = hi > lo ? hi - lo : 1.0;
  for (double& v : delta.pixels) v = std::floor((v - lo) / span * 255.0 + 0.5);

  write_pgm_atomic(quantize_byte(f_adv), adv_path);
  write_pgm_atomic(delta, delta_path);

  RunManifest manifest;
  manifest.command = "attack";
  manifest.config_snapshot = cfg.entries();
  manifest.config_snapshot["infer_tau"] = fmt(tau);
  manifest.seeds["attack_seed"] = acfg.seed;
  manifest.checkpoint_hash = hash_file(checkpoint);
  manifest.input_hashes[fs::path(noisy_path).filename().string()] = hash_file(noisy_path);
  manifest.input_hashes[fs::path(clean_path).filename().string()] = hash_file(clean_path);

  MetricsRow row;
  row.name = "attack";
  row.values = {{"psnr_before", report.psnr_before},
                {"psnr_after", report.psnr_after},
                {"linf", report.linf},
                {"l2", report.l2},
                {"epsilon", acfg.epsilon},
                {"alpha", acfg.alpha},
                {"steps", static_cast<double>(acfg.steps)}};
  manifest.metrics = {row};
  write_file_atomic(report_path, metrics_rows_to_jsonl({row}));

  manifest.output_hashes["adversarial.pgm"] = hash_file(adv_path);
  manifest.output_hashes["delta.pgm"] = hash_file(delta_path);
  manifest.output_hashes["attack_report.jsonl"] = hash_file(report_path);
  manifest.write(manifest_path);
  return manifest;
}

RunManifest cmd_evaluate(EvalMode mode, const std::string& a_path, const std::string& b_path,
                         const std::string& out_dir, const Config& cfg, const HarnessOptions& opt) {
  const auto a_files = collect_pgms(a_path);
  const auto b_files = collect_pgms(b_path);
  if (a_files.empty() || a_files.size() != b_files.size())
    throw Error("cmd_evaluate: inputs must pair up one-to-one");

  ensure_out_dir(out_dir);
  const std::string table_path = (fs::path(out_dir) / "evaluate.txt").string();
  const std::string metrics_path = (fs::path(out_dir) / "metrics.jsonl").string();
  const std::string manifest_path = (fs::path(out_dir) / "evaluate_manifest.json").string();
  refuse_existing({table_path, metrics_path, manifest_path}, opt.force);

  RunManifest manifest;
  manifest.command = "evaluate";
  manifest.config_snapshot = cfg.entries();
  for (const auto& p : a_files) manifest.input_hashes[p.filename().string()] = hash_file(p.string());
  for (const auto& p : b_files) manifest.input_hashes[p.filename().string()] = hash_file(p.string());

  std::vector<MetricsRow> rows(a_files.size());
  parallel_for(a_files.size(), cfg.get_int("workers"), [&](size_t i) {
    const Image a = read_pgm(a_files[i].string());
    const Image b = read_pgm(b_files[i].string());
    MetricsRow row;
    row.name = b_files[i].filename().string();
    if (mode == EvalMode::FullReference) {
      row.values.emplace_back("psnr", psnr(a, b));
      row.values.emplace_back("ssim", ssim(a, b));
    } else {
      row.values.emplace_back("enl", enl(b));
      row.values.emplace_back("cx", cx(b));
      row.values.emplace_back("epd_roa_hd", epd_roa(a, b, EpdDirection::Horizontal));
      row.values.emplace_back("epd_roa_vd", epd_roa(a, b, EpdDirection::Vertical));
    }
    rows[i] = std::move(row);
  });
  rows.push_back(mean_row(rows));

  manifest.metrics = rows;
  write_file_atomic(table_path, metrics_table(rows));
  write_file_atomic(metrics_path, metrics_rows_to_jsonl(rows));
  manifest.output_hashes["evaluate.txt"] = hash_file(table_path);
  manifest.output_hashes["metrics.jsonl"] = hash_file(metrics_path);
  manifest.write(manifest_path);
  return manifest;
}

RunManifest cmd_diffuse(const std::string& input_path, double tau, int steps, const std::string& out_dir,
                        const Config& cfg, const HarnessOptions& opt) {
  if (tau < 0.0) throw Error("cmd_diffuse: tau must be nonnegative");
  if (steps < 1) throw Error("cmd_diffuse: steps must be >= 1");

  ensure_out_dir(out_dir);
  const std::string out_path =
      (fs::path(out_dir) / (fs::path(input_path).stem().string() + "_diffused.pgm")).string();
  const std::string manifest_path = (fs::path(out_dir) / "diffuse_manifest.json").string();
  refuse_existing({out_path, manifest_path}, opt.force);

  const Image input = to_unit(read_pgm(input_path));
  Array2d field = to_array(input);
  for (int s = 0; s < steps; ++s) field = implicit_heat_step(field, tau);
  Image out = from_array(field, Domain::Unit);
  for (double& v : out.pixels) v = std::clamp(v, 0.0, 1.0);
  write_pgm_atomic(quantize_byte(out), out_path);

  RunManifest manifest;
  manifest.command = "diffuse";
  manifest.config_snapshot = cfg.entries();
  manifest.input_hashes[fs::path(input_path).filename().string()] = hash_file(input_path);
  manifest.output_hashes[fs::path(out_path).filename().string()] = hash_file(out_path);
  manifest.write(manifest_path);
  return manifest;
}

}  // namespace despeckle
