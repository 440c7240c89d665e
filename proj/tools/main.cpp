// Command-line front end: simulate, train, denoise, sweep-tau, attack,
// evaluate, diffuse. Every run resolves a full config (defaults, then
// --config file, then flag overrides) and writes a manifest next to its
// outputs.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "despeckle/config.hpp"
#include "despeckle/error.hpp"
#include "despeckle/harness.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir = ".";
  bool force = false;
  bool deterministic = false;
  int workers = 0;
  uint64_t seed = 0;
  bool seed_set = false;
  bool workers_set = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "key=value config file");
  cmd->add_option("--out", flags.out_dir, "output directory")->required();
  cmd->add_flag("--force", flags.force, "overwrite existing outputs");
  cmd->add_flag("--deterministic", flags.deterministic, "set deterministic=1 in the config");
  cmd->add_option("--workers", flags.workers, "parallel image workers")->each([&flags](const std::string&) {
    flags.workers_set = true;
  });
  cmd->add_option("--seed", flags.seed, "override the command's primary seed")->each([&flags](const std::string&) {
    flags.seed_set = true;
  });
}

despeckle::Config resolve_config(const CommonFlags& flags, const std::string& primary_seed_key) {
  despeckle::Config cfg;
  if (!flags.config_path.empty()) cfg.load_file(flags.config_path);
  if (flags.deterministic) cfg.set("deterministic", "1");
  if (flags.workers_set) cfg.set("workers", std::to_string(flags.workers));
  if (flags.seed_set && !primary_seed_key.empty()) cfg.set(primary_seed_key, std::to_string(flags.seed));
  return cfg;
}

void print_file(const std::string& path) {
  std::ifstream in(path);
  std::cout << in.rdbuf();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tunable despeckling laboratory: speckle simulation, unrolled-model training, "
               "diffusion-regularized inference, sign-gradient attacks and quality metrics"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "speckle clean images (f = u * eta)");
  CommonFlags sim_flags;
  std::string sim_inputs;
  sim->add_option("--inputs", sim_inputs, "directory of clean .pgm images")->required();
  add_common(sim, sim_flags);

  // train
  auto* tr = app.add_subcommand("train", "train the unrolled despeckling model");
  CommonFlags tr_flags;
  std::string tr_inputs;
  tr->add_option("--inputs", tr_inputs, "directory of clean training .pgm images")->required();
  add_common(tr, tr_flags);

  // denoise
  auto* dn = app.add_subcommand("denoise", "despeckle images with a trained checkpoint");
  CommonFlags dn_flags;
  std::string dn_ckpt, dn_inputs, dn_refs;
  double dn_tau = -1.0;
  bool dn_tau_set = false;
  dn->add_option("--checkpoint", dn_ckpt, "trained checkpoint")->required();
  dn->add_option("--inputs", dn_inputs, "noisy .pgm file or directory")->required();
  dn->add_option("--refs", dn_refs, "clean references (enables PSNR/SSIM)");
  dn->add_option("--tau", dn_tau, "diffusion step override (default: checkpoint's training tau)")
      ->each([&dn_tau_set](const std::string&) { dn_tau_set = true; });
  add_common(dn, dn_flags);

  // sweep-tau
  auto* sw = app.add_subcommand("sweep-tau", "denoise one image across a list of taus");
  CommonFlags sw_flags;
  std::string sw_ckpt, sw_image, sw_ref;
  std::vector<double> sw_taus;
  sw->add_option("--checkpoint", sw_ckpt)->required();
  sw->add_option("--image", sw_image, "noisy .pgm image")->required();
  sw->add_option("--taus", sw_taus, "tau values")->required()->expected(-1);
  sw->add_option("--ref", sw_ref, "clean reference (enables PSNR column)");
  add_common(sw, sw_flags);

  // attack
  auto* at = app.add_subcommand("attack", "sign-gradient attack on the predict pipeline");
  CommonFlags at_flags;
  std::string at_ckpt, at_noisy, at_clean;
  double at_eps = -1.0, at_alpha = -1.0;
  int at_steps = -1;
  double at_tau = -1.0;
  bool at_eps_set = false, at_alpha_set = false, at_steps_set = false, at_tau_set = false;
  at->add_option("--checkpoint", at_ckpt)->required();
  at->add_option("--noisy", at_noisy, "noisy input .pgm")->required();
  at->add_option("--clean", at_clean, "clean reference .pgm")->required();
  at->add_option("--epsilon", at_eps)->each([&at_eps_set](const std::string&) { at_eps_set = true; });
  at->add_option("--alpha", at_alpha)->each([&at_alpha_set](const std::string&) { at_alpha_set = true; });
  at->add_option("--steps", at_steps)->each([&at_steps_set](const std::string&) { at_steps_set = true; });
  at->add_option("--tau", at_tau)->each([&at_tau_set](const std::string&) { at_tau_set = true; });
  add_common(at, at_flags);

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "image quality metrics");
  CommonFlags ev_flags;
  std::string ev_mode = "full-reference", ev_ref, ev_test, ev_noisy, ev_denoised;
  ev->add_option("--mode", ev_mode, "full-reference | reference-free")
      ->check(CLI::IsMember({"full-reference", "reference-free"}));
  ev->add_option("--ref", ev_ref, "clean references (full-reference mode)");
  ev->add_option("--test", ev_test, "images under test (full-reference mode)");
  ev->add_option("--noisy", ev_noisy, "noisy originals (reference-free mode)");
  ev->add_option("--denoised", ev_denoised, "denoised images (reference-free mode)");
  add_common(ev, ev_flags);

  // diffuse
  auto* df = app.add_subcommand("diffuse", "implicit heat steps on one image (no model)");
  CommonFlags df_flags;
  std::string df_input;
  double df_tau = 0.1;
  int df_steps = 1;
  df->add_option("--input", df_input, "input .pgm")->required();
  df->add_option("--tau", df_tau, "time step");
  df->add_option("--steps", df_steps, "number of steps");
  add_common(df, df_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    despeckle::HarnessOptions opt;
    if (sim->parsed()) {
      opt.force = sim_flags.force;
      despeckle::cmd_simulate(sim_inputs, sim_flags.out_dir, resolve_config(sim_flags, "noise_seed"), opt);
    } else if (tr->parsed()) {
      opt.force = tr_flags.force;
      despeckle::cmd_train(tr_inputs, tr_flags.out_dir, resolve_config(tr_flags, "train_seed"), opt);
    } else if (dn->parsed()) {
      opt.force = dn_flags.force;
      despeckle::Config cfg = resolve_config(dn_flags, "");
      if (dn_tau_set) cfg.set("infer_tau", std::to_string(dn_tau));
      despeckle::cmd_denoise(dn_ckpt, dn_inputs, dn_refs, dn_flags.out_dir, cfg, opt);
    } else if (sw->parsed()) {
      opt.force = sw_flags.force;
      despeckle::cmd_sweep_tau(sw_ckpt, sw_image, sw_taus, sw_ref, sw_flags.out_dir,
                               resolve_config(sw_flags, ""), opt);
      print_file(sw_flags.out_dir + "/sweep.txt");
    } else if (at->parsed()) {
      opt.force = at_flags.force;
      despeckle::Config cfg = resolve_config(at_flags, "attack_seed");
      if (at_eps_set) cfg.set("attack_epsilon", std::to_string(at_eps));
      if (at_alpha_set) cfg.set("attack_alpha", std::to_string(at_alpha));
      if (at_steps_set) cfg.set("attack_steps", std::to_string(at_steps));
      if (at_tau_set) cfg.set("infer_tau", std::to_string(at_tau));
      despeckle::cmd_attack(at_ckpt, at_noisy, at_clean, at_flags.out_dir, cfg, opt);
      print_file(at_flags.out_dir + "/attack_report.jsonl");
    } else if (ev->parsed()) {
      opt.force = ev_flags.force;
      const bool full = ev_mode == "full-reference";
      const std::string a = full ? ev_ref : ev_noisy;
      const std::string b = full ? ev_test : ev_denoised;
      if (a.empty() || b.empty())
        throw despeckle::Error(full ? "evaluate: --ref and --test are required in full-reference mode"
                                    : "evaluate: --noisy and --denoised are required in reference-free mode");
      despeckle::cmd_evaluate(full ? despeckle::EvalMode::FullReference : despeckle::EvalMode::ReferenceFree,
                              a, b, ev_flags.out_dir, resolve_config(ev_flags, ""), opt);
      print_file(ev_flags.out_dir + "/evaluate.txt");
    } else if (df->parsed()) {
      opt.force = df_flags.force;
      despeckle::cmd_diffuse(df_input, df_tau, df_steps, df_flags.out_dir, resolve_config(df_flags, ""), opt);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
