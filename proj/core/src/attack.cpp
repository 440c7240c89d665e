#include "despeckle/attack.hpp"

#include <algorithm>
#include <cmath>

#include "despeckle/error.hpp"
#include "despeckle/metrics.hpp"
#include "despeckle/rng.hpp"

namespace despeckle {

ModelAttackTarget::ModelAttackTarget(UnrolledNet& net, double tau, double c, double floor)
    : net_(&net), tau_(tau), c_(c), floor_(floor) {
  net_->set_requires_grad(false);
}

Image ModelAttackTarget::denoise(const Image& f) const { return predict_image(*net_, f, tau_, c_, floor_); }

double ModelAttackTarget::objective_and_grad(const Image& f, const Image& clean, Image* grad) const {
  if (f.domain != Domain::Unit || clean.domain != Domain::Unit)
    throw DomainError("ModelAttackTarget expects Unit images");
  if (!f.same_shape(clean)) throw Error("ModelAttackTarget: shape mismatch");

  Tensor input({1, 1, f.height, f.width});
  input.data = f.pixels;
  input.requires_grad = grad != nullptr;

  Tensor target({1, 1, f.height, f.width});
  target.data = clean.pixels;

  Tape tape;
  Tape::NodeId in_id = tape.leaf(std::move(input));
  Tape::NodeId logf = tape.log_floor(in_id, floor_);
  Tape::NodeId u = forward_on_tape(tape, *net_, logf, tau_, Mode::Eval, nullptr);
  Tape::NodeId debiased = tape.add_scalar(u, -c_);
  Tape::NodeId restored = tape.clamp01(tape.exp_elem(debiased));
  Tape::NodeId j = tape.squared_error(restored, std::move(target));
  const double value = tape.value(j).data[0];
  if (grad) {
    tape.backward(j);
    grad->height = f.height;
    grad->width = f.width;
    grad->domain = Domain::Unit;
    grad->pixels = tape.grad(in_id);
  }
  return value;
}

Image pgd_attack(const AttackTarget& target, const Image& f0, const Image& clean, const AttackConfig& cfg) {
  if (f0.domain != Domain::Unit || clean.domain != Domain::Unit)
    throw DomainError("pgd_attack expects Unit images");
  if (!f0.same_shape(clean)) throw Error("pgd_attack: f0/clean shape mismatch");
  if (!(cfg.epsilon > 0.0) || !(cfg.alpha > 0.0)) throw Error("pgd_attack: epsilon and alpha must be positive");
  if (cfg.alpha > cfg.epsilon) throw Error("pgd_attack: alpha must not exceed epsilon");
  if (cfg.steps < 1) throw Error("pgd_attack: steps must be >= 1");

  Image f = f0;
  if (cfg.random_start) {
    Rng rng(cfg.seed);
    for (size_t i = 0; i < f.size(); ++i) {
      double delta = (2.0 * rng.uniform() - 1.0) * cfg.epsilon;
      f.pixels[i] = std::clamp(f0.pixels[i] + delta, 0.0, 1.0);
    }
  }

  Image grad;
  for (int t = 0; t < cfg.steps; ++t) {
    target.objective_and_grad(f, clean, &grad);
    for (size_t i = 0; i < f.size(); ++i) {
      const double g = grad.pixels[i];
      if (!std::isfinite(g)) throw Error("pgd_attack: non-finite gradient");
      const double step = g > 0.0 ? cfg.alpha : (g < 0.0 ? -cfg.alpha : 0.0);
      double delta = std::clamp(f.pixels[i] + step - f0.pixels[i], -cfg.epsilon, cfg.epsilon);
      f.pixels[i] = std::clamp(f0.pixels[i] + delta, 0.0, 1.0);
    }
  }
  for (size_t i = 0; i < f.size(); ++i) {
    if (std::abs(f.pixels[i] - f0.pixels[i]) > cfg.epsilon + 1e-15)
      throw Error("pgd_attack: perturbation budget violated (internal error)");
  }
  return f;
}

AttackReport attack_report(const AttackTarget& target, const Image& f0, const Image& f_adv, const Image& clean) {
  if (!f0.same_shape(f_adv) || !f0.same_shape(clean)) throw Error("attack_report: shape mismatch");
  AttackReport report;
  const Image clean_b = to_byte(clean);
  report.psnr_before = psnr(clean_b, to_byte(target.denoise(f0)));
  report.psnr_after = psnr(clean_b, to_byte(target.denoise(f_adv)));
  double l2 = 0.0, linf = 0.0;
  for (size_t i = 0; i < f0.size(); ++i) {
    double d = f_adv.pixels[i] - f0.pixels[i];
    l2 += d * d;
    linf = std::max(linf, std::abs(d));
  }
  report.l2 = std::sqrt(l2);
  report.linf = linf;
  return report;
}

}  // namespace despeckle
