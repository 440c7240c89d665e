#pragma once

#include <cstdint>

#include "despeckle/image.hpp"
#include "despeckle/model.hpp"

namespace despeckle {

/// Sign-gradient attack parameters. epsilon and alpha are on the Unit scale
/// (the defaults are 4/255 and 1/255); alpha must not exceed epsilon.
struct AttackConfig {
  double epsilon = 4.0 / 255.0;
  double alpha = 1.0 / 255.0;
  int steps = 10;
  uint64_t seed = 1;
  bool random_start = false;
};

/// Anything the attack can aim at: a denoiser with a differentiable
/// restoration-error objective J(f) = ||denoise(f) - clean||_2^2.
class AttackTarget {
public:
  virtual ~AttackTarget() = default;
  virtual Image denoise(const Image& f) const = 0;
  /// Returns J(f); when grad is non-null fills dJ/df (same shape as f).
  virtual double objective_and_grad(const Image& f, const Image& clean, Image* grad) const = 0;
};

/// The trained model's predict pipeline as an attack target; input gradients
/// flow through the same tape used for training (batch norm in eval mode).
class ModelAttackTarget : public AttackTarget {
public:
  ModelAttackTarget(UnrolledNet& net, double tau, double c, double floor = kLogFloor);
  Image denoise(const Image& f) const override;
  double objective_and_grad(const Image& f, const Image& clean, Image* grad) const override;

private:
  UnrolledNet* net_;
  double tau_;
  double c_;
  double floor_;
};

/// Iterates f <- f + alpha * sign(dJ/df), clipping the cumulative
/// perturbation to [-epsilon, epsilon] and f to [0, 1] after every step.
/// Ascending J drives the restored output away from the clean image.
/// Deterministic; the seed is consumed only when random_start is set.
Image pgd_attack(const AttackTarget& target, const Image& f0, const Image& clean, const AttackConfig& cfg);

struct AttackReport {
  double psnr_before = 0.0;
  double psnr_after = 0.0;
  double linf = 0.0;
  double l2 = 0.0;
};

/// PSNR of the restorations from f0 and f_adv against the clean reference,
/// plus perturbation norms.
AttackReport attack_report(const AttackTarget& target, const Image& f0, const Image& f_adv, const Image& clean);

}  // namespace despeckle
