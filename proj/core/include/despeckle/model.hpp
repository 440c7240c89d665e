#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "despeckle/array2d.hpp"
#include "despeckle/image.hpp"
#include "despeckle/patches.hpp"
#include "despeckle/speckle.hpp"
#include "despeckle/tape.hpp"
#include "despeckle/tensor.hpp"

namespace despeckle {

struct ModelConfig {
  int depth = 5;           // unrolling depth K
  int channels = 64;       // conv width of the middle layers
  double tau_train = 0.1;  // diffusion step used during training
  bool tied = false;       // share one block's weights across all stages
};

/// Five-layer residual convolutional denoiser:
///   conv(1->ch) + relu
///   conv(ch->ch) + batch_norm + relu   (x3)
///   conv(ch->1)
/// applied as block(u) = u - R(u).
struct DenoiserBlock {
  Tensor conv_w[5];
  Tensor conv_b[5];
  Tensor bn_gamma[3];
  Tensor bn_beta[3];
  BatchNormState bn_state[3];
};

/// The unrolled network: K denoiser blocks alternated with implicit heat
/// steps sharing one tau, ending on a diffusion step.
class UnrolledNet {
public:
  UnrolledNet() = default;

  /// Fan-in-scaled normal initialization (std = sqrt(2/fan_in)), seeded;
  /// biases zero, batch-norm gamma 1 / beta 0, running stats (0, 1).
  UnrolledNet(ModelConfig cfg, uint64_t init_seed);

  const ModelConfig& config() const { return cfg_; }
  ModelConfig& config() { return cfg_; }

  /// Block used at a given stage (the same storage block for every stage
  /// when weights are tied).
  DenoiserBlock& block(int stage);
  const DenoiserBlock& block(int stage) const;

  /// Number of distinct parameter blocks (1 if tied, else depth).
  int storage_blocks() const { return static_cast<int>(blocks_.size()); }

  /// Parameter block by storage index (not stage index).
  DenoiserBlock& storage_block(int s) { return blocks_[static_cast<size_t>(s)]; }
  const DenoiserBlock& storage_block(int s) const { return blocks_[static_cast<size_t>(s)]; }

  /// All trainable tensors in the canonical (checkpoint) order.
  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
  std::vector<std::string> parameter_names() const;

  void set_requires_grad(bool v);
  void zero_weights();

private:
  ModelConfig cfg_;
  std::vector<DenoiserBlock> blocks_;
};

/// One denoiser block on the tape; returns the node of u - R(u). When
/// param_ids is non-null the leaf ids of this stage's parameters are
/// appended in canonical order.
Tape::NodeId denoiser_block_on_tape(Tape& tape, UnrolledNet& net, int stage, Tape::NodeId u, Mode mode,
                                    std::vector<Tape::NodeId>* param_ids);

/// Full unrolled forward on the tape: u0 = input; K times z = block(u),
/// u = diffusion(z, tau). Returns the node of u^K. Parameter leaves are
/// created once (shared across stages when tied) and their ids appended to
/// param_ids in parameters() order.
Tape::NodeId forward_on_tape(Tape& tape, UnrolledNet& net, Tape::NodeId input, double tau, Mode mode,
                             std::vector<Tape::NodeId>* param_ids);

/// Inference forward for one log-domain image; batch-norm running statistics
/// are folded into the adjacent conv weights so the stack evaluates as pure
/// convolutions.
Array2d forward_eval(const UnrolledNet& net, const Array2d& log_f, double tau);

/// Single-stage eval of one block (diagnostics and tests).
Array2d denoiser_block_eval(const UnrolledNet& net, int stage, const Array2d& u);

/// Full despeckling pipeline on a Unit-domain image:
///   u_hat = exp(forward(ln max(f, floor), tau) - c) clamped to [0, 1].
Image predict_image(const UnrolledNet& net, const Image& f, double tau, double c,
                    double floor = kLogFloor);

struct TrainSchedule {
  int epochs = 5;
  int batch = 16;
  double lr = 1e-3;
  int lr_drop_epoch = 31;  // 1-based epoch at which lr_after takes over
  double lr_after = 1e-4;
  uint64_t seed = 1;
  bool deterministic = true;
};

struct TrainResult {
  std::vector<double> batch_losses;  // one entry per optimizer step
  std::vector<double> epoch_losses;  // per-epoch means of the above
};

/// Minibatch Adam training of logcosh_loss(forward(log f), log y, c) with
/// c = log_speckle_bias(noise.looks). The PatchSet must have its noisy
/// halves filled. Deterministic for a fixed schedule seed.
TrainResult train(UnrolledNet& net, const PatchSet& patches, const NoiseSpec& noise,
                  const TrainSchedule& schedule);

/// Empirical Lipschitz ratio max ||D(u1)-D(u2)|| / ||u1-u2|| of one block
/// over seeded random pairs. Diagnostic only; nothing enforces a bound.
double block_lipschitz_estimate(const UnrolledNet& net, int stage, int trials, uint64_t seed,
                                int rows = 16, int cols = 16);

}  // namespace despeckle
