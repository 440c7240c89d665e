#include "despeckle/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "conv_kernels.hpp"
#include "despeckle/adam.hpp"
#include "despeckle/error.hpp"
#include "despeckle/rng.hpp"
#include "despeckle/spectral.hpp"

namespace despeckle {

namespace {

// Cin of conv layer l (0-based) given the block width.
int layer_cin(int l, int channels) { return l == 0 ? 1 : channels; }
int layer_cout(int l, int channels) { return l == 4 ? 1 : channels; }

}  // namespace

UnrolledNet::UnrolledNet(ModelConfig cfg, uint64_t init_seed) : cfg_(cfg) {
  if (cfg_.depth < 1) throw Error("UnrolledNet: depth must be >= 1");
  if (cfg_.channels < 1) throw Error("UnrolledNet: channels must be >= 1");
  const int nblocks = cfg_.tied ? 1 : cfg_.depth;
  blocks_.resize(static_cast<size_t>(nblocks));
  Rng rng(init_seed);
  for (auto& blk : blocks_) {
    for (int l = 0; l < 5; ++l) {
      const int cin = layer_cin(l, cfg_.channels);
      const int cout = layer_cout(l, cfg_.channels);
      blk.conv_w[l] = Tensor({cout, cin, 3, 3});
      const double std = std::sqrt(2.0 / (9.0 * cin));
      for (double& v : blk.conv_w[l].data) v = std * rng.normal();
      blk.conv_b[l] = Tensor({cout}, 0.0);
    }
    for (int m = 0; m < 3; ++m) {
      blk.bn_gamma[m] = Tensor({cfg_.channels}, 1.0);
      blk.bn_beta[m] = Tensor({cfg_.channels}, 0.0);
      blk.bn_state[m] = BatchNormState(cfg_.channels);
    }
  }
}

DenoiserBlock& UnrolledNet::block(int stage) {
  if (stage < 0 || stage >= cfg_.depth) throw Error("UnrolledNet::block: stage out of range");
  return blocks_[cfg_.tied ? 0 : static_cast<size_t>(stage)];
}

const DenoiserBlock& UnrolledNet::block(int stage) const {
  if (stage < 0 || stage >= cfg_.depth) throw Error("UnrolledNet::block: stage out of range");
  return blocks_[cfg_.tied ? 0 : static_cast<size_t>(stage)];
}

std::vector<Tensor*> UnrolledNet::parameters() {
  std::vector<Tensor*> out;
  for (auto& blk : blocks_) {
    for (int l = 0; l < 5; ++l) {
      out.push_back(&blk.conv_w[l]);
      out.push_back(&blk.conv_b[l]);
      if (l >= 1 && l <= 3) {
        out.push_back(&blk.bn_gamma[l - 1]);
        out.push_back(&blk.bn_beta[l - 1]);
      }
    }
  }
  return out;
}

std::vector<const Tensor*> UnrolledNet::parameters() const {
  std::vector<const Tensor*> out;
  for (const auto& blk : blocks_) {
    for (int l = 0; l < 5; ++l) {
      out.push_back(&blk.conv_w[l]);
      out.push_back(&blk.conv_b[l]);
      if (l >= 1 && l <= 3) {
        out.push_back(&blk.bn_gamma[l - 1]);
        out.push_back(&blk.bn_beta[l - 1]);
      }
    }
  }
  return out;
}

std::vector<std::string> UnrolledNet::parameter_names() const {
  std::vector<std::string> out;
  for (size_t s = 0; s < blocks_.size(); ++s) {
    const std::string prefix = "block" + std::to_string(s) + ".";
    for (int l = 0; l < 5; ++l) {
      out.push_back(prefix + "conv" + std::to_string(l + 1) + ".weight");
      out.push_back(prefix + "conv" + std::to_string(l + 1) + ".bias");
      if (l >= 1 && l <= 3) {
        out.push_back(prefix + "bn" + std::to_string(l + 1) + ".gamma");
        out.push_back(prefix + "bn" + std::to_string(l + 1) + ".beta");
      }
    }
  }
  return out;
}

void UnrolledNet::set_requires_grad(bool v) {
  for (Tensor* t : parameters()) t->requires_grad = v;
}

void UnrolledNet::zero_weights() {
  for (auto& blk : blocks_) {
    for (int l = 0; l < 5; ++l) {
      std::fill(blk.conv_w[l].data.begin(), blk.conv_w[l].data.end(), 0.0);
      std::fill(blk.conv_b[l].data.begin(), blk.conv_b[l].data.end(), 0.0);
    }
  }
}

namespace {

struct BlockLeafIds {
  Tape::NodeId conv_w[5];
  Tape::NodeId conv_b[5];
  Tape::NodeId bn_gamma[3];
  Tape::NodeId bn_beta[3];
};

BlockLeafIds push_block_leaves(Tape& tape, DenoiserBlock& blk, std::vector<Tape::NodeId>* param_ids) {
  BlockLeafIds ids;
  for (int l = 0; l < 5; ++l) {
    ids.conv_w[l] = tape.leaf(blk.conv_w[l]);
    ids.conv_b[l] = tape.leaf(blk.conv_b[l]);
    if (param_ids) {
      param_ids->push_back(ids.conv_w[l]);
      param_ids->push_back(ids.conv_b[l]);
    }
    if (l >= 1 && l <= 3) {
      ids.bn_gamma[l - 1] = tape.leaf(blk.bn_gamma[l - 1]);
      ids.bn_beta[l - 1] = tape.leaf(blk.bn_beta[l - 1]);
      if (param_ids) {
        param_ids->push_back(ids.bn_gamma[l - 1]);
        param_ids->push_back(ids.bn_beta[l - 1]);
      }
    }
  }
  return ids;
}

Tape::NodeId block_body(Tape& tape, DenoiserBlock& blk, const BlockLeafIds& ids, Tape::NodeId u, Mode mode) {
  Tape::NodeId h = tape.relu(tape.conv2d(u, ids.conv_w[0], ids.conv_b[0]));
  for (int l = 1; l <= 3; ++l) {
    Tape::NodeId c = tape.conv2d(h, ids.conv_w[l], ids.conv_b[l]);
    Tape::NodeId b = tape.batch_norm(c, ids.bn_gamma[l - 1], ids.bn_beta[l - 1], blk.bn_state[l - 1], mode);
    h = tape.relu(b);
  }
  Tape::NodeId residual = tape.conv2d(h, ids.conv_w[4], ids.conv_b[4]);
  return tape.sub(u, residual);
}

}  // namespace

Tape::NodeId denoiser_block_on_tape(Tape& tape, UnrolledNet& net, int stage, Tape::NodeId u, Mode mode,
                                    std::vector<Tape::NodeId>* param_ids) {
  DenoiserBlock& blk = net.block(stage);
  BlockLeafIds ids = push_block_leaves(tape, blk, param_ids);
  return block_body(tape, blk, ids, u, mode);
}

Tape::NodeId forward_on_tape(Tape& tape, UnrolledNet& net, Tape::NodeId input, double tau, Mode mode,
                             std::vector<Tape::NodeId>* param_ids) {
  if (tau < 0.0) throw Error("forward_on_tape: tau must be nonnegative");
  const int k = net.config().depth;
  std::vector<BlockLeafIds> ids(static_cast<size_t>(net.storage_blocks()));
  for (int s = 0; s < net.storage_blocks(); ++s)
    ids[static_cast<size_t>(s)] = push_block_leaves(tape, net.storage_block(s), param_ids);
  Tape::NodeId u = input;
  for (int stage = 0; stage < k; ++stage) {
    const int s = net.config().tied ? 0 : stage;
    Tape::NodeId z = block_body(tape, net.storage_block(s), ids[static_cast<size_t>(s)], u, mode);
    u = tape.spectral_diffusion(z, tau);
  }
  return u;
}

namespace {

// Folds eval-mode batch norm into the adjacent conv:
//   scale_c = gamma_c / sqrt(running_var_c + eps)
//   w'_c = w_c * scale_c,  b'_c = (b_c - running_mean_c) * scale_c + beta_c
void fold_bn(const Tensor& w, const Tensor& b, const Tensor& gamma, const Tensor& beta,
             const BatchNormState& state, std::vector<double>& w_out, std::vector<double>& b_out) {
  const int cout = static_cast<int>(w.shape[0]);
  const int per_out = static_cast<int>(w.data.size()) / cout;
  w_out.resize(w.data.size());
  b_out.resize(static_cast<size_t>(cout));
  for (int c = 0; c < cout; ++c) {
    const double scale = gamma.data[c] / std::sqrt(state.running_var[c] + kBatchNormEpsilon);
    for (int i = 0; i < per_out; ++i)
      w_out[static_cast<size_t>(c) * per_out + i] = w.data[static_cast<size_t>(c) * per_out + i] * scale;
    b_out[static_cast<size_t>(c)] = (b.data[c] - state.running_mean[c]) * scale + beta.data[c];
  }
}

void relu_inplace(std::vector<double>& v) {
  for (double& x : v) x = x > 0.0 ? x : 0.0;
}

// Evaluates one block on a single [H,W] plane using the folded conv stack.
Array2d block_eval(const DenoiserBlock& blk, int channels, const Array2d& u) {
  const int h = u.rows, w = u.cols;
  const size_t plane = static_cast<size_t>(h) * w;
  std::vector<double> a(static_cast<size_t>(channels) * plane);
  std::vector<double> b(static_cast<size_t>(channels) * plane);

  detail::conv3x3_forward(u.data.data(), blk.conv_w[0].data.data(), blk.conv_b[0].data.data(), a.data(),
                          1, channels, h, w);
  relu_inplace(a);

  std::vector<double> wf, bf;
  for (int l = 1; l <= 3; ++l) {
    fold_bn(blk.conv_w[l], blk.conv_b[l], blk.bn_gamma[l - 1], blk.bn_beta[l - 1], blk.bn_state[l - 1], wf, bf);
    detail::conv3x3_forward(a.data(), wf.data(), bf.data(), b.data(), channels, channels, h, w);
    relu_inplace(b);
    std::swap(a, b);
  }

  Array2d out(h, w);
  detail::conv3x3_forward(a.data(), blk.conv_w[4].data.data(), blk.conv_b[4].data.data(), out.data.data(),
                          channels, 1, h, w);
  for (size_t i = 0; i < plane; ++i) out.data[i] = u.data[i] - out.data[i];
  return out;
}

}  // namespace

Array2d denoiser_block_eval(const UnrolledNet& net, int stage, const Array2d& u) {
  return block_eval(net.block(stage), net.config().channels, u);
}

Array2d forward_eval(const UnrolledNet& net, const Array2d& log_f, double tau) {
  if (tau < 0.0) throw Error("forward_eval: tau must be nonnegative");
  Array2d u = log_f;
  for (int stage = 0; stage < net.config().depth; ++stage) {
    Array2d z = block_eval(net.block(stage), net.config().channels, u);
    u = (tau == 0.0) ? std::move(z) : implicit_heat_step(z, tau);
  }
  return u;
}

Image predict_image(const UnrolledNet& net, const Image& f, double tau, double c, double floor) {
  if (f.domain != Domain::Unit) throw DomainError("predict_image expects a Unit image");
  Image logf = log_transform(f, floor);
  Array2d u = forward_eval(net, to_array(logf), tau);
  Image out(f.height, f.width, Domain::Unit);
  for (size_t i = 0; i < out.size(); ++i) out.pixels[i] = std::clamp(std::exp(u.data[i] - c), 0.0, 1.0);
  return out;
}

TrainResult train(UnrolledNet& net, const PatchSet& patches, const NoiseSpec& noise,
                  const TrainSchedule& schedule) {
  const size_t n = patches.patches.size();
  if (n == 0) throw Error("train: empty PatchSet");
  const int ps = patches.patch_size;
  for (const auto& [clean, noisy] : patches.patches) {
    if (clean.height != ps || clean.width != ps || noisy.height != ps || noisy.width != ps)
      throw Error("train: patches must be square patch_size x patch_size with noisy halves filled");
  }
  if (schedule.epochs < 1 || schedule.batch < 1) throw Error("train: bad schedule");

  const double c = log_speckle_bias(noise.looks);

  // Precompute the log-domain views once.
  std::vector<std::vector<double>> log_noisy(n), log_clean(n);
  for (size_t i = 0; i < n; ++i) {
    log_noisy[i] = log_transform(patches.patches[i].second).pixels;
    log_clean[i] = log_transform(patches.patches[i].first).pixels;
  }

  net.set_requires_grad(true);
  std::vector<Tensor*> params = net.parameters();
  AdamState opt;
  opt.init(params);

  TrainResult result;
  const size_t plane = static_cast<size_t>(ps) * ps;
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= schedule.epochs; ++epoch) {
    opt.learning_rate = (epoch < schedule.lr_drop_epoch) ? schedule.lr : schedule.lr_after;
    // Fisher-Yates shuffle from the per-epoch stream
    Rng rng(schedule.seed, static_cast<uint64_t>(epoch));
    for (size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);

    double epoch_sum = 0.0;
    int epoch_batches = 0;
    for (size_t start = 0; start < n; start += static_cast<size_t>(schedule.batch)) {
      const size_t bsz = std::min(static_cast<size_t>(schedule.batch), n - start);
      Tensor input({static_cast<int64_t>(bsz), 1, ps, ps});
      Tensor target({static_cast<int64_t>(bsz), 1, ps, ps});
      for (size_t j = 0; j < bsz; ++j) {
        std::memcpy(input.data.data() + j * plane, log_noisy[order[start + j]].data(), plane * sizeof(double));
        std::memcpy(target.data.data() + j * plane, log_clean[order[start + j]].data(), plane * sizeof(double));
      }

      Tape tape;
      Tape::NodeId in_id = tape.leaf(std::move(input));
      std::vector<Tape::NodeId> param_ids;
      Tape::NodeId pred = forward_on_tape(tape, net, in_id, net.config().tau_train, Mode::Train, &param_ids);
      Tape::NodeId loss_id = tape.logcosh_loss(pred, std::move(target), c);
      const double loss = tape.value(loss_id).data[0];
      if (!std::isfinite(loss))
        throw Error("train: non-finite loss at epoch " + std::to_string(epoch));
      result.batch_losses.push_back(loss);
      epoch_sum += loss;
      ++epoch_batches;

      tape.backward(loss_id);
      std::vector<const std::vector<double>*> grads;
      grads.reserve(params.size());
      for (Tape::NodeId id : param_ids) grads.push_back(&tape.grad(id));
      adam_step(params, grads, opt);
    }
    result.epoch_losses.push_back(epoch_sum / static_cast<double>(epoch_batches));
  }
  net.set_requires_grad(false);
  return result;
}

double block_lipschitz_estimate(const UnrolledNet& net, int stage, int trials, uint64_t seed,
                                int rows, int cols) {
  Rng rng(seed);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Array2d u1(rows, cols), u2(rows, cols);
    for (size_t i = 0; i < u1.data.size(); ++i) {
      u1.data[i] = rng.normal();
      u2.data[i] = u1.data[i] + 0.1 * rng.normal();
    }
    Array2d d1 = denoiser_block_eval(net, stage, u1);
    Array2d d2 = denoiser_block_eval(net, stage, u2);
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < u1.data.size(); ++i) {
      double dd = d1.data[i] - d2.data[i];
      double du = u1.data[i] - u2.data[i];
      num += dd * dd;
      den += du * du;
    }
    if (den > 0.0) worst = std::max(worst, std::sqrt(num / den));
  }
  return worst;
}

}  // namespace despeckle
