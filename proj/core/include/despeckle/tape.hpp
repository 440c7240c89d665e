#pragma once

#include <cstdint>
#include <vector>

#include "despeckle/tensor.hpp"

namespace despeckle {

enum class Mode { Train, Eval };

constexpr double kBatchNormEpsilon = 1e-5;
constexpr double kBatchNormMomentum = 0.9;  // running = 0.9*running + 0.1*batch

/// Per-channel running statistics owned by the model, updated by train-mode
/// batch_norm nodes.
struct BatchNormState {
  std::vector<double> running_mean;
  std::vector<double> running_var;

  explicit BatchNormState(int channels = 0)
      : running_mean(static_cast<size_t>(channels), 0.0), running_var(static_cast<size_t>(channels), 1.0) {}
};

/// Define-by-run reverse-mode tape. Nodes are appended in execution order;
/// backward() visits them exactly once in strict reverse order, accumulating
/// (summing) gradients into fan-out inputs.
///
/// All reductions run in a fixed documented order (ascending index, with the
/// fixed 8-lane tree used by the conv kernels), so forward and backward are
/// bit-deterministic for fixed inputs.
///
/// A tape is single-use: backward() releases intermediate activations as it
/// sweeps, keeping only leaf values and leaf gradients. Read any forward
/// value you need before calling backward().
class Tape {
public:
  using NodeId = int32_t;

  /// Appends a leaf node; requires_grad is taken from the tensor's flag.
  NodeId leaf(Tensor value);

  /// 3x3 cross-correlation, zero padding 1, per-channel bias.
  /// x: [B,Cin,H,W], w: [Cout,Cin,3,3], b: [Cout] -> [B,Cout,H,W].
  NodeId conv2d(NodeId x, NodeId w, NodeId b);

  NodeId relu(NodeId x);

  /// x: [B,C,H,W]; gamma, beta: [C]. Train mode normalizes by batch
  /// statistics (population variance, epsilon 1e-5) and updates `state`;
  /// eval mode normalizes by the running statistics.
  NodeId batch_norm(NodeId x, NodeId gamma, NodeId beta, BatchNormState& state, Mode mode);

  /// Implicit periodic heat step applied to every [H,W] plane. The operator
  /// is linear and self-adjoint, so backward applies the same step to the
  /// upstream gradient. tau == 0 is the exact identity.
  NodeId spectral_diffusion(NodeId x, double tau);

  /// Elementwise a - b (same shape).
  NodeId sub(NodeId a, NodeId b);

  /// Mean over all elements of log(cosh(target - pred + c)), evaluated in
  /// the overflow-free form |r| + log1p(exp(-2|r|)) - ln 2.
  NodeId logcosh_loss(NodeId pred, Tensor target, double c);

  /// Elementwise ln(max(x, floor)); gradient 0 where x <= floor.
  NodeId log_floor(NodeId x, double floor);

  NodeId add_scalar(NodeId x, double s);

  NodeId exp_elem(NodeId x);

  /// Clamp to [0,1]; gradient passes only strictly inside the interval.
  NodeId clamp01(NodeId x);

  /// Scalar sum of squared differences against a constant target.
  NodeId squared_error(NodeId x, Tensor target);

  /// Reverse sweep from a scalar root.
  void backward(NodeId root);

  const Tensor& value(NodeId id) const;
  const std::vector<double>& grad(NodeId id) const;
  size_t node_count() const { return nodes_.size(); }

private:
  enum class Op {
    Leaf, Conv2d, Relu, BatchNorm, Diffusion, Sub, LogCosh, LogFloor, AddScalar, Exp, Clamp01, SquaredError
  };

  struct Node {
    Op op;
    NodeId in[3] = {-1, -1, -1};
    Tensor val;
    std::vector<double> grad;
    bool requires_grad = false;
    std::vector<double> saved;  // op-specific (batch_norm: mean then invstd)
    Tensor aux;                 // loss targets
    double p0 = 0.0;            // tau / c / floor / scalar
    Mode mode = Mode::Train;
  };

  Node& node(NodeId id);
  const Node& node(NodeId id) const;
  NodeId push(Node n);
  void ensure_grad(Node& n);
  void backward_one(NodeId id);

  std::vector<Node> nodes_;
  bool consumed_ = false;
};

}  // namespace despeckle
