#include "despeckle/tape.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "conv_kernels.hpp"
#include "despeckle/array2d.hpp"
#include "despeckle/error.hpp"
#include "despeckle/spectral.hpp"

namespace despeckle {

namespace {

void check_4d(const Tensor& t, const char* who) {
  if (t.shape.size() != 4) throw Error(std::string(who) + ": expected a 4D tensor");
}

Array2d plane_to_array(const Tensor& t, int64_t b, int64_t c) {
  const int h = static_cast<int>(t.shape[2]), w = static_cast<int>(t.shape[3]);
  Array2d a(h, w);
  const double* src = t.data.data() + ((b * t.shape[1] + c) * h) * w;
  std::memcpy(a.data.data(), src, static_cast<size_t>(h) * w * sizeof(double));
  return a;
}

}  // namespace

Tape::Node& Tape::node(NodeId id) { return nodes_[static_cast<size_t>(id)]; }
const Tape::Node& Tape::node(NodeId id) const { return nodes_[static_cast<size_t>(id)]; }

Tape::NodeId Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

const Tensor& Tape::value(NodeId id) const {
  const Node& n = node(id);
  if (n.val.data.empty() && shape_numel(n.val.shape) > 0)
    throw Error("Tape::value: node value was released by backward()");
  return n.val;
}

const std::vector<double>& Tape::grad(NodeId id) const { return node(id).grad; }

Tape::NodeId Tape::leaf(Tensor value) {
  Node n;
  n.op = Op::Leaf;
  n.requires_grad = value.requires_grad;
  n.val = std::move(value);
  return push(std::move(n));
}

Tape::NodeId Tape::conv2d(NodeId x, NodeId w, NodeId b) {
  const Tensor& xv = node(x).val;
  const Tensor& wv = node(w).val;
  const Tensor& bv = node(b).val;
  check_4d(xv, "conv2d input");
  check_4d(wv, "conv2d kernel");
  if (wv.shape[2] != 3 || wv.shape[3] != 3) throw Error("conv2d: kernel spatial size must be 3x3");
  if (wv.shape[1] != xv.shape[1]) throw Error("conv2d: kernel Cin does not match input");
  if (bv.shape.size() != 1 || bv.shape[0] != wv.shape[0]) throw Error("conv2d: bias shape mismatch");

  const int B = static_cast<int>(xv.shape[0]), Cin = static_cast<int>(xv.shape[1]);
  const int H = static_cast<int>(xv.shape[2]), W = static_cast<int>(xv.shape[3]);
  const int Cout = static_cast<int>(wv.shape[0]);

  Node n;
  n.op = Op::Conv2d;
  n.in[0] = x;
  n.in[1] = w;
  n.in[2] = b;
  n.requires_grad = node(x).requires_grad || node(w).requires_grad || node(b).requires_grad;
  n.val = Tensor({B, Cout, H, W});
  const size_t in_plane = static_cast<size_t>(Cin) * H * W;
  const size_t out_plane = static_cast<size_t>(Cout) * H * W;
  for (int img = 0; img < B; ++img)
    detail::conv3x3_forward(xv.data.data() + img * in_plane, wv.data.data(), bv.data.data(),
                            n.val.data.data() + img * out_plane, Cin, Cout, H, W);
  return push(std::move(n));
}

Tape::NodeId Tape::relu(NodeId x) {
  Node n;
  n.op = Op::Relu;
  n.in[0] = x;
  n.requires_grad = node(x).requires_grad;
  n.val = node(x).val;
  n.val.requires_grad = false;
  n.val.grad.clear();
  for (double& v : n.val.data) v = v > 0.0 ? v : 0.0;
  return push(std::move(n));
}

Tape::NodeId Tape::batch_norm(NodeId x, NodeId gamma, NodeId beta, BatchNormState& state, Mode mode) {
  const Tensor& xv = node(x).val;
  check_4d(xv, "batch_norm input");
  const int64_t B = xv.shape[0], C = xv.shape[1], H = xv.shape[2], W = xv.shape[3];
  const Tensor& gv = node(gamma).val;
  const Tensor& bv = node(beta).val;
  if (gv.shape.size() != 1 || gv.shape[0] != C || bv.shape.size() != 1 || bv.shape[0] != C)
    throw Error("batch_norm: gamma/beta must be [C]");
  if (static_cast<int64_t>(state.running_mean.size()) != C) throw Error("batch_norm: state channel mismatch");
  const int64_t n_per_c = B * H * W;
  if (mode == Mode::Train && n_per_c < 2) throw Error("batch_norm: train mode needs at least 2 elements per channel");

  Node n;
  n.op = Op::BatchNorm;
  n.in[0] = x;
  n.in[1] = gamma;
  n.in[2] = beta;
  n.mode = mode;
  n.requires_grad = node(x).requires_grad || node(gamma).requires_grad || node(beta).requires_grad;
  n.val = Tensor({B, C, H, W});
  n.saved.assign(static_cast<size_t>(2 * C), 0.0);  // mean[C], invstd[C]

  const int64_t plane = H * W;
  for (int64_t c = 0; c < C; ++c) {
    double mean, var;
    if (mode == Mode::Train) {
      double sum = 0.0;
      for (int64_t b = 0; b < B; ++b) {
        const double* p = xv.data.data() + (b * C + c) * plane;
        for (int64_t i = 0; i < plane; ++i) sum += p[i];
      }
      mean = sum / static_cast<double>(n_per_c);
      double sq = 0.0;
      for (int64_t b = 0; b < B; ++b) {
        const double* p = xv.data.data() + (b * C + c) * plane;
        for (int64_t i = 0; i < plane; ++i) {
          double d = p[i] - mean;
          sq += d * d;
        }
      }
      var = sq / static_cast<double>(n_per_c);
      state.running_mean[c] = kBatchNormMomentum * state.running_mean[c] + (1.0 - kBatchNormMomentum) * mean;
      state.running_var[c] = kBatchNormMomentum * state.running_var[c] + (1.0 - kBatchNormMomentum) * var;
    } else {
      mean = state.running_mean[c];
      var = state.running_var[c];
    }
    const double invstd = 1.0 / std::sqrt(var + kBatchNormEpsilon);
    n.saved[static_cast<size_t>(c)] = mean;
    n.saved[static_cast<size_t>(C + c)] = invstd;
    const double g = gv.data[static_cast<size_t>(c)];
    const double bta = bv.data[static_cast<size_t>(c)];
    for (int64_t b = 0; b < B; ++b) {
      const double* p = xv.data.data() + (b * C + c) * plane;
      double* q = n.val.data.data() + (b * C + c) * plane;
      for (int64_t i = 0; i < plane; ++i) q[i] = g * (p[i] - mean) * invstd + bta;
    }
  }
  return push(std::move(n));
}

Tape::NodeId Tape::spectral_diffusion(NodeId x, double tau) {
  const Tensor& xv = node(x).val;
  check_4d(xv, "spectral_diffusion input");
  if (tau < 0.0) throw Error("spectral_diffusion: tau must be nonnegative");

  Node n;
  n.op = Op::Diffusion;
  n.in[0] = x;
  n.p0 = tau;
  n.requires_grad = node(x).requires_grad;
  if (tau == 0.0) {
    n.val = xv;
    n.val.requires_grad = false;
    n.val.grad.clear();
    return push(std::move(n));
  }
  const int64_t B = xv.shape[0], C = xv.shape[1];
  const int64_t plane = xv.shape[2] * xv.shape[3];
  n.val = Tensor(xv.shape);
  for (int64_t b = 0; b < B; ++b) {
    for (int64_t c = 0; c < C; ++c) {
      Array2d out = implicit_heat_step(plane_to_array(xv, b, c), tau);
      std::memcpy(n.val.data.data() + (b * C + c) * plane, out.data.data(),
                  static_cast<size_t>(plane) * sizeof(double));
    }
  }
  return push(std::move(n));
}

Tape::NodeId Tape::sub(NodeId a, NodeId b) {
  const Tensor& av = node(a).val;
  const Tensor& bv = node(b).val;
  if (!av.same_shape(bv)) throw Error("sub: shape mismatch");
  Node n;
  n.op = Op::Sub;
  n.in[0] = a;
  n.in[1] = b;
  n.requires_grad = node(a).requires_grad || node(b).requires_grad;
  n.val = av;
  n.val.requires_grad = false;
  n.val.grad.clear();
  for (size_t i = 0; i < n.val.data.size(); ++i) n.val.data[i] -= bv.data[i];
  return push(std::move(n));
}

Tape::NodeId Tape::logcosh_loss(NodeId pred, Tensor target, double c) {
  const Tensor& pv = node(pred).val;
  if (!pv.same_shape(target)) throw Error("logcosh_loss: shape mismatch");
  Node n;
  n.op = Op::LogCosh;
  n.in[0] = pred;
  n.p0 = c;
  n.requires_grad = node(pred).requires_grad;
  n.aux = std::move(target);
  n.val = Tensor({1});
  double acc = 0.0;
  constexpr double kLn2 = 0.6931471805599453;
  for (size_t i = 0; i < pv.data.size(); ++i) {
    double r = n.aux.data[i] - pv.data[i] + c;
    double a = std::abs(r);
    acc += a + std::log1p(std::exp(-2.0 * a)) - kLn2;
  }
  n.val.data[0] = acc / static_cast<double>(pv.data.size());
  if (!std::isfinite(n.val.data[0])) throw Error("logcosh_loss: non-finite loss");
  return push(std::move(n));
}

Tape::NodeId Tape::log_floor(NodeId x, double floor) {
  if (!(floor > 0.0)) throw Error("log_floor: floor must be positive");
  Node n;
  n.op = Op::LogFloor;
  n.in[0] = x;
  n.p0 = floor;
  n.requires_grad = node(x).requires_grad;
  n.val = node(x).val;
  n.val.requires_grad = false;
  n.val.grad.clear();
  for (double& v : n.val.data) v = std::log(std::max(v, floor));
  return push(std::move(n));
}

Tape::NodeId Tape::add_scalar(NodeId x, double s) {
  Node n;
  n.op = Op::AddScalar;
  n.in[0] = x;
  n.p0 = s;
  n.requires_grad = node(x).requires_grad;
  n.val = node(x).val;
  n.val.requires_grad = false;
  n.val.grad.clear();
  for (double& v : n.val.data) v += s;
  return push(std::move(n));
}

Tape::NodeId Tape::exp_elem(NodeId x) {
  Node n;
  n.op = Op::Exp;
  n.in[0] = x;
  n.requires_grad = node(x).requires_grad;
  n.val = node(x).val;
  n.val.requires_grad = false;
  n.val.grad.clear();
  for (double& v : n.val.data) v = std::exp(v);
  return push(std::move(n));
}

Tape::NodeId Tape::clamp01(NodeId x) {
  Node n;
  n.op = Op::Clamp01;
  n.in[0] = x;
  n.requires_grad = node(x).requires_grad;
  n.val = node(x).val;
  n.val.requires_grad = false;
  n.val.grad.clear();
  for (double& v : n.val.data) v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
  return push(std::move(n));
}

Tape::NodeId Tape::squared_error(NodeId x, Tensor target) {
  const Tensor& xv = node(x).val;
  if (!xv.same_shape(target)) throw Error("squared_error: shape mismatch");
  Node n;
  n.op = Op::SquaredError;
  n.in[0] = x;
  n.requires_grad = node(x).requires_grad;
  n.aux = std::move(target);
  n.val = Tensor({1});
  double acc = 0.0;
  for (size_t i = 0; i < xv.data.size(); ++i) {
    double d = xv.data[i] - n.aux.data[i];
    acc += d * d;
  }
  n.val.data[0] = acc;
  return push(std::move(n));
}

void Tape::ensure_grad(Node& n) {
  if (n.grad.empty()) n.grad.assign(n.val.data.empty() ? static_cast<size_t>(shape_numel(n.val.shape)) : n.val.data.size(), 0.0);
}

void Tape::backward(NodeId root) {
  if (consumed_) throw Error("Tape::backward: tape already consumed");
  consumed_ = true;
  Node& r = node(root);
  if (shape_numel(r.val.shape) != 1) throw Error("Tape::backward: root must be scalar");
  if (!r.requires_grad) throw Error("Tape::backward: root does not require grad");
  ensure_grad(r);
  r.grad[0] = 1.0;

  for (NodeId i = root; i >= 0; --i) {
    Node& n = node(i);
    if (n.requires_grad && !n.grad.empty()) backward_one(i);
    if (n.op != Op::Leaf && i != root) {
      std::vector<double>().swap(n.val.data);
      std::vector<double>().swap(n.grad);
      std::vector<double>().swap(n.saved);
      std::vector<double>().swap(n.aux.data);
    }
  }
}

void Tape::backward_one(NodeId id) {
  Node& n = node(id);
  const std::vector<double>& g = n.grad;
  switch (n.op) {
    case Op::Leaf:
      break;
    case Op::Conv2d: {
      Node& xn = node(n.in[0]);
      Node& wn = node(n.in[1]);
      Node& bn = node(n.in[2]);
      const int B = static_cast<int>(xn.val.shape[0]), Cin = static_cast<int>(xn.val.shape[1]);
      const int H = static_cast<int>(xn.val.shape[2]), W = static_cast<int>(xn.val.shape[3]);
      const int Cout = static_cast<int>(wn.val.shape[0]);
      const size_t in_plane = static_cast<size_t>(Cin) * H * W;
      const size_t out_plane = static_cast<size_t>(Cout) * H * W;
      if (xn.requires_grad) {
        ensure_grad(xn);
        std::vector<double> dx(in_plane);
        for (int img = 0; img < B; ++img) {
          detail::conv3x3_grad_input(g.data() + img * out_plane, wn.val.data.data(), dx.data(), Cin, Cout, H, W);
          double* acc = xn.grad.data() + img * in_plane;
          for (size_t k = 0; k < in_plane; ++k) acc[k] += dx[k];
        }
      }
      if (wn.requires_grad || bn.requires_grad) {
        ensure_grad(wn);
        ensure_grad(bn);
        for (int img = 0; img < B; ++img)
          detail::conv3x3_grad_params(g.data() + img * out_plane, xn.val.data.data() + img * in_plane,
                                      wn.grad.data(), bn.grad.data(), Cin, Cout, H, W);
      }
      break;
    }
    case Op::Relu: {
      Node& xn = node(n.in[0]);
      if (!xn.requires_grad) break;
      ensure_grad(xn);
      for (size_t i = 0; i < g.size(); ++i)
        if (xn.val.data[i] > 0.0) xn.grad[i] += g[i];
      break;
    }
    case Op::BatchNorm: {
      Node& xn = node(n.in[0]);
      Node& gn = node(n.in[1]);
      Node& bn = node(n.in[2]);
      const int64_t B = xn.val.shape[0], C = xn.val.shape[1];
      const int64_t plane = xn.val.shape[2] * xn.val.shape[3];
      const int64_t cnt = B * plane;
      const bool need_x = xn.requires_grad;
      const bool need_g = gn.requires_grad;
      const bool need_b = bn.requires_grad;
      if (need_x) ensure_grad(xn);
      if (need_g) ensure_grad(gn);
      if (need_b) ensure_grad(bn);
      for (int64_t c = 0; c < C; ++c) {
        const double mean = n.saved[static_cast<size_t>(c)];
        const double invstd = n.saved[static_cast<size_t>(C + c)];
        const double gamma = gn.val.data[static_cast<size_t>(c)];
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (int64_t b = 0; b < B; ++b) {
          const double* gp = g.data() + (b * C + c) * plane;
          const double* xp = xn.val.data.data() + (b * C + c) * plane;
          for (int64_t i = 0; i < plane; ++i) {
            sum_dy += gp[i];
            sum_dy_xhat += gp[i] * (xp[i] - mean) * invstd;
          }
        }
        if (need_b) bn.grad[static_cast<size_t>(c)] += sum_dy;
        if (need_g) gn.grad[static_cast<size_t>(c)] += sum_dy_xhat;
        if (need_x) {
          if (n.mode == Mode::Train) {
            const double inv_cnt = 1.0 / static_cast<double>(cnt);
            for (int64_t b = 0; b < B; ++b) {
              const double* gp = g.data() + (b * C + c) * plane;
              const double* xp = xn.val.data.data() + (b * C + c) * plane;
              double* dxp = xn.grad.data() + (b * C + c) * plane;
              for (int64_t i = 0; i < plane; ++i) {
                double xhat = (xp[i] - mean) * invstd;
                dxp[i] += gamma * invstd * (gp[i] - sum_dy * inv_cnt - xhat * sum_dy_xhat * inv_cnt);
              }
            }
          } else {
            for (int64_t b = 0; b < B; ++b) {
              const double* gp = g.data() + (b * C + c) * plane;
              double* dxp = xn.grad.data() + (b * C + c) * plane;
              for (int64_t i = 0; i < plane; ++i) dxp[i] += gamma * invstd * gp[i];
            }
          }
        }
      }
      break;
    }
    case Op::Diffusion: {
      Node& xn = node(n.in[0]);
      if (!xn.requires_grad) break;
      ensure_grad(xn);
      if (n.p0 == 0.0) {
        for (size_t i = 0; i < g.size(); ++i) xn.grad[i] += g[i];
        break;
      }
      const int64_t B = xn.val.shape[0], C = xn.val.shape[1];
      const int h = static_cast<int>(xn.val.shape[2]), w = static_cast<int>(xn.val.shape[3]);
      const int64_t plane = static_cast<int64_t>(h) * w;
      for (int64_t b = 0; b < B; ++b) {
        for (int64_t c = 0; c < C; ++c) {
          Array2d gp(h, w);
          std::memcpy(gp.data.data(), g.data() + (b * C + c) * plane, static_cast<size_t>(plane) * sizeof(double));
          Array2d back = implicit_heat_step(gp, n.p0);
          double* acc = xn.grad.data() + (b * C + c) * plane;
          for (int64_t i = 0; i < plane; ++i) acc[i] += back.data[i];
        }
      }
      break;
    }
    case Op::Sub: {
      Node& an = node(n.in[0]);
      Node& bn = node(n.in[1]);
      if (an.requires_grad) {
        ensure_grad(an);
        for (size_t i = 0; i < g.size(); ++i) an.grad[i] += g[i];
      }
      if (bn.requires_grad) {
        ensure_grad(bn);
        for (size_t i = 0; i < g.size(); ++i) bn.grad[i] -= g[i];
      }
      break;
    }
    case Op::LogCosh: {
      Node& pn = node(n.in[0]);
      if (!pn.requires_grad) break;
      ensure_grad(pn);
      const double scale = g[0] / static_cast<double>(pn.val.data.size());
      for (size_t i = 0; i < pn.val.data.size(); ++i) {
        double r = n.aux.data[i] - pn.val.data[i] + n.p0;
        pn.grad[i] += -std::tanh(r) * scale;
      }
      break;
    }
    case Op::LogFloor: {
      Node& xn = node(n.in[0]);
      if (!xn.requires_grad) break;
      ensure_grad(xn);
      for (size_t i = 0; i < g.size(); ++i)
        if (xn.val.data[i] > n.p0) xn.grad[i] += g[i] / xn.val.data[i];
      break;
    }
    case Op::AddScalar: {
      Node& xn = node(n.in[0]);
      if (!xn.requires_grad) break;
      ensure_grad(xn);
      for (size_t i = 0; i < g.size(); ++i) xn.grad[i] += g[i];
      break;
    }
    case Op::Exp: {
      Node& xn = node(n.in[0]);
      if (!xn.requires_grad) break;
      ensure_grad(xn);
      for (size_t i = 0; i < g.size(); ++i) xn.grad[i] += g[i] * n.val.data[i];
      break;
    }
    case Op::Clamp01: {
      Node& xn = node(n.in[0]);
      if (!xn.requires_grad) break;
      ensure_grad(xn);
      for (size_t i = 0; i < g.size(); ++i) {
        double x = xn.val.data[i];
        if (x > 0.0 && x < 1.0) xn.grad[i] += g[i];
      }
      break;
    }
    case Op::SquaredError: {
      Node& xn = node(n.in[0]);
      if (!xn.requires_grad) break;
      ensure_grad(xn);
      const double scale = 2.0 * g[0];
      for (size_t i = 0; i < xn.val.data.size(); ++i)
        xn.grad[i] += scale * (xn.val.data[i] - n.aux.data[i]);
      break;
    }
  }
}

}  // namespace despeckle
