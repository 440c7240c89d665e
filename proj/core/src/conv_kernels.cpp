#include "conv_kernels.hpp"

#include <algorithm>
#include <cstring>
#include <vector>

namespace despeckle::detail {

namespace {

// Four output planes per sweep so every input row load feeds 12 FMAs.
// The interior columns run the fully fused 9-tap expression; the two edge
// columns fall back to the taps that stay in bounds (zero padding).
void conv_rows_x4(const double* x, const double* w, const double* bias, double* y,
                  int cin, int cout, int h, int wd, int co0) {
  const int hw = h * wd;
  const int nb = std::min(4, cout - co0);
  std::vector<double> acc(static_cast<size_t>(4) * wd);
  for (int row = 0; row < h; ++row) {
    for (int j = 0; j < nb; ++j) std::fill(&acc[j * wd], &acc[j * wd] + wd, bias ? bias[co0 + j] : 0.0);
    for (int ci = 0; ci < cin; ++ci) {
      const double* xp = x + static_cast<size_t>(ci) * hw;
      for (int kh = 0; kh < 3; ++kh) {
        const int hh = row + kh - 1;
        if (hh < 0 || hh >= h) continue;
        const double* xr = xp + static_cast<size_t>(hh) * wd;
        if (nb == 4) {
          const double* wk0 = w + (static_cast<size_t>(co0 + 0) * cin + ci) * 9 + kh * 3;
          const double* wk1 = w + (static_cast<size_t>(co0 + 1) * cin + ci) * 9 + kh * 3;
          const double* wk2 = w + (static_cast<size_t>(co0 + 2) * cin + ci) * 9 + kh * 3;
          const double* wk3 = w + (static_cast<size_t>(co0 + 3) * cin + ci) * 9 + kh * 3;
          const double k00 = wk0[0], k01 = wk0[1], k02 = wk0[2];
          const double k10 = wk1[0], k11 = wk1[1], k12 = wk1[2];
          const double k20 = wk2[0], k21 = wk2[1], k22 = wk2[2];
          const double k30 = wk3[0], k31 = wk3[1], k32 = wk3[2];
          double* a0 = &acc[0];
          double* a1 = &acc[wd];
          double* a2 = &acc[2 * wd];
          double* a3 = &acc[3 * wd];
          for (int c = 1; c < wd - 1; ++c) {
            const double xm = xr[c - 1], x0 = xr[c], xp1 = xr[c + 1];
            a0[c] += k00 * xm + k01 * x0 + k02 * xp1;
            a1[c] += k10 * xm + k11 * x0 + k12 * xp1;
            a2[c] += k20 * xm + k21 * x0 + k22 * xp1;
            a3[c] += k30 * xm + k31 * x0 + k32 * xp1;
          }
          a0[0] += k01 * xr[0] + (wd > 1 ? k02 * xr[1] : 0.0);
          a1[0] += k11 * xr[0] + (wd > 1 ? k12 * xr[1] : 0.0);
          a2[0] += k21 * xr[0] + (wd > 1 ? k22 * xr[1] : 0.0);
          a3[0] += k31 * xr[0] + (wd > 1 ? k32 * xr[1] : 0.0);
          if (wd > 1) {
            a0[wd - 1] += k00 * xr[wd - 2] + k01 * xr[wd - 1];
            a1[wd - 1] += k10 * xr[wd - 2] + k11 * xr[wd - 1];
            a2[wd - 1] += k20 * xr[wd - 2] + k21 * xr[wd - 1];
            a3[wd - 1] += k30 * xr[wd - 2] + k31 * xr[wd - 1];
          }
        } else {
          for (int j = 0; j < nb; ++j) {
            const double* wk = w + (static_cast<size_t>(co0 + j) * cin + ci) * 9 + kh * 3;
            double* a = &acc[j * wd];
            for (int c = 0; c < wd; ++c) {
              double s = wk[1] * xr[c];
              if (c > 0) s += wk[0] * xr[c - 1];
              if (c < wd - 1) s += wk[2] * xr[c + 1];
              a[c] += s;
            }
          }
        }
      }
    }
    for (int j = 0; j < nb; ++j)
      std::memcpy(y + (static_cast<size_t>(co0 + j) * h + row) * wd, &acc[j * wd],
                  static_cast<size_t>(wd) * sizeof(double));
  }
}

}  // namespace

void conv3x3_forward(const double* x, const double* w, const double* bias, double* y,
                     int cin, int cout, int h, int wd) {
#pragma omp parallel for schedule(static)
  for (int co0 = 0; co0 < cout; co0 += 4) conv_rows_x4(x, w, bias, y, cin, cout, h, wd, co0);
}

void conv3x3_grad_input(const double* dy, const double* w, double* dx,
                        int cin, int cout, int h, int wd) {
  // dx = correlation of dy with the spatially flipped kernels, channels
  // transposed: wt[ci][co][k] = w[co][ci][8-k]. Regather, then reuse the
  // forward sweep with (cin, cout) swapped.
  std::vector<double> wt(static_cast<size_t>(cin) * cout * 9);
  for (int co = 0; co < cout; ++co)
    for (int ci = 0; ci < cin; ++ci)
      for (int k = 0; k < 9; ++k)
        wt[(static_cast<size_t>(ci) * cout + co) * 9 + k] = w[(static_cast<size_t>(co) * cin + ci) * 9 + (8 - k)];
#pragma omp parallel for schedule(static)
  for (int ci0 = 0; ci0 < cin; ci0 += 4) conv_rows_x4(dy, wt.data(), nullptr, dx, cout, cin, h, wd, ci0);
}

void conv3x3_grad_params(const double* dy, const double* x, double* dw, double* db,
                         int cin, int cout, int h, int wd) {
  const int hw = h * wd;
#pragma omp parallel for schedule(static)
  for (int co = 0; co < cout; ++co) {
    const double* dyp = dy + static_cast<size_t>(co) * hw;
    if (db) {
      // eight independent partial sums, combined in a fixed tree
      double p[8] = {0, 0, 0, 0, 0, 0, 0, 0};
      int i = 0;
      for (; i + 8 <= hw; i += 8)
        for (int j = 0; j < 8; ++j) p[j] += dyp[i + j];
      for (; i < hw; ++i) p[i % 8] += dyp[i];
      db[co] += ((p[0] + p[1]) + (p[2] + p[3])) + ((p[4] + p[5]) + (p[6] + p[7]));
    }
    for (int ci = 0; ci < cin; ++ci) {
      const double* xp = x + static_cast<size_t>(ci) * hw;
      double* dwk = dw + (static_cast<size_t>(co) * cin + ci) * 9;
      for (int kh = 0; kh < 3; ++kh) {
        const int dh = kh - 1;
        const int r0 = std::max(0, -dh), r1 = h - std::max(0, dh);
        for (int kw = 0; kw < 3; ++kw) {
          const int dcol = kw - 1;
          const int c0 = std::max(0, -dcol), c1 = wd - std::max(0, dcol);
          double p[8] = {0, 0, 0, 0, 0, 0, 0, 0};
          for (int r = r0; r < r1; ++r) {
            const double* dyr = dyp + static_cast<size_t>(r) * wd;
            const double* xr = xp + static_cast<size_t>(r + dh) * wd + dcol;
            int c = c0;
            for (; c + 8 <= c1; c += 8)
              for (int j = 0; j < 8; ++j) p[j] += dyr[c + j] * xr[c + j];
            for (; c < c1; ++c) p[(c - c0) % 8] += dyr[c] * xr[c];
          }
          dwk[kh * 3 + kw] += ((p[0] + p[1]) + (p[2] + p[3])) + ((p[4] + p[5]) + (p[6] + p[7]));
        }
      }
    }
  }
}

}  // namespace despeckle::detail
