#pragma once

// Low-level 3x3 same-convolution kernels (zero padding 1) shared by the tape
// ops and the fast inference path. Layouts: activations [C][H][W] contiguous
// per image, weights [Cout][Cin][3][3], all row-major.
//
// Accumulation order is fixed by the loop structure (ci ascending, kh, kw),
// independent of any threading over output planes, so results are
// bit-deterministic for fixed inputs.

namespace despeckle::detail {

// y[co] = bias[co] + sum_ci w[co][ci] (cross-)correlated with x[ci]
void conv3x3_forward(const double* x, const double* w, const double* bias, double* y,
                     int cin, int cout, int h, int wd);

// dx[ci] = sum_co flip(w[co][ci]) correlated with dy[co]
void conv3x3_grad_input(const double* dy, const double* w, double* dx,
                        int cin, int cout, int h, int wd);

// dw[co][ci][kh][kw] += sum_{h,w} dy[co](h,w) * x[ci](h+kh-1, w+kw-1)
// db[co] += sum dy[co]
void conv3x3_grad_params(const double* dy, const double* x, double* dw, double* db,
                         int cin, int cout, int h, int wd);

}  // namespace despeckle::detail
