#pragma once

#include <vector>

#include "fairway/ad/graph.hpp"

namespace fairway::ad {

// Elementwise / scalar
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var divide(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var add_const(const Var& a, double c);
Var mul_const(const Var& a, const Tensor& m); // elementwise with a constant tensor
Var relu(const Var& a);
Var sigmoid(const Var& a);
Var softplus(const Var& a); // log(1 + e^x), numerically stable

// Reductions
Var sum_all(const Var& a);
Var mean_all(const Var& a);

// Token-matrix ops, shapes (n, m)
Var matmul(const Var& a, const Var& b, bool transpose_b = false);
Var add_rowvec(const Var& a, const Var& v);
Var softmax_rows(const Var& a);
Var slice_cols(const Var& a, int c0, int c1);
Var concat_cols(const std::vector<Var>& parts);
Var reshape(const Var& a, std::vector<int> shape);

// Spatial ops, shapes (h, w, c). Convolution weights are (k, k, c_in,
// c_out), biases (c_out); zero padding.
Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad);
/// Deformable convolution (v1): `offsets` is (h, w, 2*k*k) holding a
/// (dy, dx) displacement per kernel tap, in feature-grid cells; samples
/// are bilinear with zeros outside the grid. Stride 1, shape preserved.
Var deform_conv2d(const Var& x, const Var& w, const Var& b, const Var& offsets, int pad);
Var upsample_bilinear(const Var& x, int factor);
Var channel_mean(const Var& x); // (h,w,c) -> (h,w,1)
Var channel_max(const Var& x);  // (h,w,c) -> (h,w,1), ties pick the lowest channel
Var concat_channels(const Var& a, const Var& b);
Var mul_channel_gate(const Var& x, const Var& gate);  // (h,w,c) * (c)
Var mul_spatial_gate(const Var& x, const Var& gate);  // (h,w,c) * (h,w,1)

/// Contour surrogate: isotropic boundary-softness weights per pixel cell,
/// b = min(sqrt(dx^2 + dy^2), 1) with dx, dy the cell-averaged central
/// differences of the water probability, summed against fixed cell-center
/// distances d_cell (h-1, w-1):
///   L = beta * (sum d*b) / (sum b + eps) / diag.
/// For hard masks b equals the marching-squares arc length inside each
/// cell, so the sum is an arc-length-weighted mean distance along the
/// predicted contour. A total transition mass below one full crossing
/// contributes zero (and no gradient).
Var contour_surrogate(const Var& p, const Tensor& d_cell, double beta, double diag, double eps);

} // namespace fairway::ad
