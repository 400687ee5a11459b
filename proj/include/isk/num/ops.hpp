#pragma once

#include <vector>

#include "isk/num/tape.hpp"
#include "isk/num/tensor.hpp"

// Differentiable primitives. Every op validates shapes, computes its value
// eagerly, and registers an adjoint that accumulates into the gradient
// sinks of its parents. Unless noted otherwise, dimension 0 is the batch
// dimension and ops act row-wise on the flattened remainder.

namespace isk::num {

// ---- elementwise ----
Var add(Tape& t, Var a, Var b);
Var sub(Tape& t, Var a, Var b);
Var mul(Tape& t, Var a, Var b);
Var scale(Tape& t, Var x, real c);
Var square(Tape& t, Var x);
Var sub_const(Tape& t, Var x, const Tensor& c);
Var leaky_relu(Tape& t, Var x, real slope);
Var sigmoid(Tape& t, Var x);
Var tanh_act(Tape& t, Var x);
// log(max(x, floor)); the clamped region contributes zero gradient.
Var log_floor(Tape& t, Var x, real floor_v);

// ---- shape ----
Var reshape(Tape& t, Var x, std::vector<int> shape);
Var concat_cols(Tape& t, Var a, Var b);              // [B,Ca]+[B,Cb] -> [B,Ca+Cb]
Var slice_cols(Tape& t, Var x, int begin, int len);  // [B,C] -> [B,len]
Var concat_channels(Tape& t, Var a, Var b);          // [B,C1,H,W]+[B,C2,H,W]
Var slice_channels(Tape& t, Var x, int begin, int len);

// ---- reductions ----
Var sum_all(Tape& t, Var x);                    // -> [1]
Var dot_const(Tape& t, Var x, const Tensor& w); // sum(x*w) -> [1]
Var gather_rows(Tape& t, Var x, const std::vector<int>& col);  // [B,C] -> [B]
// Sums of non-overlapping block x block patches in row-major block order.
Var block_sum(Tape& t, Var x, int block);       // [B,H,W] -> [B,(H/b)*(W/b)]

// ---- affine / normalization ----
Var dense(Tape& t, Var x, Var W, Var b);   // x[B,I] W[O,I] b[O] -> [B,O]
Var linear(Tape& t, Var x, Var W);         // dense without bias
// Per-row normalization over the feature dimension (population variance),
// then elementwise gain and bias.
Var layer_norm(Tape& t, Var x, Var gain, Var bias, real eps);

// ---- distributions ----
Var softmax(Tape& t, Var logits);  // row-wise
// Row-wise softmax restricted to entries with allowed != 0; disallowed
// entries get exactly zero probability and zero gradient. A row with no
// allowed entry is an error.
Var softmax_masked(Tape& t, Var logits, const Tensor& allowed);
Var entropy_rows(Tape& t, Var p);  // [B,Q] -> [B], 0*log(0) := 0
// Row-wise Bernoulli log-likelihood sum_j x*log(f) + (1-x)*log(1-f), with
// both logs floored at floor_v.
Var bernoulli_ll_rows(Tape& t, Var f, const Tensor& x, real floor_v);
// Row-wise unit-variance Gaussian log-likelihood up to a constant:
// -0.5 * sum_j (x - f)^2.
Var gaussian_ll_rows(Tape& t, Var f, const Tensor& x);

// ---- convolution (odd kernel, zero padding (k-1)/2) ----
// Stride 1: x[B,Ci,H,W], K[Co,Ci,k,k], b[Co] -> [B,Co,H,W]
Var conv2d_same(Tape& t, Var x, Var K, Var b);
// Stride 2: x[B,Ci,H,W] (H,W even), K[Co,Ci,k,k], b[Co] -> [B,Co,H/2,W/2]
Var conv2d_down(Tape& t, Var x, Var K, Var b);
// Transposed counterpart: x[B,Ci,h,w], K[Ci,Co,k,k], b[Co] -> [B,Co,2h,2w].
// Kernel dim 0 is the *input* channel, so a down kernel [Co,Ci,k,k] can be
// shared as-is, and conv2d_up is then the exact adjoint of conv2d_down:
// <conv2d_down(x,K), y> == <x, conv2d_up(y,K)> at zero bias.
Var conv2d_up(Tape& t, Var x, Var K, Var b);

// ---- recurrent ----
struct LstmVars {
  Var h;
  Var c;
};
// One LSTM step built from the primitives above. Gate order along the
// stacked weight rows is [input, forget, cell, output]:
//   z = x Wx^T + h Wh^T + b
//   c' = sigmoid(z_f) * c + sigmoid(z_i) * tanh(z_g)
//   h' = sigmoid(z_o) * tanh(c')
// x[B,I], h[B,H], c[B,H], Wx[4H,I], Wh[4H,H], b[4H].
LstmVars lstm_step(Tape& t, Var x, Var h, Var c, Var Wx, Var Wh, Var b);

}  // namespace isk::num
