#include "isk/num/ops.hpp"

#include <cmath>

#include "isk/num/error.hpp"
#include "isk/num/kernels.hpp"
#include "isk/num/parallel.hpp"

namespace isk::num {

namespace {

const Tensor& grad_of(Tape& t, int self) { return *t.grad_sink(Var{self}); }

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  ISK_CHECK(a.same_shape(b),
            op << ": shape mismatch " << a.shape_str() << " vs " << b.shape_str());
}

void check_rank(const Tensor& x, int rank, const char* op) {
  ISK_CHECK(x.rank() == rank,
            op << ": expected rank " << rank << ", got " << x.shape_str());
}

real stable_sigmoid(real x) {
  if (x >= 0) {
    const real e = std::exp(-x);
    return real(1) / (real(1) + e);
  }
  const real e = std::exp(x);
  return e / (real(1) + e);
}

}  // namespace

// ---------------------------------------------------------------- elementwise

Var add(Tape& t, Var a, Var b) {
  const Tensor& av = t.val(a);
  const Tensor& bv = t.val(b);
  check_same_shape(av, bv, "add");
  Tensor y = av;
  for (int i = 0; i < y.size(); ++i) y[i] += bv[i];
  return t.make(
      std::move(y), {a, b},
      [a, b](Tape& t, int self) {
        const Tensor& g = grad_of(t, self);
        if (Tensor* da = t.grad_sink(a)) axpy(da->data(), g.data(), 1, g.size());
        if (Tensor* db = t.grad_sink(b)) axpy(db->data(), g.data(), 1, g.size());
      },
      "add");
}

Var sub(Tape& t, Var a, Var b) {
  const Tensor& av = t.val(a);
  const Tensor& bv = t.val(b);
  check_same_shape(av, bv, "sub");
  Tensor y = av;
  for (int i = 0; i < y.size(); ++i) y[i] -= bv[i];
  return t.make(
      std::move(y), {a, b},
      [a, b](Tape& t, int self) {
        const Tensor& g = grad_of(t, self);
        if (Tensor* da = t.grad_sink(a)) axpy(da->data(), g.data(), 1, g.size());
        if (Tensor* db = t.grad_sink(b)) axpy(db->data(), g.data(), -1, g.size());
      },
      "sub");
}

Var mul(Tape& t, Var a, Var b) {
  const Tensor& av = t.val(a);
  const Tensor& bv = t.val(b);
  check_same_shape(av, bv, "mul");
  Tensor y = av;
  for (int i = 0; i < y.size(); ++i) y[i] *= bv[i];
  return t.make(
      std::move(y), {a, b},
      [a, b](Tape& t, int self) {
        const Tensor& g = grad_of(t, self);
        const Tensor& av = t.val(a);
        const Tensor& bv = t.val(b);
        if (Tensor* da = t.grad_sink(a))
          for (int i = 0; i < g.size(); ++i) (*da)[i] += g[i] * bv[i];
        if (Tensor* db = t.grad_sink(b))
          for (int i = 0; i < g.size(); ++i) (*db)[i] += g[i] * av[i];
      },
      "mul");
}

Var scale(Tape& t, Var x, real c) {
  Tensor y = t.val(x);
  for (int i = 0; i < y.size(); ++i) y[i] *= c;
  return t.make(
      std::move(y), {x},
      [x, c](Tape& t, int self) {
        const Tensor& g = grad_of(t, self);
        if (Tensor* dx = t.grad_sink(x)) axpy(dx->data(), g.data(), c, g.size());
      },
      "scale");
}

Var square(Tape& t, Var x) {
  Tensor y = t.val(x);
  for (int i = 0; i < y.size(); ++i) y[i] *= y[i];
  return t.make(
      std::move(y), {x},
      [x](Tape& t, int self) {
        const Tensor& g = grad_of(t, self);
        const Tensor& xv = t.val(x);
        if (Tensor* dx = t.grad_sink(x))
          for (int i = 0; i < g.size(); ++i) (*dx)[i] += real(2) * xv[i] * g[i];
      },
      "square");
}

Var sub_const(Tape& t, Var x, const Tensor& c) {
  const Tensor& xv = t.val(x);
  check_same_shape(xv, c, "sub_const");
  Tensor y = xv;
  for (int i = 0; i < y.size(); ++i) y[i] -= c[i];
  return t.make(
      std::move(y), {x},
      [x](Tape& t, int self) {
        const Tensor& g = grad_of(t, self);
        if (Tensor* dx = t.grad_sink(x)) axpy(dx->data(), g.data(), 1, g.size());
      },
      "sub_const");
}

Var leaky_relu(Tape& t, Var x, real slope) {
  Tensor y = t.val(x);
  for (int i = 0; i < y.size(); ++i)
    if (y[i] <= 0) y[i] *= slope;
  return t.make(
      std::move(y), {x},
      [x, slope](Tape& t, int self) {
        const Tensor& g = grad_of(t, self);
        const Tensor& xv = t.val(x);
        if (Tensor* dx = t.grad_sink(x))
          for (int i = 0; i < g.size(); ++i)
            (*dx)[i] += g[i] * (xv[i] > 0 ? real(1) : slope);
      },
      "leaky_relu");
}

Var sigmoid(Tape& t, Var x) {
  Tensor y = t.val(x);
  for (int i = 0; i < y.size(); ++i) y[i] = stable_sigmoid(y[i]);
  return t.make(
      std::move(y), {x},
      [x](Tape& t, int self) {
        const Tensor& g = grad_of(t, self);
        const Tensor& yv = t.val(Var{self});
        if (Tensor* dx = t.grad_sink(x))
          for (int i = 0; i < g.size(); ++i)
            (*dx)[i] += g[i] * yv[i] * (real(1) - yv[i]);
      },
      "sigmoid");
}

Var tanh_act(Tape& t, Var x) {
  Tensor y = t.val(x);
  for (int i = 0; i < y.size(); ++i) y[i] = std::tanh(y[i]);
  return t.make(
      std::move(y), {x},
      [x](Tape& t, int self) {
        const Tensor& g = grad_of(t, self);
        const Tensor& yv = t.val(Var{self});
        if (Tensor* dx = t.grad_sink(x))
          for (int i = 0; i < g.size(); ++i)
            (*dx)[i] += g[i] * (real(1) - yv[i] * yv[i]);
      },
      "tanh");
}

Var log_floor(Tape& t, Var x, real floor_v) {
  ISK_CHECK(floor_v > 0, "log_floor: floor must be positive, got " << floor_v);
  Tensor y = t.val(x);
  for (int i = 0; i < y.size(); ++i) y[i] = std::log(y[i] > floor_v ? y[i] : floor_v);
  return t.make(
      std::move(y), {x},
      [x, floor_v](Tape& t, int self) {
        const Tensor& g = grad_of(t, self);
        const Tensor& xv = t.val(x);
        if (Tensor* dx = t.grad_sink(x))
          for (int i = 0; i < g.size(); ++i)
            if (xv[i] > floor_v) (*dx)[i] += g[i] / xv[i];
      },
      "log_floor");
}

// ---------------------------------------------------------------------- shape

Var reshape(Tape& t, Var x, std::vector<int> shape) {
  const Tensor& xv = t.val(x);
  ISK_CHECK(Tensor::checked_size(shape) == xv.size(),
            "reshape: cannot view " << xv.shape_str() << " as "
                                    << Tensor::shape_string(shape));
  Tensor y = Tensor::from(std::move(shape),
                          std::vector<real>(xv.data(), xv.data() + xv.size()));
  return t.make(
      std::move(y), {x},
      [x](Tape& t, int self) {
        const Tensor& g = grad_of(t, self);
        if (Tensor* dx = t.grad_sink(x)) axpy(dx->data(), g.data(), 1, g.size());
      },
      "reshape");
}

Var concat_cols(Tape& t, Var a, Var b) {
  const Tensor& av = t.val(a);
  const Tensor& bv = t.val(b);
  check_rank(av, 2, "concat_cols");
  check_rank(bv, 2, "concat_cols");
  ISK_CHECK(av.shape()[0] == bv.shape()[0],
            "concat_cols: row mismatch " << av.shape_str() << " vs " << bv.shape_str());
  const int B = av.shape()[0], ca = av.shape()[1], cb = bv.shape()[1];
  Tensor y({B, ca + cb});
  for (int r = 0; r < B; ++r) {
    for (int j = 0; j < ca; ++j) y.at(r, j) = av.at(r, j);
    for (int j = 0; j < cb; ++j) y.at(r, ca + j) = bv.at(r, j);
  }
  return t.make(
      std::move(y), {a, b},
      [a, b, ca, cb](Tape& t, int self) {
        const Tensor& g = grad_of(t, self);
        const int B = g.shape()[0];
        if (Tensor* da = t.grad_sink(a))
          for (int r = 0; r < B; ++r)
            for (int j = 0; j < ca; ++j) da->at(r, j) += g.at(r, j);
        if (Tensor* db = t.grad_sink(b))
          for (int r = 0; r < B; ++r)
            for (int j = 0; j < cb; ++j) db->at(r, j) += g.at(r, ca + j);
      },
      "concat_cols");
}

Var slice_cols(Tape& t, Var x, int begin, int len) {
  const Tensor& xv = t.val(x);
  check_rank(xv, 2, "slice_cols");
  const int B = xv.shape()[0], C = xv.shape()[1];
  ISK_CHECK(begin >= 0 && len > 0 && begin + len <= C,
            "slice_cols: range [" << begin << "," << begin + len << ") out of "
                                  << xv.shape_str());
  Tensor y({B, len});
  for (int r = 0; r < B; ++r)
    for (int j = 0; j < len; ++j) y.at(r, j) = xv.at(r, begin + j);
  return t.make(
      std::move(y), {x},
      [x, begin, len](Tape& t, int self) {
        const Tensor& g = grad_of(t, self);
        const int B = g.shape()[0];
        if (Tensor* dx = t.grad_sink(x))
          for (int r = 0; r < B; ++r)
            for (int j = 0; j < len; ++j) dx->at(r, begin + j) += g.at(r, j);
      },
      "slice_cols");
}

Var concat_channels(Tape& t, Var a, Var b) {
  const Tensor& av = t.val(a);
  const Tensor& bv = t.val(b);
  check_rank(av, 4, "concat_channels");
  check_rank(bv, 4, "concat_channels");
  ISK_CHECK(av.shape()[0] == bv.shape()[0] && av.shape()[2] == bv.shape()[2] &&
                av.shape()[3] == bv.shape()[3],
            "concat_channels: incompatible " << av.shape_str() << " vs "
                                             << bv.shape_str());
  const int B = av.shape()[0], c1 = av.shape()[1], c2 = bv.shape()[1];
  const int hw = av.shape()[2] * av.shape()[3];
  Tensor y({B, c1 + c2, av.shape()[2], av.shape()[3]});
  for (int r = 0; r < B; ++r) {
    real* dst = y.data() + static_cast<size_t>(r) * (c1 + c2) * hw;
    const real* pa = av.data() + static_cast<size_t>(r) * c1 * hw;
    const real* pb = bv.data() + static_cast<size_t>(r) * c2 * hw;
    for (int i = 0; i < c1 * hw; ++i) dst[i] = pa[i];
    for (int i = 0; i < c2 * hw; ++i) dst[c1 * hw + i] = pb[i];
  }
  return t.make(
      std::move(y), {a, b},
      [a, b, c1, c2, hw](Tape& t, int self) {
        const Tensor& g = grad_of(t, self);
        const int B = g.shape()[0];
        if (Tensor* da = t.grad_sink(a))
          for (int r = 0; r < B; ++r)
            axpy(da->data() + static_cast<size_t>(r) * c1 * hw,
                 g.data() + static_cast<size_t>(r) * (c1 + c2) * hw, 1, c1 * hw);
        if (Tensor* db = t.grad_sink(b))
          for (int r = 0; r < B; ++r)
            axpy(db->data() + static_cast<size_t>(r) * c2 * hw,
                 g.data() + static_cast<size_t>(r) * (c1 + c2) * hw + c1 * hw, 1,
                 c2 * hw);
      },
      "concat_channels");
}

Var slice_channels(Tape& t, Var x, int begin, int len) {
  const Tensor& xv = t.val(x);
  check_rank(xv, 4, "slice_channels");
  const int B = xv.shape()[0], C = xv.shape()[1];
  const int hw = xv.shape()[2] * xv.shape()[3];
  ISK_CHECK(begin >= 0 && len > 0 && begin + len <= C,
            "slice_channels: range [" << begin << "," << begin + len << ") out of "
                                      << xv.shape_str());
  Tensor y({B, len, xv.shape()[2], xv.shape()[3]});
  for (int r = 0; r < B; ++r) {
    const real* src = xv.data() + (static_cast<size_t>(r) * C + begin) * hw;
    real* dst = y.data() + static_cast<size_t>(r) * len * hw;
    for (int i = 0; i < len * hw; ++i) dst[i] = src[i];
  }
  return t.make(
      std::move(y), {x},
      [x, begin, len, C, hw](Tape& t, int self) {
        const Tensor& g = grad_of(t, self);
        const int B = g.shape()[0];
        if (Tensor* dx = t.grad_sink(x))
          for (int r = 0; r < B; ++r)
            axpy(dx->data() + (static_cast<size_t>(r) * C + begin) * hw,
                 g.data() + static_cast<size_t>(r) * len * hw, 1, len * hw);
      },
      "slice_channels");
}

// ----------------------------------------------------------------- reductions

Var sum_all(Tape& t, Var x) {
  const Tensor& xv = t.val(x);
  real s = 0;
  for (int i = 0; i < xv.size(); ++i) s += xv[i];
  return t.make(
      Tensor::scalar(s), {x},
      [x](Tape& t, int self) {
        const real g = grad_of(t, self)[0];
        if (Tensor* dx = t.grad_sink(x))
          for (int i = 0; i < dx->size(); ++i) (*dx)[i] += g;
      },
      "sum_all");
}

Var dot_const(Tape& t, Var x, const Tensor& w) {
  const Tensor& xv = t.val(x);
  check_same_shape(xv, w, "dot_const");
  const real s = dot(xv.data(), w.data(), xv.size());
  return t.make(
      Tensor::scalar(s), {x},
      [x, w](Tape& t, int self) {
        const real g = grad_of(t, self)[0];
        if (Tensor* dx = t.grad_sink(x)) axpy(dx->data(), w.data(), g, w.size());
      },
      "dot_const");
}

Var gather_rows(Tape& t, Var x, const std::vector<int>& col) {
  const Tensor& xv = t.val(x);
  check_rank(xv, 2, "gather_rows");
  const int B = xv.shape()[0], C = xv.shape()[1];
  ISK_CHECK(static_cast<int>(col.size()) == B,
            "gather_rows: need " << B << " indices, got " << col.size());
  Tensor y({B});
  for (int r = 0; r < B; ++r) {
    ISK_CHECK(col[r] >= 0 && col[r] < C,
              "gather_rows: index " << col[r] << " out of [0," << C << ") at row " << r);
    y[r] = xv.at(r, col[r]);
  }
  return t.make(
      std::move(y), {x},
      [x, col](Tape& t, int self) {
        const Tensor& g = grad_of(t, self);
        if (Tensor* dx = t.grad_sink(x))
          for (int r = 0; r < g.size(); ++r) dx->at(r, col[r]) += g[r];
      },
      "gather_rows");
}

Var block_sum(Tape& t, Var x, int block) {
  const Tensor& xv = t.val(x);
  check_rank(xv, 3, "block_sum");
  const int B = xv.shape()[0], H = xv.shape()[1], W = xv.shape()[2];
  ISK_CHECK(block > 0 && H % block == 0 && W % block == 0,
            "block_sum: block " << block << " does not tile " << xv.shape_str());
  const int nh = H / block, nw = W / block;
  Tensor y({B, nh * nw});
  for (int r = 0; r < B; ++r) {
    const real* src = xv.data() + static_cast<size_t>(r) * H * W;
    for (int bh = 0; bh < nh; ++bh)
      for (int bw = 0; bw < nw; ++bw) {
        real s = 0;
        for (int u = 0; u < block; ++u)
          for (int v = 0; v < block; ++v)
            s += src[(bh * block + u) * W + bw * block + v];
        y.at(r, bh * nw + bw) = s;
      }
  }
  return t.make(
      std::move(y), {x},
      [x, block, H, W, nw](Tape& t, int self) {
        const Tensor& g = grad_of(t, self);
        const int B = g.shape()[0];
        if (Tensor* dx = t.grad_sink(x))
          for (int r = 0; r < B; ++r) {
            real* dst = dx->data() + static_cast<size_t>(r) * H * W;
            for (int i = 0; i < H; ++i)
              for (int j = 0; j < W; ++j)
                dst[i * W + j] += g.at(r, (i / block) * nw + j / block);
          }
      },
      "block_sum");
}

// ------------------------------------------------------- affine/normalization

namespace {

Var dense_impl(Tape& t, Var x, Var W, Var b, const char* op) {
  const Tensor& xv = t.val(x);
  const Tensor& Wv = t.val(W);
  check_rank(xv, 2, op);
  check_rank(Wv, 2, op);
  const int B = xv.shape()[0], I = xv.shape()[1], O = Wv.shape()[0];
  ISK_CHECK(Wv.shape()[1] == I, op << ": weight " << Wv.shape_str()
                                   << " does not accept input " << xv.shape_str());
  const bool has_bias = b.valid();
  if (has_bias) {
    const Tensor& bv = t.val(b);
    ISK_CHECK(bv.rank() == 1 && bv.size() == O,
              op << ": bias " << bv.shape_str() << " does not match " << O
                 << " outputs");
  }
  Tensor y({B, O});
  {
    const real* xp = xv.data();
    const real* Wp = Wv.data();
    const real* bp = has_bias ? t.val(b).data() : nullptr;
    real* yp = y.data();
    parallel_for(B, [&](int r0, int r1) {
      for (int r = r0; r < r1; ++r)
        for (int o = 0; o < O; ++o)
          yp[static_cast<size_t>(r) * O + o] =
              (bp ? bp[o] : real(0)) +
              dot(xp + static_cast<size_t>(r) * I, Wp + static_cast<size_t>(o) * I, I);
    });
  }
  std::vector<Var> parents = has_bias ? std::vector<Var>{x, W, b}
                                      : std::vector<Var>{x, W};
  return t.make(
      std::move(y), std::move(parents),
      [x, W, b, B, I, O, has_bias](Tape& t, int self) {
        const Tensor& g = grad_of(t, self);
        const Tensor& xv = t.val(x);
        const Tensor& Wv = t.val(W);
        if (Tensor* dx = t.grad_sink(x)) {
          real* dxp = dx->data();
          const real* gp = g.data();
          const real* Wp = Wv.data();
          parallel_for(B, [&](int r0, int r1) {
            for (int r = r0; r < r1; ++r)
              for (int o = 0; o < O; ++o)
                axpy(dxp + static_cast<size_t>(r) * I,
                     Wp + static_cast<size_t>(o) * I,
                     gp[static_cast<size_t>(r) * O + o], I);
          });
        }
        if (Tensor* dW = t.grad_sink(W)) {
          real* dWp = dW->data();
          const real* gp = g.data();
          const real* xp = xv.data();
          parallel_for(O, [&](int o0, int o1) {
            for (int o = o0; o < o1; ++o)
              for (int r = 0; r < B; ++r)
                axpy(dWp + static_cast<size_t>(o) * I,
                     xp + static_cast<size_t>(r) * I,
                     gp[static_cast<size_t>(r) * O + o], I);
          });
        }
        if (has_bias)
          if (Tensor* db = t.grad_sink(b))
            for (int r = 0; r < B; ++r)
              for (int o = 0; o < O; ++o) (*db)[o] += g.at(r, o);
      },
      op);
}

}  // namespace

Var dense(Tape& t, Var x, Var W, Var b) { return dense_impl(t, x, W, b, "dense"); }

Var linear(Tape& t, Var x, Var W) { return dense_impl(t, x, W, Var{}, "linear"); }

Var layer_norm(Tape& t, Var x, Var gain, Var bias, real eps) {
  const Tensor& xv = t.val(x);
  const Tensor& gv = t.val(gain);
  const Tensor& bv = t.val(bias);
  ISK_CHECK(xv.rank() >= 2, "layer_norm: need a batch dimension, got " << xv.shape_str());
  const int B = xv.rows(), F = xv.row_size();
  ISK_CHECK(gv.size() == F && bv.size() == F,
            "layer_norm: gain " << gv.shape_str() << " / bias " << bv.shape_str()
                                << " do not match " << F << " features");
  ISK_CHECK(eps > 0, "layer_norm: eps must be positive, got " << eps);
  Tensor y(xv.shape());
  {
    const real* xp = xv.data();
    const real* gp = gv.data();
    const real* bp = bv.data();
    real* yp = y.data();
    parallel_for(B, [&](int r0, int r1) {
      for (int r = r0; r < r1; ++r) {
        const real* row = xp + static_cast<size_t>(r) * F;
        real* out = yp + static_cast<size_t>(r) * F;
        real mu = 0;
        for (int j = 0; j < F; ++j) mu += row[j];
        mu /= F;
        real var = 0;
        for (int j = 0; j < F; ++j) var += (row[j] - mu) * (row[j] - mu);
        var /= F;
        const real inv = real(1) / std::sqrt(var + eps);
        for (int j = 0; j < F; ++j) out[j] = gp[j] * (row[j] - mu) * inv + bp[j];
      }
    });
  }
  return t.make(
      std::move(y), {x, gain, bias},
      [x, gain, bias, B, F, eps](Tape& t, int self) {
        const Tensor& g = grad_of(t, self);
        const Tensor& xv = t.val(x);
        const Tensor& gv = t.val(gain);
        Tensor* dx = t.grad_sink(x);
        Tensor* dgain = t.grad_sink(gain);
        Tensor* dbias = t.grad_sink(bias);
        // Row-sequential so that dgain/dbias accumulate in a fixed order.
        for (int r = 0; r < B; ++r) {
          const real* row = xv.data() + static_cast<size_t>(r) * F;
          const real* grow = g.data() + static_cast<size_t>(r) * F;
          real mu = 0;
          for (int j = 0; j < F; ++j) mu += row[j];
          mu /= F;
          real var = 0;
          for (int j = 0; j < F; ++j) var += (row[j] - mu) * (row[j] - mu);
          var /= F;
          const real inv = real(1) / std::sqrt(var + eps);
          if (dgain)
            for (int j = 0; j < F; ++j)
              (*dgain)[j] += grow[j] * (row[j] - mu) * inv;
          if (dbias)
            for (int j = 0; j < F; ++j) (*dbias)[j] += grow[j];
          if (dx) {
            real m1 = 0, m2 = 0;
            for (int j = 0; j < F; ++j) {
              const real dxh = grow[j] * gv[j];
              m1 += dxh;
              m2 += dxh * (row[j] - mu) * inv;
            }
            m1 /= F;
            m2 /= F;
            real* drow = dx->data() + static_cast<size_t>(r) * F;
            for (int j = 0; j < F; ++j) {
              const real xh = (row[j] - mu) * inv;
              drow[j] += inv * (grow[j] * gv[j] - m1 - xh * m2);
            }
          }
        }
      },
      "layer_norm");
}

// -------------------------------------------------------------- distributions

namespace {

Var softmax_impl(Tape& t, Var logits, const Tensor* allowed, const char* op) {
  const Tensor& lv = t.val(logits);
  check_rank(lv, 2, op);
  if (allowed) check_same_shape(lv, *allowed, op);
  const int B = lv.shape()[0], Q = lv.shape()[1];
  Tensor p({B, Q});
  for (int r = 0; r < B; ++r) {
    real m = 0;
    bool any = false;
    for (int j = 0; j < Q; ++j) {
      if (allowed && (*allowed).at(r, j) == 0) continue;
      if (!any || lv.at(r, j) > m) m = lv.at(r, j);
      any = true;
    }
    ISK_CHECK(any, op << ": row " << r << " has no allowed entries");
    real z = 0;
    for (int j = 0; j < Q; ++j) {
      if (allowed && (*allowed).at(r, j) == 0) continue;
      const real e = std::exp(lv.at(r, j) - m);
      p.at(r, j) = e;
      z += e;
    }
    for (int j = 0; j < Q; ++j) p.at(r, j) /= z;
  }
  return t.make(
      std::move(p), {logits},
      [logits, B, Q](Tape& t, int self) {
        const Tensor& g = grad_of(t, self);
        const Tensor& pv = t.val(Var{self});
        if (Tensor* dl = t.grad_sink(logits))
          for (int r = 0; r < B; ++r) {
            const real s = dot(g.data() + static_cast<size_t>(r) * Q,
                               pv.data() + static_cast<size_t>(r) * Q, Q);
            for (int j = 0; j < Q; ++j)
              dl->at(r, j) += pv.at(r, j) * (g.at(r, j) - s);
          }
      },
      op);
}

}  // namespace

Var softmax(Tape& t, Var logits) { return softmax_impl(t, logits, nullptr, "softmax"); }

Var softmax_masked(Tape& t, Var logits, const Tensor& allowed) {
  return softmax_impl(t, logits, &allowed, "softmax_masked");
}

Var entropy_rows(Tape& t, Var p) {
  const Tensor& pv = t.val(p);
  check_rank(pv, 2, "entropy_rows");
  const int B = pv.shape()[0], Q = pv.shape()[1];
  Tensor y({B});
  for (int r = 0; r < B; ++r) {
    real h = 0;
    for (int j = 0; j < Q; ++j) {
      const real v = pv.at(r, j);
      if (v > 0) h -= v * std::log(v);
    }
    y[r] = h;
  }
  return t.make(
      std::move(y), {p},
      [p, B, Q](Tape& t, int self) {
        const Tensor& g = grad_of(t, self);
        const Tensor& pv = t.val(p);
        if (Tensor* dp = t.grad_sink(p))
          for (int r = 0; r < B; ++r)
            for (int j = 0; j < Q; ++j) {
              const real v = pv.at(r, j);
              if (v > 0) dp->at(r, j) -= g[r] * (std::log(v) + real(1));
            }
      },
      "entropy_rows");
}

Var bernoulli_ll_rows(Tape& t, Var f, const Tensor& x, real floor_v) {
  const Tensor& fv = t.val(f);
  ISK_CHECK(fv.rank() >= 2, "bernoulli_ll_rows: need a batch dimension, got "
                                << fv.shape_str());
  ISK_CHECK(fv.size() == x.size() && fv.rows() == x.rows(),
            "bernoulli_ll_rows: prediction " << fv.shape_str()
                                             << " vs target " << x.shape_str());
  ISK_CHECK(floor_v > 0 && floor_v < real(0.5),
            "bernoulli_ll_rows: floor must be in (0, 0.5), got " << floor_v);
  const int B = fv.rows(), F = fv.row_size();
  Tensor y({B});
  for (int r = 0; r < B; ++r) {
    const real* fp = fv.data() + static_cast<size_t>(r) * F;
    const real* xp = x.data() + static_cast<size_t>(r) * F;
    real ll = 0;
    for (int j = 0; j < F; ++j) {
      const real p1 = fp[j] > floor_v ? fp[j] : floor_v;
      const real p0 = (real(1) - fp[j]) > floor_v ? (real(1) - fp[j]) : floor_v;
      ll += xp[j] * std::log(p1) + (real(1) - xp[j]) * std::log(p0);
    }
    y[r] = ll;
  }
  return t.make(
      std::move(y), {f},
      [f, x, floor_v, B, F](Tape& t, int self) {
        const Tensor& g = grad_of(t, self);
        const Tensor& fv = t.val(f);
        if (Tensor* df = t.grad_sink(f))
          for (int r = 0; r < B; ++r) {
            const real* fp = fv.data() + static_cast<size_t>(r) * F;
            const real* xp = x.data() + static_cast<size_t>(r) * F;
            real* dp = df->data() + static_cast<size_t>(r) * F;
            for (int j = 0; j < F; ++j) {
              real d = 0;
              if (fp[j] > floor_v) d += xp[j] / fp[j];
              if (real(1) - fp[j] > floor_v) d -= (real(1) - xp[j]) / (real(1) - fp[j]);
              dp[j] += g[r] * d;
            }
          }
      },
      "bernoulli_ll_rows");
}

Var gaussian_ll_rows(Tape& t, Var f, const Tensor& x) {
  const Tensor& fv = t.val(f);
  ISK_CHECK(fv.rank() >= 2, "gaussian_ll_rows: need a batch dimension, got "
                                << fv.shape_str());
  ISK_CHECK(fv.size() == x.size() && fv.rows() == x.rows(),
            "gaussian_ll_rows: prediction " << fv.shape_str()
                                            << " vs target " << x.shape_str());
  const int B = fv.rows(), F = fv.row_size();
  Tensor y({B});
  for (int r = 0; r < B; ++r) {
    const real* fp = fv.data() + static_cast<size_t>(r) * F;
    const real* xp = x.data() + static_cast<size_t>(r) * F;
    real s = 0;
    for (int j = 0; j < F; ++j) s += (xp[j] - fp[j]) * (xp[j] - fp[j]);
    y[r] = real(-0.5) * s;
  }
  return t.make(
      std::move(y), {f},
      [f, x, B, F](Tape& t, int self) {
        const Tensor& g = grad_of(t, self);
        const Tensor& fv = t.val(f);
        if (Tensor* df = t.grad_sink(f))
          for (int r = 0; r < B; ++r) {
            const real* fp = fv.data() + static_cast<size_t>(r) * F;
            const real* xp = x.data() + static_cast<size_t>(r) * F;
            real* dp = df->data() + static_cast<size_t>(r) * F;
            for (int j = 0; j < F; ++j) dp[j] += g[r] * (xp[j] - fp[j]);
          }
      },
      "gaussian_ll_rows");
}

// ---------------------------------------------------------------- convolution

namespace {

void check_conv_args(const Tensor& xv, const Tensor& Kv, const Tensor& bv,
                     int ci_axis, const char* op) {
  check_rank(xv, 4, op);
  check_rank(Kv, 4, op);
  ISK_CHECK(Kv.shape()[2] == Kv.shape()[3] && Kv.shape()[2] % 2 == 1,
            op << ": kernel must be square with odd extent, got " << Kv.shape_str());
  ISK_CHECK(Kv.shape()[ci_axis] == xv.shape()[1],
            op << ": kernel " << Kv.shape_str() << " does not accept input "
               << xv.shape_str());
  const int co = Kv.shape()[1 - ci_axis];
  ISK_CHECK(bv.rank() == 1 && bv.size() == co,
            op << ": bias " << bv.shape_str() << " does not match " << co
               << " output channels");
}

}  // namespace

Var conv2d_same(Tape& t, Var x, Var K, Var b) {
  const Tensor& xv = t.val(x);
  const Tensor& Kv = t.val(K);
  const Tensor& bv = t.val(b);
  check_conv_args(xv, Kv, bv, 1, "conv2d_same");
  const int B = xv.shape()[0], Ci = xv.shape()[1], H = xv.shape()[2], W = xv.shape()[3];
  const int Co = Kv.shape()[0], k = Kv.shape()[2], p = (k - 1) / 2;
  Tensor y({B, Co, H, W});
  {
    const real* xp = xv.data();
    const real* Kp = Kv.data();
    const real* bp = bv.data();
    real* yp = y.data();
    parallel_for(B, [&](int b0, int b1) {
      for (int bo = b0; bo < b1; ++bo)
        for (int co = 0; co < Co; ++co)
          for (int i = 0; i < H; ++i)
            for (int j = 0; j < W; ++j) {
              real acc = bp[co];
              for (int ci = 0; ci < Ci; ++ci)
                for (int u = 0; u < k; ++u) {
                  const int q = i + u - p;
                  if (q < 0 || q >= H) continue;
                  const real* xrow =
                      xp + ((static_cast<size_t>(bo) * Ci + ci) * H + q) * W;
                  const real* krow =
                      Kp + ((static_cast<size_t>(co) * Ci + ci) * k + u) * k;
                  for (int v = 0; v < k; ++v) {
                    const int r = j + v - p;
                    if (r >= 0 && r < W) acc += krow[v] * xrow[r];
                  }
                }
              yp[((static_cast<size_t>(bo) * Co + co) * H + i) * W + j] = acc;
            }
    });
  }
  return t.make(
      std::move(y), {x, K, b},
      [x, K, b, B, Ci, H, W, Co, k, p](Tape& t, int self) {
        const Tensor& g = grad_of(t, self);
        const Tensor& xv = t.val(x);
        const Tensor& Kv = t.val(K);
        const real* gp = g.data();
        if (Tensor* dx = t.grad_sink(x)) {
          real* dxp = dx->data();
          const real* Kp = Kv.data();
          parallel_for(B, [&](int b0, int b1) {
            for (int bo = b0; bo < b1; ++bo)
              for (int co = 0; co < Co; ++co)
                for (int i = 0; i < H; ++i)
                  for (int j = 0; j < W; ++j) {
                    const real gv =
                        gp[((static_cast<size_t>(bo) * Co + co) * H + i) * W + j];
                    for (int ci = 0; ci < Ci; ++ci)
                      for (int u = 0; u < k; ++u) {
                        const int q = i + u - p;
                        if (q < 0 || q >= H) continue;
                        real* drow =
                            dxp + ((static_cast<size_t>(bo) * Ci + ci) * H + q) * W;
                        const real* krow =
                            Kp + ((static_cast<size_t>(co) * Ci + ci) * k + u) * k;
                        for (int v = 0; v < k; ++v) {
                          const int r = j + v - p;
                          if (r >= 0 && r < W) drow[r] += krow[v] * gv;
                        }
                      }
                  }
          });
        }
        if (Tensor* dK = t.grad_sink(K)) {
          real* dKp = dK->data();
          const real* xp = xv.data();
          parallel_for(Co, [&](int c0, int c1) {
            for (int co = c0; co < c1; ++co)
              for (int bo = 0; bo < B; ++bo)
                for (int i = 0; i < H; ++i)
                  for (int j = 0; j < W; ++j) {
                    const real gv =
                        gp[((static_cast<size_t>(bo) * Co + co) * H + i) * W + j];
                    for (int ci = 0; ci < Ci; ++ci)
                      for (int u = 0; u < k; ++u) {
                        const int q = i + u - p;
                        if (q < 0 || q >= H) continue;
                        const real* xrow =
                            xp + ((static_cast<size_t>(bo) * Ci + ci) * H + q) * W;
                        real* krow =
                            dKp + ((static_cast<size_t>(co) * Ci + ci) * k + u) * k;
                        for (int v = 0; v < k; ++v) {
                          const int r = j + v - p;
                          if (r >= 0 && r < W) krow[v] += xrow[r] * gv;
                        }
                      }
                  }
          });
        }
        if (Tensor* db = t.grad_sink(b))
          for (int bo = 0; bo < B; ++bo)
            for (int co = 0; co < Co; ++co) {
              real s = 0;
              const real* grow =
                  gp + ((static_cast<size_t>(bo) * Co + co)) * static_cast<size_t>(H) * W;
              for (int i = 0; i < H * W; ++i) s += grow[i];
              (*db)[co] += s;
            }
      },
      "conv2d_same");
}

Var conv2d_down(Tape& t, Var x, Var K, Var b) {
  const Tensor& xv = t.val(x);
  const Tensor& Kv = t.val(K);
  const Tensor& bv = t.val(b);
  check_conv_args(xv, Kv, bv, 1, "conv2d_down");
  const int B = xv.shape()[0], Ci = xv.shape()[1], H = xv.shape()[2], W = xv.shape()[3];
  const int Co = Kv.shape()[0], k = Kv.shape()[2], p = (k - 1) / 2;
  ISK_CHECK(H % 2 == 0 && W % 2 == 0,
            "conv2d_down: spatial extents must be even, got " << xv.shape_str());
  const int h = H / 2, w = W / 2;
  Tensor y({B, Co, h, w});
  {
    const real* xp = xv.data();
    const real* Kp = Kv.data();
    const real* bp = bv.data();
    real* yp = y.data();
    parallel_for(B, [&](int b0, int b1) {
      for (int bo = b0; bo < b1; ++bo)
        for (int co = 0; co < Co; ++co)
          for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) {
              real acc = bp[co];
              for (int ci = 0; ci < Ci; ++ci)
                for (int u = 0; u < k; ++u) {
                  const int q = 2 * i + u - p;
                  if (q < 0 || q >= H) continue;
                  const real* xrow =
                      xp + ((static_cast<size_t>(bo) * Ci + ci) * H + q) * W;
                  const real* krow =
                      Kp + ((static_cast<size_t>(co) * Ci + ci) * k + u) * k;
                  for (int v = 0; v < k; ++v) {
                    const int r = 2 * j + v - p;
                    if (r >= 0 && r < W) acc += krow[v] * xrow[r];
                  }
                }
              yp[((static_cast<size_t>(bo) * Co + co) * h + i) * w + j] = acc;
            }
    });
  }
  return t.make(
      std::move(y), {x, K, b},
      [x, K, b, B, Ci, H, W, Co, k, p, h, w](Tape& t, int self) {
        const Tensor& g = grad_of(t, self);
        const Tensor& xv = t.val(x);
        const Tensor& Kv = t.val(K);
        const real* gp = g.data();
        if (Tensor* dx = t.grad_sink(x)) {
          real* dxp = dx->data();
          const real* Kp = Kv.data();
          parallel_for(B, [&](int b0, int b1) {
            for (int bo = b0; bo < b1; ++bo)
              for (int co = 0; co < Co; ++co)
                for (int i = 0; i < h; ++i)
                  for (int j = 0; j < w; ++j) {
                    const real gv =
                        gp[((static_cast<size_t>(bo) * Co + co) * h + i) * w + j];
                    for (int ci = 0; ci < Ci; ++ci)
                      for (int u = 0; u < k; ++u) {
                        const int q = 2 * i + u - p;
                        if (q < 0 || q >= H) continue;
                        real* drow =
                            dxp + ((static_cast<size_t>(bo) * Ci + ci) * H + q) * W;
                        const real* krow =
                            Kp + ((static_cast<size_t>(co) * Ci + ci) * k + u) * k;
                        for (int v = 0; v < k; ++v) {
                          const int r = 2 * j + v - p;
                          if (r >= 0 && r < W) drow[r] += krow[v] * gv;
                        }
                      }
                  }
          });
        }
        if (Tensor* dK = t.grad_sink(K)) {
          real* dKp = dK->data();
          const real* xp = xv.data();
          parallel_for(Co, [&](int c0, int c1) {
            for (int co = c0; co < c1; ++co)
              for (int bo = 0; bo < B; ++bo)
                for (int i = 0; i < h; ++i)
                  for (int j = 0; j < w; ++j) {
                    const real gv =
                        gp[((static_cast<size_t>(bo) * Co + co) * h + i) * w + j];
                    for (int ci = 0; ci < Ci; ++ci)
                      for (int u = 0; u < k; ++u) {
                        const int q = 2 * i + u - p;
                        if (q < 0 || q >= H) continue;
                        const real* xrow =
                            xp + ((static_cast<size_t>(bo) * Ci + ci) * H + q) * W;
                        real* krow =
                            dKp + ((static_cast<size_t>(co) * Ci + ci) * k + u) * k;
                        for (int v = 0; v < k; ++v) {
                          const int r = 2 * j + v - p;
                          if (r >= 0 && r < W) krow[v] += xrow[r] * gv;
                        }
                      }
                  }
          });
        }
        if (Tensor* db = t.grad_sink(b))
          for (int bo = 0; bo < B; ++bo)
            for (int co = 0; co < Co; ++co) {
              real s = 0;
              const real* grow =
                  gp + (static_cast<size_t>(bo) * Co + co) * h * w;
              for (int i = 0; i < h * w; ++i) s += grow[i];
              (*db)[co] += s;
            }
      },
      "conv2d_down");
}

Var conv2d_up(Tape& t, Var x, Var K, Var b) {
  const Tensor& xv = t.val(x);
  const Tensor& Kv = t.val(K);
  const Tensor& bv = t.val(b);
  check_conv_args(xv, Kv, bv, 0, "conv2d_up");
  const int B = xv.shape()[0], Ci = xv.shape()[1], h = xv.shape()[2], w = xv.shape()[3];
  const int Co = Kv.shape()[1], k = Kv.shape()[2], p = (k - 1) / 2;
  const int H = 2 * h, W = 2 * w;
  Tensor y({B, Co, H, W});
  {
    const real* xp = xv.data();
    const real* Kp = Kv.data();
    const real* bp = bv.data();
    real* yp = y.data();
    parallel_for(B, [&](int b0, int b1) {
      for (int bo = b0; bo < b1; ++bo)
        for (int co = 0; co < Co; ++co)
          for (int a = 0; a < H; ++a)
            for (int e = 0; e < W; ++e) {
              real acc = bp[co];
              for (int ci = 0; ci < Ci; ++ci)
                for (int u = 0; u < k; ++u) {
                  const int ai = a + p - u;
                  if (ai < 0 || ai % 2 != 0) continue;
                  const int i = ai / 2;
                  if (i >= h) continue;
                  const real* xrow =
                      xp + ((static_cast<size_t>(bo) * Ci + ci) * h + i) * w;
                  const real* krow =
                      Kp + ((static_cast<size_t>(ci) * Co + co) * k + u) * k;
                  for (int v = 0; v < k; ++v) {
                    const int ej = e + p - v;
                    if (ej < 0 || ej % 2 != 0) continue;
                    const int j = ej / 2;
                    if (j < w) acc += krow[v] * xrow[j];
                  }
                }
              yp[((static_cast<size_t>(bo) * Co + co) * H + a) * W + e] = acc;
            }
    });
  }
  return t.make(
      std::move(y), {x, K, b},
      [x, K, b, B, Ci, h, w, Co, k, p, H, W](Tape& t, int self) {
        const Tensor& g = grad_of(t, self);
        const Tensor& xv = t.val(x);
        const Tensor& Kv = t.val(K);
        const real* gp = g.data();
        if (Tensor* dx = t.grad_sink(x)) {
          real* dxp = dx->data();
          const real* Kp = Kv.data();
          parallel_for(B, [&](int b0, int b1) {
            for (int bo = b0; bo < b1; ++bo)
              for (int ci = 0; ci < Ci; ++ci)
                for (int i = 0; i < h; ++i)
                  for (int j = 0; j < w; ++j) {
                    real acc = 0;
                    for (int co = 0; co < Co; ++co) {
                      const real* grow =
                          gp + (static_cast<size_t>(bo) * Co + co) * H * W;
                      const real* kbase =
                          Kp + (static_cast<size_t>(ci) * Co + co) * k * k;
                      for (int u = 0; u < k; ++u) {
                        const int a = 2 * i + u - p;
                        if (a < 0 || a >= H) continue;
                        for (int v = 0; v < k; ++v) {
                          const int e = 2 * j + v - p;
                          if (e >= 0 && e < W) acc += kbase[u * k + v] * grow[a * W + e];
                        }
                      }
                    }
                    dxp[((static_cast<size_t>(bo) * Ci + ci) * h + i) * w + j] += acc;
                  }
          });
        }
        if (Tensor* dK = t.grad_sink(K)) {
          real* dKp = dK->data();
          const real* xp = xv.data();
          parallel_for(Ci, [&](int c0, int c1) {
            for (int ci = c0; ci < c1; ++ci)
              for (int co = 0; co < Co; ++co)
                for (int bo = 0; bo < B; ++bo) {
                  const real* xbase =
                      xp + (static_cast<size_t>(bo) * Ci + ci) * h * w;
                  const real* gbase =
                      gp + (static_cast<size_t>(bo) * Co + co) * H * W;
                  real* kbase = dKp + (static_cast<size_t>(ci) * Co + co) * k * k;
                  for (int i = 0; i < h; ++i)
                    for (int j = 0; j < w; ++j) {
                      const real xval = xbase[i * w + j];
                      if (xval == 0) continue;
                      for (int u = 0; u < k; ++u) {
                        const int a = 2 * i + u - p;
                        if (a < 0 || a >= H) continue;
                        for (int v = 0; v < k; ++v) {
                          const int e = 2 * j + v - p;
                          if (e >= 0 && e < W) kbase[u * k + v] += xval * gbase[a * W + e];
                        }
                      }
                    }
                }
          });
        }
        if (Tensor* db = t.grad_sink(b))
          for (int bo = 0; bo < B; ++bo)
            for (int co = 0; co < Co; ++co) {
              real s = 0;
              const real* grow = gp + (static_cast<size_t>(bo) * Co + co) * H * W;
              for (int i = 0; i < H * W; ++i) s += grow[i];
              (*db)[co] += s;
            }
      },
      "conv2d_up");
}

// ------------------------------------------------------------------ recurrent

LstmVars lstm_step(Tape& t, Var x, Var h, Var c, Var Wx, Var Wh, Var b) {
  const Tensor& bv = t.val(b);
  ISK_CHECK(bv.rank() == 1 && bv.size() % 4 == 0,
            "lstm_step: bias must stack four gates, got " << bv.shape_str());
  const int Hn = bv.size() / 4;
  const Tensor& hv = t.val(h);
  const Tensor& cv = t.val(c);
  check_rank(hv, 2, "lstm_step");
  check_rank(cv, 2, "lstm_step");
  ISK_CHECK(hv.shape()[1] == Hn && cv.shape()[1] == Hn,
            "lstm_step: state width " << hv.shape_str() << "/" << cv.shape_str()
                                      << " does not match " << Hn << " units");
  Var z = add(t, dense(t, x, Wx, b), linear(t, h, Wh));
  Var zi = slice_cols(t, z, 0, Hn);
  Var zf = slice_cols(t, z, Hn, Hn);
  Var zg = slice_cols(t, z, 2 * Hn, Hn);
  Var zo = slice_cols(t, z, 3 * Hn, Hn);
  Var cn = add(t, mul(t, sigmoid(t, zf), c), mul(t, sigmoid(t, zi), tanh_act(t, zg)));
  Var hn = mul(t, sigmoid(t, zo), tanh_act(t, cn));
  return {hn, cn};
}

}  // namespace isk::num
