#pragma once

namespace isk::num {

#ifdef ISK_REAL_FLOAT
using real_k = float;
#else
using real_k = double;
#endif

// Dot product with four fixed accumulator lanes combined in a fixed order,
// so the result is reproducible for any compiler vectorization choice.
inline real_k dot(const real_k* a, const real_k* b, int n) {
  real_k acc[4] = {0, 0, 0, 0};
  int k = 0;
  for (; k + 4 <= n; k += 4) {
    acc[0] += a[k] * b[k];
    acc[1] += a[k + 1] * b[k + 1];
    acc[2] += a[k + 2] * b[k + 2];
    acc[3] += a[k + 3] * b[k + 3];
  }
  real_k tail = 0;
  for (; k < n; ++k) tail += a[k] * b[k];
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + tail;
}

inline void axpy(real_k* y, const real_k* x, real_k a, int n) {
  for (int i = 0; i < n; ++i) y[i] += a * x[i];
}

}  // namespace isk::num
