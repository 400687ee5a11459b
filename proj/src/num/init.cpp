#include "isk/num/init.hpp"

#include <cmath>
#include <vector>

#include "isk/num/error.hpp"
#include "isk/num/kernels.hpp"

namespace isk::num {

namespace {

// Modified Gram-Schmidt on the rows of an n x m buffer (n <= m assumed by
// the caller). Draws replacement rows on rank deficiency, which for
// Gaussian draws essentially never happens.
void orthonormal_rows(std::vector<real>& a, int n, int m, Rng& rng) {
  for (int i = 0; i < n; ++i) {
    real* vi = a.data() + static_cast<size_t>(i) * m;
    for (int attempt = 0;; ++attempt) {
      ISK_CHECK(attempt < 16, "orthogonal_init: repeated rank deficiency");
      for (int j = 0; j < i; ++j) {
        const real* qj = a.data() + static_cast<size_t>(j) * m;
        const real c = dot(vi, qj, m);
        axpy(vi, qj, -c, m);
      }
      const real norm = std::sqrt(dot(vi, vi, m));
      if (norm > real(1e-6)) {
        for (int c = 0; c < m; ++c) vi[c] /= norm;
        break;
      }
      for (int c = 0; c < m; ++c) vi[c] = static_cast<real>(rng.normal());
    }
  }
}

}  // namespace

void orthogonal_init(Tensor& w, Rng& rng, real gain) {
  ISK_CHECK(w.rank() >= 1 && w.size() > 0, "orthogonal_init: empty tensor");
  const int rows = w.rank() >= 2 ? w.shape()[0] : 1;
  const int cols = w.size() / rows;
  const int n = rows <= cols ? rows : cols;
  const int m = rows <= cols ? cols : rows;
  std::vector<real> a(static_cast<size_t>(n) * m);
  for (auto& v : a) v = static_cast<real>(rng.normal());
  orthonormal_rows(a, n, m, rng);
  if (rows <= cols) {
    for (int i = 0; i < w.size(); ++i) w[i] = gain * a[static_cast<size_t>(i)];
  } else {
    // Orthonormalized the transpose; write back transposed.
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        w[r * cols + c] = gain * a[static_cast<size_t>(c) * m + r];
  }
}

}  // namespace isk::num
