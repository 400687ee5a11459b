#pragma once

#include "isk/num/rng.hpp"
#include "isk/num/tensor.hpp"

namespace isk::num {

// Fills w with a (semi-)orthogonal matrix scaled by gain. The tensor is
// viewed as [shape[0], rest]; the shorter side becomes an orthonormal set
// of rows/columns. Higher-rank tensors (conv kernels) are flattened the
// same way.
void orthogonal_init(Tensor& w, Rng& rng, real gain);

}  // namespace isk::num
