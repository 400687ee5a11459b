#pragma once

#include <functional>
#include <vector>

#include "isk/num/rng.hpp"
#include "isk/num/tape.hpp"
#include "isk/num/tensor.hpp"

namespace isk::num {

// Compares reverse-mode gradients against central finite differences.
//
// `build` must construct the scalar objective on the given tape, reading
// every tensor in `leaves` through the supplied param Vars (in order), and
// must be a pure function of the leaf values. Each sampled coordinate is
// perturbed by +/-h with the objective rebuilt from scratch.
//
// Returns the maximum relative error |a - n| / max(1, |a|, |n|) over all
// sampled coordinates. Requires double precision reals.
real max_rel_grad_err(
    const std::vector<Tensor*>& leaves,
    const std::function<Var(Tape&, const std::vector<Var>&)>& build,
    Rng& rng, int samples_per_leaf, real h);

}  // namespace isk::num
