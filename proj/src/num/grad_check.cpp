#include "isk/num/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "isk/num/error.hpp"

namespace isk::num {

namespace {

real objective(const std::vector<Tensor*>& leaves,
               const std::function<Var(Tape&, const std::vector<Var>&)>& build) {
  Tape t;
  std::vector<Var> vars;
  vars.reserve(leaves.size());
  for (const Tensor* p : leaves) vars.push_back(t.param(p));
  Var root = build(t, vars);
  const Tensor& v = t.val(root);
  ISK_CHECK(v.size() == 1, "grad check objective must be scalar, got " << v.shape_str());
  return v[0];
}

}  // namespace

real max_rel_grad_err(
    const std::vector<Tensor*>& leaves,
    const std::function<Var(Tape&, const std::vector<Var>&)>& build,
    Rng& rng, int samples_per_leaf, real h) {
  ISK_CHECK(sizeof(real) == 8,
            "finite-difference gradient checks need double precision reals");
  ISK_CHECK(h > 0, "grad check step must be positive, got " << h);

  std::vector<Tensor> analytic;
  {
    Tape t;
    std::vector<Var> vars;
    for (const Tensor* p : leaves) vars.push_back(t.param(p));
    Var root = build(t, vars);
    t.backward(root);
    for (Var v : vars) analytic.push_back(t.grad(v));
  }

  real worst = 0;
  for (size_t li = 0; li < leaves.size(); ++li) {
    Tensor* leaf = leaves[li];
    const int n = leaf->size();
    std::vector<int> coords;
    if (n <= samples_per_leaf) {
      coords.resize(static_cast<size_t>(n));
      for (int i = 0; i < n; ++i) coords[static_cast<size_t>(i)] = i;
    } else {
      for (int i = 0; i < samples_per_leaf; ++i) coords.push_back(rng.uniform_int(n));
    }
    for (int j : coords) {
      const real keep = (*leaf)[j];
      (*leaf)[j] = keep + h;
      const real fp = objective(leaves, build);
      (*leaf)[j] = keep - h;
      const real fm = objective(leaves, build);
      (*leaf)[j] = keep;
      const real numeric = (fp - fm) / (2 * h);
      const real a = analytic[li][j];
      const real rel = std::abs(a - numeric) /
                       std::max(real(1), std::max(std::abs(a), std::abs(numeric)));
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace isk::num
