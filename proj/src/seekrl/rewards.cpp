#include "isk/seekrl/rewards.hpp"

#include <cmath>

#include "isk/num/error.hpp"
#include "isk/num/ops.hpp"
#include "isk/num/tape.hpp"

namespace isk::seekrl {

real extrinsic_label_reward(const Tensor& fy, int row, int y, real eps_prob) {
  ISK_CHECK(row >= 0 && row < fy.rows(),
            "label reward: row " << row << " outside " << fy.shape_str());
  ISK_CHECK(y >= 0 && y < fy.row_size(),
            "label reward: label " << y << " outside " << fy.row_size()
                                   << " classes");
  const real p = fy.at(row, y);
  return std::log(p > eps_prob ? p : eps_prob);
}

real intrinsic_level(const Tensor& fx, const Tensor& x, IntrinsicKind kind,
                     real eps_prob) {
  ISK_CHECK(kind != IntrinsicKind::kNone, "no intrinsic likelihood configured");
  ISK_CHECK(fx.size() == x.size(), "intrinsic_level: prediction " << fx.shape_str()
                                                                  << " vs target "
                                                                  << x.shape_str());
  // One example regardless of stored rank: flatten to a single row.
  Tensor f2 = Tensor::from({1, fx.size()},
                           std::vector<real>(fx.data(), fx.data() + fx.size()));
  Tensor x2 = Tensor::from({1, x.size()},
                           std::vector<real>(x.data(), x.data() + x.size()));
  num::Tape t;
  num::Var f = t.constant(std::move(f2));
  num::Var ll = kind == IntrinsicKind::kBernoulliDiff
                    ? num::bernoulli_ll_rows(t, f, x2, eps_prob)
                    : num::gaussian_ll_rows(t, f, x2);
  return t.val(ll)[0];
}

}  // namespace isk::seekrl
