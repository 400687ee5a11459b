#include "isk/worlds/env.hpp"

#include "isk/num/error.hpp"

namespace isk::worlds {

int QuestionSpace::arity_of(int q) const {
  ISK_CHECK(q >= 0 && q < count(), "question id " << q << " outside [0, " << count() << ")");
  return arity[static_cast<size_t>(q)];
}

int QuestionSpace::total_arity() const {
  int n = 0;
  for (int a : arity) n += a;
  return n;
}

void QuestionSpace::validate() const {
  ISK_CHECK(count() > 0, "question space is empty");
  ISK_CHECK(count() < 1000, "question space has " << count() << " questions, limit is 999");
  for (int i = 0; i < count(); ++i)
    ISK_CHECK(arity[static_cast<size_t>(i)] > 0,
              "question " << i << " has non-positive arity " << arity[static_cast<size_t>(i)]);
}

QuestionSpace QuestionSpace::uniform(int count, int arity) {
  QuestionSpace qs;
  qs.arity.assign(static_cast<size_t>(count), arity);
  qs.validate();
  return qs;
}

Tensor observe_pixels(const Tensor& img, int q, int block) {
  ISK_CHECK(img.rank() == 2 || img.rank() == 3,
            "observe_pixels wants [HxW] or [CxHxW], got " << img.shape_str());
  const int c = img.rank() == 3 ? img.shape()[0] : 1;
  const int h = img.shape()[img.rank() - 2];
  const int w = img.shape()[img.rank() - 1];
  ISK_CHECK(block > 0 && h % block == 0 && w % block == 0,
            "block " << block << " does not tile image " << img.shape_str());
  const int gh = h / block, gw = w / block;
  ISK_CHECK(q >= 0 && q < gh * gw,
            "block id " << q << " outside [0, " << gh * gw << ")");
  const int r0 = (q / gw) * block, c0 = (q % gw) * block;
  Tensor out({c * block * block});
  int k = 0;
  for (int ch = 0; ch < c; ++ch)
    for (int i = 0; i < block; ++i)
      for (int j = 0; j < block; ++j)
        out[k++] = img[(ch * h + r0 + i) * w + c0 + j];
  return out;
}

}  // namespace isk::worlds
