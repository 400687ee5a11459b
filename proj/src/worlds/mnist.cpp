#include "isk/worlds/mnist.hpp"

#include "isk/num/error.hpp"
#include "isk/worlds/idx.hpp"

namespace isk::worlds {

namespace {

constexpr int kMaxClutterTries = 1000;

bool rects_intersect(int r0, int c0, int h0, int w0, int r1, int c1, int h1, int w1) {
  const bool rows_apart = r0 + h0 <= r1 || r1 + h1 <= r0;
  const bool cols_apart = c0 + w0 <= c1 || c1 + w1 <= c0;
  return !(rows_apart || cols_apart);
}

}  // namespace

Tensor MnistData::image(int i) const {
  ISK_CHECK(i >= 0 && i < count(), "image index " << i << " outside [0, " << count() << ")");
  const int h = images.shape()[1], w = images.shape()[2];
  Tensor out({h, w});
  for (int k = 0; k < h * w; ++k) out[k] = images[i * h * w + k];
  return out;
}

MnistData load_mnist(const std::string& images_path, const std::string& labels_path) {
  const ByteTensor raw_images = load_idx(images_path);
  const ByteTensor raw_labels = load_idx(labels_path);
  ISK_CHECK(raw_images.shape.size() == 3,
            images_path << ": expected a rank-3 image file, got rank "
                        << raw_images.shape.size());
  ISK_CHECK(raw_labels.shape.size() == 1,
            labels_path << ": expected a rank-1 label file, got rank "
                        << raw_labels.shape.size());
  ISK_CHECK(raw_images.shape[0] == raw_labels.shape[0],
            "image count " << raw_images.shape[0] << " does not match label count "
                           << raw_labels.shape[0]);
  MnistData d;
  d.images = Tensor({raw_images.shape[0], raw_images.shape[1], raw_images.shape[2]});
  for (int i = 0; i < d.images.size(); ++i)
    d.images[i] = raw_images.data[static_cast<size_t>(i)] / real(255);
  d.labels.resize(raw_labels.data.size());
  for (size_t i = 0; i < raw_labels.data.size(); ++i) {
    d.labels[i] = raw_labels.data[i];
    ISK_CHECK(d.labels[i] <= 9, labels_path << ": label " << d.labels[i]
                                            << " at index " << i << " is not a digit");
  }
  return d;
}

Tensor summary_channel(const Tensor& canvas, int factor) {
  ISK_CHECK(canvas.rank() == 2, "summary wants a [HxW] canvas, got " << canvas.shape_str());
  const int h = canvas.shape()[0], w = canvas.shape()[1];
  ISK_CHECK(factor > 0 && h % factor == 0 && w % factor == 0,
            "pooling factor " << factor << " does not divide canvas " << canvas.shape_str());
  const int oh = h / factor, ow = w / factor;
  Tensor out({oh, ow});
  const real inv = real(1) / (real(factor) * factor);
  for (int i = 0; i < oh; ++i)
    for (int j = 0; j < ow; ++j) {
      real s = 0;
      for (int a = 0; a < factor; ++a)
        for (int b = 0; b < factor; ++b) s += canvas[(i * factor + a) * w + j * factor + b];
      out[i * ow + j] = s * inv;
    }
  return out;
}

Example gen_cluttered(const Tensor& digit, int label, int canvas, int clutter_count,
                      int patch, const MnistData& donors, Rng& rng) {
  ISK_CHECK(digit.rank() == 2, "digit must be [HxW], got " << digit.shape_str());
  const int dh = digit.shape()[0], dw = digit.shape()[1];
  ISK_CHECK(dh <= canvas && dw <= canvas,
            "digit " << digit.shape_str() << " does not fit a " << canvas << "px canvas");
  ISK_CHECK(clutter_count == 0 || donors.count() > 0,
            "clutter requested but the donor set is empty");
  ISK_CHECK(clutter_count == 0 ||
                (patch > 0 && patch <= donors.images.shape()[1] &&
                 patch <= donors.images.shape()[2] && patch <= canvas),
            "clutter patch size " << patch << " is unusable");

  Example ex;
  ex.y = label;
  ex.x = Tensor({1, canvas, canvas});
  const int dr = rng.uniform_int(canvas - dh + 1);
  const int dc = rng.uniform_int(canvas - dw + 1);
  for (int i = 0; i < dh; ++i)
    for (int j = 0; j < dw; ++j) ex.x[(dr + i) * canvas + dc + j] = digit[i * dw + j];

  for (int k = 0; k < clutter_count; ++k) {
    const int donor = rng.uniform_int(donors.count());
    const int sh = donors.images.shape()[1], sw = donors.images.shape()[2];
    const int sr = rng.uniform_int(sh - patch + 1);
    const int sc = rng.uniform_int(sw - patch + 1);
    int pr = -1, pc = -1;
    bool placed = false;
    for (int attempt = 0; attempt < kMaxClutterTries; ++attempt) {
      pr = rng.uniform_int(canvas - patch + 1);
      pc = rng.uniform_int(canvas - patch + 1);
      if (!rects_intersect(pr, pc, patch, patch, dr, dc, dh, dw)) {
        placed = true;
        break;
      }
    }
    ISK_CHECK(placed, "no clutter position clear of the digit after "
                          << kMaxClutterTries << " attempts (canvas " << canvas
                          << ", digit " << dh << ")");
    for (int i = 0; i < patch; ++i)
      for (int j = 0; j < patch; ++j) {
        real& cell = ex.x[(pr + i) * canvas + pc + j];
        const real v = donors.images[(donor * sh + sr + i) * sw + sc + j];
        if (v > cell) cell = v;
      }
  }
  return ex;
}

MnistEnv::MnistEnv(MnistData data, int canvas, int block, int clutter_count, int patch,
                   int summary_factor)
    : data_(std::move(data)),
      canvas_(canvas),
      clutter_count_(clutter_count),
      patch_(patch),
      summary_factor_(summary_factor) {
  ISK_CHECK(data_.count() > 0, "mnist environment needs a non-empty dataset");
  ISK_CHECK(block > 0 && canvas_ % block == 0,
            "block " << block << " does not tile a " << canvas_ << "px canvas");
  ISK_CHECK(summary_factor_ == 0 || canvas_ % summary_factor_ == 0,
            "summary factor " << summary_factor_ << " does not divide canvas " << canvas_);
  geometry_ = PixelGeometry{1, canvas_, canvas_, block};
  questions_ = QuestionSpace::uniform(geometry_.grid_h() * geometry_.grid_w(),
                                      block * block);
}

std::vector<int> MnistEnv::summary_shape() const {
  if (summary_factor_ == 0) return {};
  return {1, canvas_ / summary_factor_, canvas_ / summary_factor_};
}

Example MnistEnv::sample(Rng& rng) const {
  const int idx = rng.uniform_int(data_.count());
  const Tensor digit = data_.image(idx);
  Example ex;
  if (canvas_ == digit.shape()[0] && canvas_ == digit.shape()[1] && clutter_count_ == 0) {
    ex.y = data_.labels[static_cast<size_t>(idx)];
    ex.x = Tensor({1, canvas_, canvas_});
    for (int k = 0; k < digit.size(); ++k) ex.x[k] = digit[k];
  } else {
    ex = gen_cluttered(digit, data_.labels[static_cast<size_t>(idx)], canvas_,
                       clutter_count_, patch_, data_, rng);
  }
  if (summary_factor_ > 0) {
    Tensor plane({canvas_, canvas_});
    for (int k = 0; k < plane.size(); ++k) plane[k] = ex.x[k];
    const Tensor pooled = summary_channel(plane, summary_factor_);
    ex.summary = Tensor({1, pooled.shape()[0], pooled.shape()[1]});
    for (int k = 0; k < pooled.size(); ++k) ex.summary[k] = pooled[k];
  }
  return ex;
}

StepResult MnistEnv::observe(const Example& ex, int q) const {
  StepResult r;
  r.answer = observe_pixels(ex.x, q, geometry_.block);
  return r;
}

}  // namespace isk::worlds
