#pragma once

#include <string>
#include <vector>

#include "isk/worlds/env.hpp"

namespace isk::worlds {

struct MnistData {
  Tensor images;           // [N, H, W], pixel byte / 255
  std::vector<int> labels;  // [N], digits 0..9

  int count() const { return images.rank() == 3 ? images.shape()[0] : 0; }
  Tensor image(int i) const;  // [H, W] copy
};

// Reads the paired IDX image/label files and normalizes pixels to [0, 1].
MnistData load_mnist(const std::string& images_path, const std::string& labels_path);

// factor x factor average pooling; extents must divide evenly.
Tensor summary_channel(const Tensor& canvas, int factor = 8);

// Digit placed uniformly at random on a square canvas; clutter patches are
// cut from random positions of random donor digits and composited by
// pixel-wise maximum. Patch placements intersecting the digit's bounding
// box are rejected, so the digit region stays exactly the digit.
Example gen_cluttered(const Tensor& digit, int label, int canvas, int clutter_count,
                      int patch, const MnistData& donors, Rng& rng);

// Masked-digit classification: each question reveals one block of pixels.
// canvas == digit size with clutter_count 0 gives the plain masked task;
// a larger canvas adds clutter and, with summary_factor > 0, a pooled
// global view as conditioning.
class MnistEnv : public Environment {
 public:
  MnistEnv(MnistData data, int canvas, int block, int clutter_count, int patch,
           int summary_factor);

  const char* name() const override { return "mnist"; }
  const QuestionSpace& questions() const override { return questions_; }
  int label_count() const override { return 10; }
  std::vector<int> x_shape() const override { return {1, canvas_, canvas_}; }
  Example sample(Rng& rng) const override;
  StepResult observe(const Example& ex, int q) const override;
  const PixelGeometry* pixel_geometry() const override { return &geometry_; }
  std::vector<int> summary_shape() const override;

  const MnistData& data() const { return data_; }

 private:
  MnistData data_;
  int canvas_, clutter_count_, patch_, summary_factor_;
  PixelGeometry geometry_;
  QuestionSpace questions_;
};

}  // namespace isk::worlds
