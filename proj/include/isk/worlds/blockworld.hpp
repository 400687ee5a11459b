#pragma once

#include <array>
#include <string>

#include "isk/worlds/env.hpp"

namespace isk::worlds {

// Enum values double as slots in the statement encoding, so the order is
// part of the on-disk/answer format and must not change.
enum class Shape { kTriangle = 0, kSquare = 1, kCross = 2, kDiamond = 3 };
enum class Color { kGreen = 0, kBlue = 1, kYellow = 2, kRed = 3 };
enum class Relation { kAbove = 0, kBelow = 1, kRightOf = 2, kLeftOf = 3 };

const char* shape_name(Shape s);
const char* color_name(Color c);
const char* relation_name(Relation r);

struct BwObject {
  Shape shape = Shape::kTriangle;
  Color color = Color::kGreen;
  int size = 0;          // bounding-box side length, px
  int row = 0, col = 0;  // top-left corner of the bounding box
  real center_row() const { return row + (size - 1) / real(2); }
  real center_col() const { return col + (size - 1) / real(2); }
};

struct BlockWorldScene {
  int canvas = 64;
  std::array<BwObject, 3> objects;
};

struct Statement {
  Shape s1_shape = Shape::kTriangle;
  Color s1_color = Color::kGreen;
  Shape s2_shape = Shape::kTriangle;
  Color s2_color = Color::kGreen;
  Relation rel = Relation::kAbove;

  bool operator==(const Statement&) const = default;
};

// Rejection-samples three objects with distinct (shape, color) pairs,
// pairwise disjoint bounding boxes, fully inside the canvas.
BlockWorldScene gen_blockworld(Rng& rng, int canvas = 64,
                               std::array<int, 2> sizes = {12, 16});

// Full-saturation RGB raster [3, canvas, canvas], values in {0, 1}.
Tensor render_scene(const BlockWorldScene& scene);

// True iff both described objects exist and the relation holds between
// their bounding-box centers (above = strictly smaller row, right-of =
// strictly larger column). A description absent from the scene is false.
bool eval_statement(const BlockWorldScene& scene, const Statement& st);

// Uniform over true statements whose deciding center coordinates differ by
// at least 2 px, so near-ties never become labels.
Statement sample_true_statement(const BlockWorldScene& scene, Rng& rng);

// Mutates the relation or one shape/color field of a true statement,
// resampling until the result evaluates false.
Statement corrupt_statement(const Statement& st, const BlockWorldScene& scene, Rng& rng);

// 20-slot multi-hot layout [s1 shape | s1 color | s2 shape | s2 color |
// relation], four slots each; exactly 5 ones.
Tensor encode_statement(const Statement& st);

// Scene metadata as a JSON object string (objects, statement, truth bit);
// one line per scene in the generator's sidecar files.
std::string scene_json(const BlockWorldScene& scene, const Statement& st, bool truth);

// Pixel-block questions about a rendered scene; the statement encoding is
// the conditioning input and the label is the statement's truth bit.
class BlockWorldEnv : public Environment {
 public:
  BlockWorldEnv(int canvas, std::array<int, 2> sizes, int block);

  const char* name() const override { return "blockworld"; }
  const QuestionSpace& questions() const override { return questions_; }
  int label_count() const override { return 2; }  // false, true
  std::vector<int> x_shape() const override { return {3, canvas_, canvas_}; }
  Example sample(Rng& rng) const override;
  StepResult observe(const Example& ex, int q) const override;
  const PixelGeometry* pixel_geometry() const override { return &geometry_; }
  int statement_size() const override { return 20; }

 private:
  int canvas_;
  std::array<int, 2> sizes_;
  PixelGeometry geometry_;
  QuestionSpace questions_;
};

}  // namespace isk::worlds
