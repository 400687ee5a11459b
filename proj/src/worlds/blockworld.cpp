#include "isk/worlds/blockworld.hpp"

#include <cmath>
#include <sstream>

#include "isk/num/error.hpp"

namespace isk::worlds {

namespace {

constexpr int kMaxPlacementTries = 1000;
constexpr int kMaxCorruptTries = 1000;
constexpr real kRelationMargin = 2.0;  // min center distance when sampling labels

// Full-saturation RGB per color, indexed by Color.
constexpr real kRgb[4][3] = {
    {0, 1, 0},  // green
    {0, 0, 1},  // blue
    {1, 1, 0},  // yellow
    {1, 0, 0},  // red
};

bool boxes_disjoint(const BwObject& a, const BwObject& b) {
  const bool rows_apart = a.row + a.size <= b.row || b.row + b.size <= a.row;
  const bool cols_apart = a.col + a.size <= b.col || b.col + b.size <= a.col;
  return rows_apart || cols_apart;
}

// Filled-shape membership for local box coordinates i, j in [0, size).
// All comparisons are against exact multiples of 0.5, so rasterization is
// bit-exact across platforms.
bool inside_shape(Shape shape, int i, int j, int s) {
  const real c = (s - 1) / real(2);
  switch (shape) {
    case Shape::kSquare:
      return true;
    case Shape::kTriangle:  // apex at the top, base at the bottom
      return std::abs(j - c) <= (i + 1) / real(2);
    case Shape::kDiamond:
      return std::abs(i - c) + std::abs(j - c) <= c + real(0.5);
    case Shape::kCross: {
      const int t = s / 3 < 2 ? 2 : s / 3;  // bar thickness
      const int lo = (s - t) / 2, hi = lo + t - 1;
      return (i >= lo && i <= hi) || (j >= lo && j <= hi);
    }
  }
  return false;
}

int find_object(const BlockWorldScene& scene, Shape shape, Color color) {
  for (int i = 0; i < 3; ++i)
    if (scene.objects[static_cast<size_t>(i)].shape == shape &&
        scene.objects[static_cast<size_t>(i)].color == color)
      return i;
  return -1;
}

// Signed center difference on the axis the relation compares; the relation
// holds iff the difference is strictly positive.
real relation_gap(const BwObject& a, const BwObject& b, Relation rel) {
  switch (rel) {
    case Relation::kAbove:
      return b.center_row() - a.center_row();
    case Relation::kBelow:
      return a.center_row() - b.center_row();
    case Relation::kRightOf:
      return a.center_col() - b.center_col();
    case Relation::kLeftOf:
      return b.center_col() - a.center_col();
  }
  return 0;
}

Statement describe(const BwObject& a, const BwObject& b, Relation rel) {
  Statement st;
  st.s1_shape = a.shape;
  st.s1_color = a.color;
  st.s2_shape = b.shape;
  st.s2_color = b.color;
  st.rel = rel;
  return st;
}

}  // namespace

const char* shape_name(Shape s) {
  switch (s) {
    case Shape::kTriangle: return "triangle";
    case Shape::kSquare: return "square";
    case Shape::kCross: return "cross";
    case Shape::kDiamond: return "diamond";
  }
  return "?";
}

const char* color_name(Color c) {
  switch (c) {
    case Color::kGreen: return "green";
    case Color::kBlue: return "blue";
    case Color::kYellow: return "yellow";
    case Color::kRed: return "red";
  }
  return "?";
}

const char* relation_name(Relation r) {
  switch (r) {
    case Relation::kAbove: return "above";
    case Relation::kBelow: return "below";
    case Relation::kRightOf: return "right-of";
    case Relation::kLeftOf: return "left-of";
  }
  return "?";
}

BlockWorldScene gen_blockworld(Rng& rng, int canvas, std::array<int, 2> sizes) {
  ISK_CHECK(canvas > 0 && sizes[0] > 0 && sizes[1] > 0 &&
                sizes[0] <= canvas && sizes[1] <= canvas,
            "cannot place objects of sizes " << sizes[0] << "/" << sizes[1]
                                             << " on a " << canvas << "px canvas");
  for (int attempt = 0; attempt < kMaxPlacementTries; ++attempt) {
    BlockWorldScene scene;
    scene.canvas = canvas;
    bool ok = true;
    for (int i = 0; i < 3 && ok; ++i) {
      BwObject& obj = scene.objects[static_cast<size_t>(i)];
      const int identity = rng.uniform_int(16);
      obj.shape = static_cast<Shape>(identity / 4);
      obj.color = static_cast<Color>(identity % 4);
      obj.size = sizes[static_cast<size_t>(rng.uniform_int(2))];
      obj.row = rng.uniform_int(canvas - obj.size + 1);
      obj.col = rng.uniform_int(canvas - obj.size + 1);
      for (int j = 0; j < i && ok; ++j) {
        const BwObject& other = scene.objects[static_cast<size_t>(j)];
        if (other.shape == obj.shape && other.color == obj.color) ok = false;
        if (!boxes_disjoint(other, obj)) ok = false;
      }
    }
    if (ok) return scene;
  }
  throw num::Error("no valid object placement after " +
                   std::to_string(kMaxPlacementTries) + " attempts on a " +
                   std::to_string(canvas) + "px canvas");
}

Tensor render_scene(const BlockWorldScene& scene) {
  const int n = scene.canvas;
  Tensor img({3, n, n});
  for (const BwObject& obj : scene.objects) {
    ISK_CHECK(obj.row >= 0 && obj.col >= 0 && obj.row + obj.size <= n &&
                  obj.col + obj.size <= n,
              "object bounding box leaves the canvas");
    const real* rgb = kRgb[static_cast<int>(obj.color)];
    for (int i = 0; i < obj.size; ++i)
      for (int j = 0; j < obj.size; ++j) {
        if (!inside_shape(obj.shape, i, j, obj.size)) continue;
        const int px = (obj.row + i) * n + (obj.col + j);
        for (int ch = 0; ch < 3; ++ch)
          if (rgb[ch] != 0) img[ch * n * n + px] = rgb[ch];
      }
  }
  return img;
}

bool eval_statement(const BlockWorldScene& scene, const Statement& st) {
  const int a = find_object(scene, st.s1_shape, st.s1_color);
  const int b = find_object(scene, st.s2_shape, st.s2_color);
  if (a < 0 || b < 0) return false;
  return relation_gap(scene.objects[static_cast<size_t>(a)],
                      scene.objects[static_cast<size_t>(b)], st.rel) > 0;
}

Statement sample_true_statement(const BlockWorldScene& scene, Rng& rng) {
  std::vector<Statement> candidates;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      if (a == b) continue;
      for (int r = 0; r < 4; ++r) {
        const Relation rel = static_cast<Relation>(r);
        if (relation_gap(scene.objects[static_cast<size_t>(a)],
                         scene.objects[static_cast<size_t>(b)],
                         rel) >= kRelationMargin)
          candidates.push_back(describe(scene.objects[static_cast<size_t>(a)],
                                        scene.objects[static_cast<size_t>(b)], rel));
      }
    }
  ISK_CHECK(!candidates.empty(), "scene admits no relation with a "
                                     << kRelationMargin << "px margin");
  return candidates[static_cast<size_t>(rng.uniform_int(static_cast<int>(candidates.size())))];
}

Statement corrupt_statement(const Statement& st, const BlockWorldScene& scene, Rng& rng) {
  ISK_CHECK(eval_statement(scene, st), "corrupt_statement wants a true statement");
  for (int attempt = 0; attempt < kMaxCorruptTries; ++attempt) {
    Statement out = st;
    const int site = rng.uniform_int(5);
    const int shift = 1 + rng.uniform_int(3);  // uniform over the other 3 values
    switch (site) {
      case 0:
        out.rel = static_cast<Relation>((static_cast<int>(st.rel) + shift) % 4);
        break;
      case 1:
        out.s1_shape = static_cast<Shape>((static_cast<int>(st.s1_shape) + shift) % 4);
        break;
      case 2:
        out.s1_color = static_cast<Color>((static_cast<int>(st.s1_color) + shift) % 4);
        break;
      case 3:
        out.s2_shape = static_cast<Shape>((static_cast<int>(st.s2_shape) + shift) % 4);
        break;
      case 4:
        out.s2_color = static_cast<Color>((static_cast<int>(st.s2_color) + shift) % 4);
        break;
    }
    if (!eval_statement(scene, out)) return out;
  }
  throw num::Error("no falsifying mutation found after " +
                   std::to_string(kMaxCorruptTries) + " attempts");
}

Tensor encode_statement(const Statement& st) {
  Tensor v({20});
  v[static_cast<int>(st.s1_shape)] = 1;
  v[4 + static_cast<int>(st.s1_color)] = 1;
  v[8 + static_cast<int>(st.s2_shape)] = 1;
  v[12 + static_cast<int>(st.s2_color)] = 1;
  v[16 + static_cast<int>(st.rel)] = 1;
  return v;
}

std::string scene_json(const BlockWorldScene& scene, const Statement& st, bool truth) {
  std::ostringstream o;
  o << "{\"canvas\":" << scene.canvas << ",\"objects\":[";
  for (int i = 0; i < 3; ++i) {
    const BwObject& obj = scene.objects[static_cast<size_t>(i)];
    if (i) o << ",";
    o << "{\"shape\":\"" << shape_name(obj.shape) << "\",\"color\":\""
      << color_name(obj.color) << "\",\"size\":" << obj.size
      << ",\"row\":" << obj.row << ",\"col\":" << obj.col << "}";
  }
  o << "],\"statement\":{\"s1\":[\"" << shape_name(st.s1_shape) << "\",\""
    << color_name(st.s1_color) << "\"],\"relation\":\"" << relation_name(st.rel)
    << "\",\"s2\":[\"" << shape_name(st.s2_shape) << "\",\""
    << color_name(st.s2_color) << "\"]},\"truth\":" << (truth ? "true" : "false")
    << "}";
  return o.str();
}

BlockWorldEnv::BlockWorldEnv(int canvas, std::array<int, 2> sizes, int block)
    : canvas_(canvas), sizes_(sizes) {
  ISK_CHECK(block > 0 && canvas % block == 0,
            "block " << block << " does not tile a " << canvas << "px canvas");
  geometry_ = PixelGeometry{3, canvas, canvas, block};
  questions_ = QuestionSpace::uniform(geometry_.grid_h() * geometry_.grid_w(),
                                      3 * block * block);
}

Example BlockWorldEnv::sample(Rng& rng) const {
  const BlockWorldScene scene = gen_blockworld(rng, canvas_, sizes_);
  Statement st = sample_true_statement(scene, rng);
  Example ex;
  ex.y = rng.uniform_int(2);
  if (ex.y == 0) st = corrupt_statement(st, scene, rng);
  ex.x = render_scene(scene);
  ex.statement = encode_statement(st);
  return ex;
}

StepResult BlockWorldEnv::observe(const Example& ex, int q) const {
  StepResult r;
  r.answer = observe_pixels(ex.x, q, geometry_.block);
  return r;
}

}  // namespace isk::worlds
