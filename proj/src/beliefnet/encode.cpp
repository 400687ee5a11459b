#include "isk/beliefnet/encode.hpp"

#include "isk/num/error.hpp"

namespace isk::beliefnet {

int encode_fc_width(const worlds::QuestionSpace& qs) {
  return qs.total_arity() + qs.count();
}

namespace {

void write_fc_row(const TrialHistory& h, real* row) {
  const worlds::QuestionSpace& qs = h.questions();
  std::vector<int> offset(static_cast<size_t>(qs.count()), 0);
  int acc = 0;
  for (int q = 0; q < qs.count(); ++q) {
    offset[static_cast<size_t>(q)] = acc;
    acc += qs.arity[static_cast<size_t>(q)];
  }
  for (const auto& [q, answer] : h.pairs()) {
    real* slot = row + offset[static_cast<size_t>(q)];
    for (int i = 0; i < answer.size(); ++i) slot[i] = answer[i];
    row[acc + q] = 1;  // asked-mask tail
  }
}

}  // namespace

Tensor encode_fc(const TrialHistory& h) {
  Tensor out({encode_fc_width(h.questions())});
  write_fc_row(h, out.data());
  return out;
}

Tensor encode_fc_batch(const std::vector<const TrialHistory*>& hs) {
  ISK_CHECK(!hs.empty(), "no histories given");
  const int width = encode_fc_width(hs[0]->questions());
  Tensor out({static_cast<int>(hs.size()), width});
  for (size_t b = 0; b < hs.size(); ++b) {
    ISK_CHECK(encode_fc_width(hs[b]->questions()) == width,
              "histories disagree on the encoded width");
    write_fc_row(*hs[b], out.data() + b * static_cast<size_t>(width));
  }
  return out;
}

namespace {

void write_image_stack(const TrialHistory& h, const worlds::PixelGeometry& g,
                       real* out) {
  // Layout: channels [0, g.channels) hold answered pixels, channel
  // g.channels holds the visibility mask.
  const int hw = g.height * g.width;
  for (const auto& [q, answer] : h.pairs()) {
    const int gw = g.grid_w();
    const int r0 = (q / gw) * g.block, c0 = (q % gw) * g.block;
    ISK_CHECK(answer.size() == g.channels * g.block * g.block,
              "answer for block " << q << " has size " << answer.size()
                                  << ", expected " << g.channels * g.block * g.block);
    int k = 0;
    for (int ch = 0; ch < g.channels; ++ch)
      for (int i = 0; i < g.block; ++i)
        for (int j = 0; j < g.block; ++j)
          out[ch * hw + (r0 + i) * g.width + c0 + j] = answer[k++];
    for (int i = 0; i < g.block; ++i)
      for (int j = 0; j < g.block; ++j)
        out[g.channels * hw + (r0 + i) * g.width + c0 + j] = 1;
  }
}

}  // namespace

Tensor encode_image(const TrialHistory& h, const worlds::PixelGeometry& g) {
  ISK_CHECK(h.questions().count() == g.grid_h() * g.grid_w(),
            "history has " << h.questions().count() << " questions, the "
                           << g.grid_h() << "x" << g.grid_w()
                           << " block grid wants " << g.grid_h() * g.grid_w());
  Tensor out({g.channels + 1, g.height, g.width});
  write_image_stack(h, g, out.data());
  return out;
}

Tensor encode_image_batch(const std::vector<const TrialHistory*>& hs,
                          const worlds::PixelGeometry& g) {
  ISK_CHECK(!hs.empty(), "no histories given");
  const int per = (g.channels + 1) * g.height * g.width;
  Tensor out({static_cast<int>(hs.size()), g.channels + 1, g.height, g.width});
  for (size_t b = 0; b < hs.size(); ++b)
    write_image_stack(*hs[b], g, out.data() + b * static_cast<size_t>(per));
  return out;
}

Tensor tile_statement(const Tensor& statement, int extent) {
  ISK_CHECK(statement.rank() == 1, "statement must be a flat vector, got "
                                       << statement.shape_str());
  ISK_CHECK(extent > 0, "tile extent must be positive");
  Tensor out({statement.size(), extent, extent});
  for (int s = 0; s < statement.size(); ++s)
    for (int i = 0; i < extent * extent; ++i) out[s * extent * extent + i] = statement[s];
  return out;
}

}  // namespace isk::beliefnet
