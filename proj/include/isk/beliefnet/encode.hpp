#pragma once

#include <vector>

#include "isk/beliefnet/history.hpp"
#include "isk/worlds/env.hpp"

namespace isk::beliefnet {

// Flat history encoding for the fully-connected net: the answer table
// (answers at their per-question slot offsets, zeros where unasked)
// followed by the asked-mask. Width = total arity + question count.
Tensor encode_fc(const TrialHistory& h);
Tensor encode_fc_batch(const std::vector<const TrialHistory*>& hs);  // [B, width]
int encode_fc_width(const worlds::QuestionSpace& qs);

// Channel stack for the convolutional net: the answered pixels painted
// back into an image (unseen pixels zero) plus one visibility-mask
// channel. Conditioning maps join deeper layers, not this stack.
Tensor encode_image(const TrialHistory& h, const worlds::PixelGeometry& g);  // [C+1,H,W]
Tensor encode_image_batch(const std::vector<const TrialHistory*>& hs,
                          const worlds::PixelGeometry& g);  // [B,C+1,H,W]

// Statement vector tiled over an extent x extent map, one channel per slot.
Tensor tile_statement(const Tensor& statement, int extent);  // [20,e,e]

}  // namespace isk::beliefnet
