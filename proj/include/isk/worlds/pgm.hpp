#pragma once

#include <string>
#include <vector>

#include "isk/num/tensor.hpp"

namespace isk::worlds {

// Binary P5 graymap, maxval 255. Values are clamped to [0,1] and rounded
// to the nearest byte, so emissions are bit-exact across runs.
std::vector<unsigned char> pgm_bytes(const num::Tensor& img);  // [H,W]
void save_pgm(const std::string& path, const num::Tensor& img);

// Multi-channel images are written one graymap per channel:
// <prefix>_c0.pgm, <prefix>_c1.pgm, ...
void save_pgm_channels(const std::string& prefix, const num::Tensor& img);  // [C,H,W]

}  // namespace isk::worlds
