#include "isk/worlds/pgm.hpp"

#include <cmath>
#include <fstream>

#include "isk/num/error.hpp"

namespace isk::worlds {

using num::real;
using num::Tensor;

std::vector<unsigned char> pgm_bytes(const Tensor& img) {
  ISK_CHECK(img.rank() == 2, "PGM wants a [HxW] image, got " << img.shape_str());
  const int h = img.shape()[0], w = img.shape()[1];
  std::string header = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  out.reserve(out.size() + static_cast<size_t>(h) * w);
  for (int i = 0; i < h * w; ++i) {
    real v = img[i];
    if (v < 0) v = 0;
    if (v > 1) v = 1;
    out.push_back(static_cast<unsigned char>(std::lround(v * 255.0)));
  }
  return out;
}

void save_pgm(const std::string& path, const Tensor& img) {
  std::vector<unsigned char> bytes = pgm_bytes(img);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  ISK_CHECK(f.good(), "cannot write PGM file " << path);
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  ISK_CHECK(f.good(), "short write to PGM file " << path);
}

void save_pgm_channels(const std::string& prefix, const Tensor& img) {
  ISK_CHECK(img.rank() == 3, "per-channel PGM wants [CxHxW], got " << img.shape_str());
  const int c = img.shape()[0], h = img.shape()[1], w = img.shape()[2];
  for (int ch = 0; ch < c; ++ch) {
    Tensor plane({h, w});
    for (int i = 0; i < h * w; ++i) plane[i] = img[ch * h * w + i];
    save_pgm(prefix + "_c" + std::to_string(ch) + ".pgm", plane);
  }
}

}  // namespace isk::worlds
