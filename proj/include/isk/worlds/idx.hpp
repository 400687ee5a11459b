#pragma once

#include <string>
#include <vector>

namespace isk::worlds {

// Unsigned-byte tensor as stored in an IDX file: big-endian magic
// 0x0000080r (r = rank), big-endian 4-byte extents, then raw bytes.
struct ByteTensor {
  std::vector<int> shape;
  std::vector<unsigned char> data;

  long long size() const {
    long long n = 1;
    for (int e : shape) n *= e;
    return n;
  }
};

ByteTensor load_idx(const std::string& path);
void save_idx(const std::string& path, const ByteTensor& t);

// In-memory codec used by both file functions; exposed so golden-byte
// fixtures can be checked without touching the filesystem.
std::vector<unsigned char> idx_bytes(const ByteTensor& t);
ByteTensor parse_idx(const std::vector<unsigned char>& bytes, const std::string& origin);

}  // namespace isk::worlds
