#include "isk/worlds/idx.hpp"

#include <cstdio>
#include <fstream>

#include "isk/num/error.hpp"

namespace isk::worlds {

namespace {

constexpr unsigned char kUnsignedByteCode = 0x08;

uint32_t read_be32(const unsigned char* p) {
  return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) |
         uint32_t(p[3]);
}

void push_be32(std::vector<unsigned char>& out, uint32_t v) {
  out.push_back(static_cast<unsigned char>(v >> 24));
  out.push_back(static_cast<unsigned char>(v >> 16));
  out.push_back(static_cast<unsigned char>(v >> 8));
  out.push_back(static_cast<unsigned char>(v));
}

}  // namespace

ByteTensor parse_idx(const std::vector<unsigned char>& bytes, const std::string& origin) {
  ISK_CHECK(bytes.size() >= 4, origin << ": too short for an IDX header ("
                                       << bytes.size() << " bytes)");
  ISK_CHECK(bytes[0] == 0 && bytes[1] == 0,
            origin << ": bad IDX magic (first two bytes must be zero)");
  ISK_CHECK(bytes[2] == kUnsignedByteCode,
            origin << ": unsupported IDX element type 0x" << std::hex << int(bytes[2])
                   << " (only unsigned byte 0x08 is supported)");
  const int rank = bytes[3];
  ISK_CHECK(rank >= 1 && rank <= 4, origin << ": unsupported IDX rank " << rank);
  const size_t header = 4 + 4 * static_cast<size_t>(rank);
  ISK_CHECK(bytes.size() >= header,
            origin << ": truncated IDX header, expected at least " << header
                   << " bytes, got " << bytes.size());

  ByteTensor t;
  long long total = 1;
  for (int d = 0; d < rank; ++d) {
    uint32_t e = read_be32(bytes.data() + 4 + 4 * d);
    ISK_CHECK(e > 0, origin << ": IDX extent " << d << " is zero");
    t.shape.push_back(static_cast<int>(e));
    total *= e;
  }
  const long long have = static_cast<long long>(bytes.size() - header);
  ISK_CHECK(have == total, origin << ": IDX payload size mismatch, expected " << total
                                  << " bytes, got " << have);
  t.data.assign(bytes.begin() + static_cast<long>(header), bytes.end());
  return t;
}

std::vector<unsigned char> idx_bytes(const ByteTensor& t) {
  ISK_CHECK(!t.shape.empty() && t.shape.size() <= 4,
            "IDX rank must be 1..4, got " << t.shape.size());
  ISK_CHECK(static_cast<long long>(t.data.size()) == t.size(),
            "IDX data size " << t.data.size() << " does not match extents");
  std::vector<unsigned char> out;
  out.reserve(4 + 4 * t.shape.size() + t.data.size());
  out.push_back(0);
  out.push_back(0);
  out.push_back(kUnsignedByteCode);
  out.push_back(static_cast<unsigned char>(t.shape.size()));
  for (int e : t.shape) push_be32(out, static_cast<uint32_t>(e));
  out.insert(out.end(), t.data.begin(), t.data.end());
  return out;
}

ByteTensor load_idx(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  ISK_CHECK(f.good(), "cannot open IDX file " << path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
  return parse_idx(bytes, path);
}

void save_idx(const std::string& path, const ByteTensor& t) {
  std::vector<unsigned char> bytes = idx_bytes(t);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  ISK_CHECK(f.good(), "cannot write IDX file " << path);
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  ISK_CHECK(f.good(), "short write to IDX file " << path);
}

}  // namespace isk::worlds
