#include "isk/harness/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "isk/num/error.hpp"

namespace isk::harness {
namespace {

constexpr char kMagic[4] = {'I', 'S', 'K', '1'};

void put_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<uint64_t>(v)); }

void put_values(std::ostream& os, const num::Tensor& t) {
  for (int i = 0; i < t.size(); ++i) put_f64(os, static_cast<double>(t[i]));
}

struct Reader {
  std::ifstream in;
  std::string path;

  void need(void* dst, size_t n, const char* section) {
    in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
    ISK_CHECK(in.gcount() == static_cast<std::streamsize>(n),
              "checkpoint " << path << ": truncated " << section);
  }

  uint32_t u32(const char* section) {
    unsigned char b[4];
    need(b, 4, section);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
    return v;
  }

  uint64_t u64(const char* section) {
    unsigned char b[8];
    need(b, 8, section);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return v;
  }

  double f64(const char* section) { return std::bit_cast<double>(u64(section)); }

  void values(num::Tensor& t, const char* section) {
    for (int i = 0; i < t.size(); ++i) t[i] = static_cast<num::real>(f64(section));
  }
};

}  // namespace

void save_checkpoint(const std::string& path, uint64_t config_digest,
                     const num::ParamStore& store, num::Adam& adam,
                     const CheckpointMeta& meta) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  ISK_CHECK(os.good(), "checkpoint " << path << ": cannot open for writing");

  os.write(kMagic, 4);
  put_u32(os, kCheckpointVersion);
  put_u64(os, config_digest);
  put_u64(os, static_cast<uint64_t>(meta.update));
  put_u64(os, meta.rng_key);
  put_u64(os, meta.rng_counter);

  put_u32(os, static_cast<uint32_t>(store.count()));
  for (const auto& e : store.entries()) {
    put_u32(os, static_cast<uint32_t>(e.name.size()));
    os.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    const num::Tensor& t = *e.value;
    put_u32(os, static_cast<uint32_t>(t.rank()));
    for (int d : t.shape()) put_u32(os, static_cast<uint32_t>(d));
    put_values(os, t);
  }

  put_u64(os, static_cast<uint64_t>(adam.steps_done()));
  for (const num::Tensor& m : adam.moment1()) put_values(os, m);
  for (const num::Tensor& v : adam.moment2()) put_values(os, v);

  os.flush();
  ISK_CHECK(os.good(), "checkpoint " << path << ": write failed");
}

CheckpointMeta load_checkpoint(const std::string& path, uint64_t config_digest,
                               num::ParamStore& store, num::Adam& adam) {
  Reader r;
  r.path = path;
  r.in.open(path, std::ios::binary);
  ISK_CHECK(r.in.good(), "checkpoint " << path << ": cannot open");

  char magic[4];
  r.need(magic, 4, "magic");
  ISK_CHECK(std::memcmp(magic, kMagic, 4) == 0, "checkpoint " << path << ": bad magic");

  uint32_t version = r.u32("version");
  ISK_CHECK(version == kCheckpointVersion,
            "checkpoint " << path << ": unsupported version " << version);

  uint64_t digest = r.u64("config digest");
  ISK_CHECK(digest == config_digest, "checkpoint " << path
                                                   << ": config digest mismatch (file "
                                                   << digest << ", config "
                                                   << config_digest << ")");

  CheckpointMeta meta;
  meta.update = static_cast<long long>(r.u64("update counter"));
  meta.rng_key = r.u64("rng state");
  meta.rng_counter = r.u64("rng state");

  uint32_t count = r.u32("parameter table");
  ISK_CHECK(static_cast<int>(count) == store.count(),
            "checkpoint " << path << ": holds " << count << " parameters, model has "
                          << store.count());
  for (const auto& e : store.entries()) {
    uint32_t len = r.u32("parameter name");
    std::string name(len, '\0');
    if (len > 0) r.need(name.data(), len, "parameter name");
    ISK_CHECK(name == e.name, "checkpoint " << path << ": parameter '" << name
                                            << "' where model expects '" << e.name << "'");
    uint32_t rank = r.u32("parameter shape");
    std::vector<int> shape(rank);
    for (uint32_t d = 0; d < rank; ++d)
      shape[d] = static_cast<int>(r.u32("parameter shape"));
    ISK_CHECK(shape == e.value->shape(),
              "checkpoint " << path << ": parameter '" << name << "' has shape "
                            << num::Tensor::shape_string(shape) << ", model expects "
                            << e.value->shape_str());
    r.values(*e.value, "parameter values");
  }

  adam.restore_steps(static_cast<long long>(r.u64("optimizer state")));
  for (num::Tensor& m : adam.moment1()) r.values(m, "optimizer first moments");
  for (num::Tensor& v : adam.moment2()) r.values(v, "optimizer second moments");

  char extra;
  r.in.read(&extra, 1);
  ISK_CHECK(r.in.gcount() == 0, "checkpoint " << path << ": trailing bytes");
  return meta;
}

}  // namespace isk::harness
