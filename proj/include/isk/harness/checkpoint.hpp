#pragma once

#include <cstdint>
#include <string>

#include "isk/num/adam.hpp"

namespace isk::harness {

// Single-file training snapshot. Little-endian layout:
//   "ISK1" | u32 version | u64 config digest | u64 update counter |
//   u64 rng key | u64 rng counter |
//   u32 param count | per param: u32 name length, name bytes, u32 rank,
//     u32 extents[rank], f64 values |
//   u64 adam step count | per param: f64 first moments, f64 second moments
// A load followed by a save reproduces the file byte for byte, and
// resuming from a snapshot continues training bitwise.
inline constexpr uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
  long long update = 0;
  uint64_t rng_key = 0;
  uint64_t rng_counter = 0;
};

void save_checkpoint(const std::string& path, uint64_t config_digest,
                     const num::ParamStore& store, num::Adam& adam,
                     const CheckpointMeta& meta);

// The store must already hold identically named/shaped parameters (build
// the model from the config first); values and optimizer state are
// overwritten. Magic, version, and digest mismatches raise distinct
// errors; truncation errors name the failing section.
CheckpointMeta load_checkpoint(const std::string& path, uint64_t config_digest,
                               num::ParamStore& store, num::Adam& adam);

}  // namespace isk::harness
