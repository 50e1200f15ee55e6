#pragma once

#include "dhvton/params.hpp"

#include <string>
#include <vector>

namespace dhvton {

// Checkpoint file: magic "DHVT", version u32, entry count u32, then per
// entry: name length u16, UTF-8 name, rank u8, dims as u32, payload as
// little-endian f32 (row-major). Round-trips bit-exactly.

constexpr uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const ParamStore<float>& store);

// strict: every checkpoint entry must exist in the store with matching shape
// (extra store entries are left untouched either way).
void load_checkpoint(const std::string& path, ParamStore<float>& store, bool strict = true);

struct RawCheckpoint {
  std::vector<std::pair<std::string, Tensor<float>>> entries;
};
RawCheckpoint read_checkpoint(const std::string& path);

struct FrozenReport {
  bool pass = false;
  int64_t compared = 0;
  std::vector<std::string> mismatched;
};

// Bitwise comparison of every store parameter whose name starts with prefix
// against the checkpointed payload.
FrozenReport compare_checkpoint(const std::string& path, const ParamStore<float>& store,
                                const std::string& prefix);

}  // namespace dhvton
