#include "dhvton/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

namespace dhvton {

namespace {

void put_u16(std::ostream& os, uint16_t v) {
  unsigned char b[2] = {(unsigned char)(v & 0xff), (unsigned char)(v >> 8)};
  os.write((const char*)b, 2);
}
void put_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = (unsigned char)((v >> (8 * i)) & 0xff);
  os.write((const char*)b, 4);
}
uint16_t get_u16(std::istream& is) {
  unsigned char b[2];
  is.read((char*)b, 2);
  return (uint16_t)(b[0] | (b[1] << 8));
}
uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read((char*)b, 4);
  return (uint32_t)b[0] | ((uint32_t)b[1] << 8) | ((uint32_t)b[2] << 16) | ((uint32_t)b[3] << 24);
}

static_assert(sizeof(float) == 4, "f32 payload requires 4-byte float");

void put_f32_le(std::ostream& os, const float* p, size_t n) {
  // Little-endian host assumed for the bulk write; asserted at runtime once.
  os.write((const char*)p, (std::streamsize)(n * 4));
}

bool host_is_le() {
  uint32_t x = 1;
  return *(unsigned char*)&x == 1;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamStore<float>& store) {
  if (!host_is_le()) throw DataError("checkpoint: big-endian hosts unsupported");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("checkpoint: cannot open for write: " + path);
  os.write("DHVT", 4);
  put_u32(os, kCheckpointVersion);
  put_u32(os, (uint32_t)store.all().size());
  for (const auto& [name, p] : store.all()) {
    if (name.size() > 0xffff) throw DataError("checkpoint: name too long: " + name);
    put_u16(os, (uint16_t)name.size());
    os.write(name.data(), (std::streamsize)name.size());
    const Shape& s = p.value().shape;
    os.put((char)(unsigned char)s.size());
    for (int64_t d : s) put_u32(os, (uint32_t)d);
    put_f32_le(os, p.value().data.data(), p.value().data.size());
  }
  if (!os) throw DataError("checkpoint: write failed: " + path);
}

RawCheckpoint read_checkpoint(const std::string& path) {
  if (!host_is_le()) throw DataError("checkpoint: big-endian hosts unsupported");
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("checkpoint: cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "DHVT", 4) != 0)
    throw DataError("checkpoint: bad magic in " + path);
  uint32_t version = get_u32(is);
  if (version != kCheckpointVersion)
    throw DataError("checkpoint: unsupported version " + std::to_string(version));
  uint32_t count = get_u32(is);
  RawCheckpoint out;
  out.entries.reserve(count);
  for (uint32_t e = 0; e < count; ++e) {
    uint16_t len = get_u16(is);
    std::string name(len, '\0');
    is.read(name.data(), len);
    int rank = is.get();
    if (rank < 0) throw DataError("checkpoint: truncated file " + path);
    Shape shape((size_t)rank);
    for (int i = 0; i < rank; ++i) shape[(size_t)i] = (int64_t)get_u32(is);
    Tensor<float> t(shape);
    is.read((char*)t.data.data(), (std::streamsize)(t.data.size() * 4));
    if (!is) throw DataError("checkpoint: truncated payload for " + name);
    out.entries.emplace_back(std::move(name), std::move(t));
  }
  return out;
}

void load_checkpoint(const std::string& path, ParamStore<float>& store, bool strict) {
  RawCheckpoint ck = read_checkpoint(path);
  for (auto& [name, t] : ck.entries) {
    if (!store.has(name)) {
      if (strict) throw DataError("checkpoint: parameter not in store: " + name);
      continue;
    }
    auto& p = store.get(name);
    if (p.value().shape != t.shape)
      throw DataError("checkpoint: shape mismatch for " + name + ": store " +
                      shape_str(p.value().shape) + " vs file " + shape_str(t.shape));
    p.value().data = std::move(t.data);
  }
}

FrozenReport compare_checkpoint(const std::string& path, const ParamStore<float>& store,
                                const std::string& prefix) {
  RawCheckpoint ck = read_checkpoint(path);
  FrozenReport rep;
  for (auto& [name, t] : ck.entries) {
    if (name.rfind(prefix, 0) != 0) continue;
    if (!store.has(name)) {
      rep.mismatched.push_back(name + " (missing from store)");
      continue;
    }
    const auto& p = store.get(name);
    ++rep.compared;
    if (p.value().shape != t.shape ||
        std::memcmp(p.value().data.data(), t.data.data(), t.data.size() * 4) != 0)
      rep.mismatched.push_back(name);
  }
  rep.pass = rep.mismatched.empty() && rep.compared > 0;
  return rep;
}

}  // namespace dhvton
