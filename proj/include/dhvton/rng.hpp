#pragma once

#include "dhvton/tensor.hpp"

#include <cstdint>

namespace dhvton {

// Stateless 64-bit mixer (splitmix64 finalizer). Pure integer ops, so the
// stream is identical across platforms and independent of call order.
inline uint64_t mix64(uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// Fold ids into a stream identifier.
inline uint64_t stream_id(uint64_t a) { return mix64(a + kGolden); }
inline uint64_t stream_id(uint64_t a, uint64_t b) { return mix64(stream_id(a) ^ (b + kGolden)); }
inline uint64_t stream_id(uint64_t a, uint64_t b, uint64_t c) {
  return mix64(stream_id(a, b) ^ (c + kGolden));
}

// Counter-based generator: output depends only on (seed, stream, counter),
// so independent streams can be drawn in any order without coupling.
struct SeededRng {
  uint64_t seed = 0;
  uint64_t stream = 0;
  uint64_t counter = 0;

  SeededRng() = default;
  SeededRng(uint64_t seed_, uint64_t stream_, uint64_t counter_ = 0)
      : seed(seed_), stream(stream_), counter(counter_) {}

  uint64_t next_u64() {
    uint64_t key = mix64(mix64(seed + kGolden) ^ (stream + 2 * kGolden));
    uint64_t z = mix64(key ^ (kGolden * (counter + 1)));
    ++counter;
    return z;
  }

  // Uniform in [0,1).
  double uniform() { return (double)(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0,1]; keeps log() finite in Box-Muller.
  double uniform_pos() { return (double)((next_u64() >> 11) + 1) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; consumes exactly two counter slots.
  double normal() {
    double u1 = uniform_pos();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  uint64_t randint(uint64_t n) { return next_u64() % n; }

  SeededRng fork(uint64_t sub) const { return SeededRng(seed, stream_id(stream, sub)); }
};

template <typename T>
Tensor<T> gaussian(Shape shape, SeededRng& rng) {
  Tensor<T> t(std::move(shape));
  for (auto& v : t.data) v = (T)rng.normal();
  return t;
}

template <typename T>
Tensor<T> uniform_tensor(Shape shape, SeededRng& rng, double lo, double hi) {
  Tensor<T> t(std::move(shape));
  for (auto& v : t.data) v = (T)rng.uniform(lo, hi);
  return t;
}

}  // namespace dhvton
