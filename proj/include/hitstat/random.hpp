#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace hitstat {

using u128 = unsigned __int128;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a, 64 bit. Stable across platforms; used for tags and config hashes.
inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Seed of the stream used by one sample: hash(seed, tag, index).
inline std::uint64_t derive_stream_seed(std::uint64_t seed, std::string_view tag,
                                        std::uint64_t index) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ fnv1a64(tag));
  return splitmix64(h ^ splitmix64(index));
}

// Per-sample random stream. Distribution helpers are written out by hand so
// that draws are bit-identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t seed, std::string_view tag, std::uint64_t index)
      : engine_(derive_stream_seed(seed, tag, index)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0,1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform on [0, bound), bound > 0, by rejection.
  std::uint64_t uniform_below(std::uint64_t bound) {
    std::uint64_t limit = -bound % bound;
    for (;;) {
      std::uint64_t r = engine_();
      if (r >= limit) return r % bound;
    }
  }

  u128 next_u128() {
    u128 hi = engine_();
    return (hi << 64) | engine_();
  }

  // Uniform on [0, bound), bound > 0, by rejection.
  u128 uniform_below(u128 bound) {
    u128 limit = (-bound) % bound;
    for (;;) {
      u128 r = next_u128();
      if (r >= limit) return r % bound;
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace hitstat
