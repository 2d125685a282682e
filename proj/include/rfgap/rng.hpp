#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace rfgap {

// xoshiro256++ seeded through splitmix64.  Self-contained so that random
// streams are bit-identical across standard libraries and platforms; the
// std:: distributions deliberately are not.  Every tree gets its own stream
// derived from (seed, tree index), which makes results independent of how
// work is scheduled across threads.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t x = seed;
    for (auto& s : s_) s = splitmix64(x);
  }

  // Substream `id` of a base seed.  Mixing the id through splitmix64 keeps
  // neighbouring ids decorrelated.
  static Rng stream(uint64_t seed, uint64_t id) {
    uint64_t x = seed;
    uint64_t a = splitmix64(x);
    uint64_t y = id + 0x9e3779b97f4a7c15ULL;
    return Rng(a ^ splitmix64(y));
  }

  uint64_t next() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Unbiased integer in [0, bound); bound must be > 0.  Lemire's method.
  uint32_t uniform_below(uint32_t bound) {
    uint64_t m = uint64_t(uint32_t(next() >> 32)) * bound;
    auto lo = uint32_t(m);
    if (lo < bound) {
      const uint32_t threshold = uint32_t(-bound) % bound;
      while (lo < threshold) {
        m = uint64_t(uint32_t(next() >> 32)) * bound;
        lo = uint32_t(m);
      }
    }
    return uint32_t(m >> 32);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller (deterministic, cached spare).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      const size_t j = uniform_below(uint32_t(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  static uint64_t splitmix64(uint64_t& x) {
    uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace rfgap
