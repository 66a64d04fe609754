#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace homog {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

/// Stream seed for (experiment, stage, index). Independent of execution
/// order, so parallel batches reproduce bit-identically.
inline std::uint64_t derive_seed(std::uint64_t seed_base, std::string_view stage,
                                 std::uint64_t index) {
  std::uint64_t s = seed_base ^ fnv1a64(stage);
  std::uint64_t mixed = splitmix64(s);
  std::uint64_t t = mixed + 0x9E3779B97F4A7C15ull * (index + 1);
  return splitmix64(t);
}

/// xoshiro256** (Blackman & Vigna, public domain reference implementation).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }

  /// Exponential with given rate.
  double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

  /// Standard normal (Box-Muller, no state cached: two uniforms per draw).
  double normal() {
    double u1 = uniform_pos();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

}  // namespace homog
