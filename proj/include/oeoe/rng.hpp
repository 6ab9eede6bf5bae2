// Counter-based seeding: one 64-bit run seed is split into named, indexed
// substreams so results never depend on execution order.
#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace oeoe {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a ^ (b * 0xD6E8FEB86659FD93ULL);
  return splitmix64(s);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

// SplitMix64 generator; satisfies UniformRandomBitGenerator so it plugs into
// <random> distributions.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t key = 0) : state_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() { return splitmix64(state_); }

  // 53-bit uniform in [0, 1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

inline Stream substream(std::uint64_t seed, std::string_view name,
                        std::uint64_t i = 0, std::uint64_t j = 0) {
  return Stream(mix(mix(mix(seed, fnv1a(name)), i), j));
}

}  // namespace oeoe
