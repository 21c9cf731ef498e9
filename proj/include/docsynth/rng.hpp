#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace docsynth {

// Stafford variant 13 of the MurmurHash3 finalizer, as used by splitmix64.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Position in the tree of random streams. Keys are derived, never advanced,
/// so the value drawn for a given (seed, sample, parameter, pixel, ...) path
/// does not depend on the order in which other streams were consumed.
struct StreamKey {
  std::uint64_t value = 0;

  constexpr StreamKey derive(std::uint64_t tag) const {
    return StreamKey{mix64(value ^ mix64(tag + 0x9e3779b97f4a7c15ULL))};
  }
  constexpr StreamKey derive(std::string_view tag) const { return derive(fnv1a64(tag)); }
  constexpr bool operator==(const StreamKey&) const = default;
};

constexpr StreamKey master_key(std::uint64_t seed) { return StreamKey{mix64(seed ^ 0x6a09e667f3bcc909ULL)}; }

/// Counter-based generator: output i is a pure function of (key, i).
class RngStream {
 public:
  explicit constexpr RngStream(StreamKey key) : key_(key.value) {}

  constexpr std::uint64_t next_u64() {
    ++counter_;
    return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform in [0, 1) with 53 random bits.
  constexpr double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; consumes two uniforms per call.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace docsynth
