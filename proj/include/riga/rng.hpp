#pragma once

// Small deterministic bit generators shared by the simulator. These are
// named and versioned because campaign files refer to them by name.

#include <cstdint>
#include <limits>
#include <string_view>

namespace riga {

/// SplitMix64 (Steele, Lea, Flood). Identified as "splitmix64-v1" in
/// campaign files.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  static constexpr std::string_view kName = "splitmix64-v1";

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Unbiased draw from [0, bound) by rejection; bound must be > 0.
template <class Gen>
std::uint64_t uniform_below(Gen& gen, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  for (;;) {
    std::uint64_t r = gen();
    if (r < limit) return r % bound;
  }
}

/// Uniform double in [0, 1) from the top 53 bits.
template <class Gen>
double uniform_unit(Gen& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Derives an independent substream seed from a master seed and a label,
/// so that adding a new consumer never shifts another consumer's stream.
inline std::uint64_t substream_seed(std::uint64_t master, std::string_view label) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  SplitMix64 mix(master ^ h);
  mix();
  return mix();
}

}  // namespace riga
