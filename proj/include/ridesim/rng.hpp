#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ridesim {

// 64-bit combine step (hash-combine plus the splitmix64 finalizer). All seed
// derivation goes through this so experiment cells get documented, stable
// streams that reproduce across platforms and runs.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = master;
  for (std::uint64_t t : tags) s = mix_seed(s, t);
  return s;
}

// Stream tags so no two purposes ever share a random stream.
namespace seed_tag {
inline constexpr std::uint64_t kDemand = 0x00D314D0;
inline constexpr std::uint64_t kSupply = 0x005BB170;
inline constexpr std::uint64_t kDecision = 0x00DEC1DE;
inline constexpr std::uint64_t kCell = 0x0000CE11;
inline constexpr std::uint64_t kCalibration = 0x000CA11B;
}  // namespace seed_tag

// Deterministic uniform generator. mt19937_64 is fully specified by the
// standard, and the conversions below avoid the implementation-defined std
// distributions, so identical seeds give identical streams everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Unbiased uniform integer on [0, n), n > 0 (Lemire rejection).
  std::uint64_t next_below(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t threshold = -n % n;
      while (lo < threshold) {
        m = static_cast<unsigned __int128>(engine_()) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Uniform on [lo, hi).
  double next_range(double lo, double hi) { return lo + (hi - lo) * next_double(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ridesim
