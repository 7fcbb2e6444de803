#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace fubif {

// splitmix64 finalizer; used to derive independent per-tree seeds.
inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master ^ splitmix64(stream));
}

inline constexpr std::uint64_t mix_seed(std::uint64_t master, std::uint64_t a,
                                        std::uint64_t b) {
  return splitmix64(mix_seed(master, a) ^ splitmix64(b + 0x632BE59BD9B4E019ull));
}

// Seeded random stream. The engine is mt19937_64 (sequence pinned by the
// standard) and all variate transforms are implemented here rather than via
// std::*_distribution, whose sequences are implementation-defined. This keeps
// fitted models reproducible bit-for-bit from their recorded seeds.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on [lo, hi); returns lo exactly when lo == hi.
  double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

  // Standard normal via Box-Muller (no cached spare, two uniforms per call).
  double normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Uniform index in {0, ..., n-1}, unbiased via rejection.
  std::size_t uniform_index(std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod n
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= threshold) return static_cast<std::size_t>(r % bound);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fubif
