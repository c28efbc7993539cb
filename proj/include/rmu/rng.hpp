#pragma once

#include <cstdint>
#include <random>

namespace rmu {

// Seeded generator with explicit output conversions. std::mt19937_64 itself is
// pinned down by the standard; the conversions to doubles and bounded integers
// are spelled out here because the std distributions are implementation
// defined and would break cross-platform reproducibility.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // uniform on [0, 1), 53-bit resolution
  double next_double() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // uniform on {0, ..., bound-1}, exactly (rejection removes the modulo bias)
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t threshold = (~bound + 1) % bound;  // 2^64 mod bound
    for (;;) {
      const std::uint64_t x = gen_();
      if (x >= threshold) return x % bound;
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace rmu
