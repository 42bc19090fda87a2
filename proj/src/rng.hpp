#pragma once

#include <cstdint>
#include <random>

namespace bmf {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Seed for worker/trial `index` derived from a base seed. Stable across
// platforms and scheduling, so parallel trials stay reproducible.
inline std::uint64_t child_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(base + 0x9E3779B97F4A7C15ull * (index + 1));
}

// Thin deterministic wrapper around mt19937_64. Bounded draws use a plain
// modulo rather than std::uniform_int_distribution, whose output sequence is
// implementation-defined; the modulo bias is irrelevant at the ranges used
// here and reproducibility across standard libraries matters more.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // Uniform-ish draw in [0, n); n must be positive.
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }

  // Exact double in [0, 1) built from the top 53 bits.
  double real01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace bmf
