#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

namespace treeot {

// Deterministic 64-bit generator (splitmix64). Chosen over std::mt19937_64 +
// std distributions because the output stream must be identical across
// standard-library versions: data files, checkpoints and traces are compared
// bit-for-bit in the reproducibility tests.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]; never zero, safe under log().
  double next_double_open() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
  std::uint64_t next_below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal via Box-Muller (no spare caching: two uniforms per draw,
  // so the consumption pattern is independent of call history).
  double next_normal() {
    const double u1 = next_double_open();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  // Independent stream keyed by (seed, domain, index). Used to give every
  // sample / epoch / component its own counter-derived substream.
  static Rng substream(std::uint64_t seed, std::uint64_t domain, std::uint64_t index) {
    std::uint64_t s = mix(seed + 0x9e3779b97f4a7c15ULL * (domain + 1));
    s = mix(s ^ (index + 0xbf58476d1ce4e5b9ULL));
    return Rng(s);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

// Substream domains used across the toolkit. Centralized so that independent
// consumers can never collide.
namespace rng_domain {
inline constexpr std::uint64_t tree = 1;
inline constexpr std::uint64_t gen_weights = 2;
inline constexpr std::uint64_t gen_sample = 3;
inline constexpr std::uint64_t train_init = 4;
inline constexpr std::uint64_t train_shuffle = 5;
inline constexpr std::uint64_t bench = 6;
}  // namespace rng_domain

}  // namespace treeot
