#pragma once

#include <bit>
#include <cstdint>
#include <cstddef>

namespace treeot {

// Branch-free exp for the log-sum-exp hot loops. Intended domain is the
// max-shifted exponent range x <= 0 (including -inf); small positive x up to
// ~0.5 is also exact-range. Accuracy ~1e-14 relative against std::exp.
// Degree-11 Taylor on the reduced interval |r| <= ln2/2 after splitting
// x = k*ln2 + r with a two-part ln2 so the reduction is exact.
inline double fast_exp(double x) {
  constexpr double inv_ln2 = 1.44269504088896338700e+00;
  constexpr double ln2_hi = 6.93147180369123816490e-01;
  constexpr double ln2_lo = 1.90821492927058770002e-10;
  constexpr double round_magic = 6755399441055744.0;  // 1.5 * 2^52

  const double xs = x < -746.0 ? -746.0 : x;  // keeps -inf out of the arithmetic
  const double t = xs * inv_ln2 + round_magic;
  const double kd = t - round_magic;
  const std::int64_t k = static_cast<std::int64_t>(kd);
  const double r = (xs - kd * ln2_hi) - kd * ln2_lo;

  double p = 1.0 / 39916800.0;              // 1/11!
  p = p * r + 1.0 / 3628800.0;              // 1/10!
  p = p * r + 1.0 / 362880.0;               // 1/9!
  p = p * r + 1.0 / 40320.0;                // 1/8!
  p = p * r + 1.0 / 5040.0;                 // 1/7!
  p = p * r + 1.0 / 720.0;                  // 1/6!
  p = p * r + 1.0 / 120.0;                  // 1/5!
  p = p * r + 1.0 / 24.0;                   // 1/4!
  p = p * r + 1.0 / 6.0;                    // 1/3!
  p = p * r + 0.5;
  p = p * r + 1.0;
  p = p * r + 1.0;

  const std::uint64_t bits = static_cast<std::uint64_t>(k + 1023) << 52;
  const double scaled = p * std::bit_cast<double>(bits);
  return x < -708.0 ? 0.0 : scaled;
}

inline void fast_exp_array(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = fast_exp(x[i]);
}

}  // namespace treeot
