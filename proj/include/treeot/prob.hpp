#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "treeot/error.hpp"

namespace treeot {

// Probability distribution over label ids 0..L-1. The constructor normalizes
// raw nonnegative scores (a multi-hot label vector y becomes y / sum(y)), so
// holding a ProbVector means holding something that sums to one.
class ProbVector {
 public:
  ProbVector() = default;

  explicit ProbVector(std::vector<double> raw) : values_(std::move(raw)) {
    double sum = 0.0;
    for (double v : values_) {
      if (!(v >= 0.0)) fail(Errc::invalid_config, "negative or NaN entry in probability vector");
      sum += v;
    }
    if (!(sum > 0.0) || !std::isfinite(sum))
      fail(Errc::invalid_config, "probability vector must have positive finite mass");
    for (double& v : values_) v /= sum;
  }

  // For data already normalized by construction (softmax outputs, validated
  // file loads); skips the scan and leaves entries bit-identical.
  static ProbVector unchecked(std::vector<double> normalized) {
    ProbVector p;
    p.values_ = std::move(normalized);
    return p;
  }

  static ProbVector uniform(std::size_t n) {
    return unchecked(std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  static ProbVector one_hot(std::size_t n, std::size_t index) {
    require(index < n, Errc::invalid_node, "one_hot index out of range");
    std::vector<double> v(n, 0.0);
    v[index] = 1.0;
    return unchecked(std::move(v));
  }

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& vec() const { return values_; }

 private:
  std::vector<double> values_;
};

inline void require_same_length(const ProbVector& a, const ProbVector& b) {
  if (a.size() != b.size()) [[unlikely]]
    fail(Errc::length_mismatch,
         "vectors have lengths " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
}

}  // namespace treeot
