#pragma once

// Shared helpers for the test suite: random instances, finite differences,
// and small conveniences. Uses the library's Rng so instances are stable
// across runs, but derives values independently where it matters.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "treeot/datagen.hpp"
#include "treeot/prob.hpp"
#include "treeot/rng.hpp"
#include "treeot/tree.hpp"

namespace testsupport {

// Random probability vector with strictly positive entries.
inline treeot::ProbVector random_prob(treeot::Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  double sum = 0.0;
  for (auto& x : v) {
    x = 0.05 + rng.next_double();
    sum += x;
  }
  for (auto& x : v) x /= sum;
  return treeot::ProbVector::unchecked(std::move(v));
}

// Random sparse-ish probability vector: roughly `zero_fraction` of the mass
// coordinates are exactly zero (at least one stays positive).
inline treeot::ProbVector random_sparse_prob(treeot::Rng& rng, std::size_t n,
                                             double zero_fraction) {
  std::vector<double> v(n, 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (rng.next_double() < zero_fraction && i + 1 != n) continue;
    v[i] = 0.05 + rng.next_double();
    sum += v[i];
  }
  if (sum == 0.0) {
    v[0] = 1.0;
    sum = 1.0;
  }
  for (auto& x : v) x /= sum;
  return treeot::ProbVector::unchecked(std::move(v));
}

// Random tree with weights drawn uniformly from [lo, hi].
inline treeot::RootedTree random_weighted_tree(std::uint64_t seed, int n, double lo, double hi) {
  treeot::RootedTree t = treeot::random_tree(n, seed);
  treeot::Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<treeot::TreeEdge> edges;
  for (int v = 0; v < t.node_count(); ++v) {
    if (v == t.root()) continue;
    edges.push_back({t.parent(v), v, lo + (hi - lo) * rng.next_double()});
  }
  return treeot::RootedTree::build(t.node_count(), t.root(), edges);
}

// Central finite difference of a scalar function of a vector.
inline std::vector<double> finite_difference(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
    double h = 1e-6) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double save = x[i];
    x[i] = save + h;
    const double up = f(x);
    x[i] = save - h;
    const double dn = f(x);
    x[i] = save;
    g[i] = (up - dn) / (2.0 * h);
  }
  return g;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

}  // namespace testsupport
