#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "treeot/error.hpp"
#include "treeot/network_simplex.hpp"
#include "treeot/prob.hpp"
#include "treeot/tree.hpp"

namespace treeot {

// 1-Wasserstein distance between mu and nu under the tree's shortest-path
// metric, via the closed form
//   W(mu, nu) = sum over non-root v of w_v * |mass_mu(subtree v) - mass_nu(subtree v)|.
// One post-order pass, O(L) time. `work` is caller-provided scratch of length
// node_count so the hot path performs no allocation.
inline double tree_wasserstein(const RootedTree& tree, std::span<const double> mu,
                               std::span<const double> nu, std::span<double> work,
                               OpCounter* counter = nullptr) {
  const std::size_t n = static_cast<std::size_t>(tree.node_count());
  require(mu.size() == n && nu.size() == n, Errc::length_mismatch, "distribution length != node count");
  require(work.size() == n, Errc::length_mismatch, "work length != node count");
  for (std::size_t i = 0; i < n; ++i) work[i] = mu[i] - nu[i];
  double total = 0.0;
  const int root = tree.root();
  for (int v : tree.post_order()) {
    if (counter) ++counter->visits;
    if (v == root) continue;
    const double dv = work[static_cast<std::size_t>(v)];
    work[static_cast<std::size_t>(tree.parent(v))] += dv;
    total += tree.edge_weight(v) * std::abs(dv);
  }
  require(std::isfinite(total), Errc::nonfinite_value, "tree Wasserstein value is nonfinite");
  return total;
}

inline double tree_wasserstein(const RootedTree& tree, const ProbVector& mu, const ProbVector& nu) {
  std::vector<double> work(static_cast<std::size_t>(tree.node_count()));
  return tree_wasserstein(tree, mu.values(), nu.values(), work);
}

// Exact optimal transport cost for an arbitrary cost matrix, solved as a
// linear program over the transportation polytope.
inline TransportPlan exact_wasserstein(const Matrix& cost, std::span<const double> supply,
                                       std::span<const double> demand) {
  return NetworkSimplex(cost, supply, demand).solve();
}

inline TransportPlan exact_wasserstein(const Matrix& cost, const ProbVector& mu, const ProbVector& nu) {
  return exact_wasserstein(cost, mu.values(), nu.values());
}

// Exact Wasserstein on the tree metric via the LP route; the quadratic
// baseline the closed form is checked against.
inline TransportPlan exact_wasserstein(const RootedTree& tree, const ProbVector& mu, const ProbVector& nu) {
  require(static_cast<std::size_t>(tree.node_count()) == mu.size(), Errc::length_mismatch,
          "distribution length != node count");
  require_same_length(mu, nu);
  return exact_wasserstein(tree.distance_matrix(), mu.values(), nu.values());
}

// Cost matrix with zero diagonal and unit cost everywhere else; under it the
// optimal transport cost equals half the L1 distance (total variation).
inline Matrix uniform_offdiag_cost(std::size_t n) {
  Matrix c(n, n, 1.0);
  for (std::size_t i = 0; i < n; ++i) c.at(i, i) = 0.0;
  return c;
}

}  // namespace treeot
