#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "support/helpers.hpp"
#include "support/lp_simplex.hpp"
#include "treeot/transport.hpp"

using namespace treeot;

namespace {

// Cumulative-mass identity specific to path graphs: on a path 0-1-...-n-1,
// W1 equals sum over edges of w_e * |CDF_mu - CDF_nu| at the cut. This is an
// independent closed form used to cross-check both solvers.
double path_wasserstein(const std::vector<double>& weights, std::span<const double> mu,
                        std::span<const double> nu) {
  double total = 0.0, cdf = 0.0;
  for (std::size_t i = 0; i + 1 < mu.size(); ++i) {
    cdf += mu[i] - nu[i];
    total += weights[i] * std::abs(cdf);
  }
  return total;
}

}  // namespace

TEST_CASE("oracle sanity: dense simplex reproduces hand-solvable LPs") {
  // 2x2 transport with cost favoring the diagonal: plan is forced by the
  // marginals up to one degree of freedom; optimum puts maximum mass on the
  // cheap diagonal. a=(0.7,0.3), b=(0.4,0.6), c=[[0,1],[1,0]].
  const auto r = testsupport::transport_lp({0.0, 1.0, 1.0, 0.0}, {0.7, 0.3}, {0.4, 0.6});
  // x00 <= 0.4; cost = (0.7-x00) + (0.4-x00) minimized at x00=0.4 -> 0.3.
  CHECK(r.value == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(r.x[0] == doctest::Approx(0.4).epsilon(1e-9));

  // Uniform off-diagonal cost computes total variation distance.
  const auto tv = testsupport::transport_lp({0.0, 1.0, 1.0, 0.0}, {0.9, 0.1}, {0.2, 0.8});
  CHECK(tv.value == doctest::Approx(0.7).epsilon(1e-10));

  // Identical marginals: zero cost regardless of the cost matrix.
  const auto zero = testsupport::transport_lp({0.0, 5.0, 3.0, 0.0}, {0.5, 0.5}, {0.5, 0.5});
  CHECK(zero.value == doctest::Approx(0.0));

  // Rectangular: 1x3 forces the unique row plan.
  const auto rect = testsupport::transport_lp({2.0, 3.0, 4.0}, {1.0}, {0.2, 0.3, 0.5});
  CHECK(rect.value == doctest::Approx(2.0 * 0.2 + 3.0 * 0.3 + 4.0 * 0.5).epsilon(1e-10));
}

TEST_CASE("network simplex agrees with the independent LP oracle") {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t m = 2 + rng.next_below(7);
    const std::size_t n = 2 + rng.next_below(7);
    Matrix cost(m, n);
    for (double& c : cost.data()) c = 5.0 * rng.next_double();
    std::vector<double> a(m), b(n);
    double sa = 0.0, sb = 0.0;
    for (auto& x : a) sa += (x = 0.01 + rng.next_double());
    for (auto& x : b) sb += (x = 0.01 + rng.next_double());
    for (auto& x : a) x /= sa;
    for (auto& x : b) x /= sb;

    const TransportPlan got = exact_wasserstein(cost, std::span<const double>(a), b);
    std::vector<double> flat(cost.data().begin(), cost.data().end());
    const auto want = testsupport::transport_lp(flat, a, b);
    CHECK(got.cost == doctest::Approx(want.value).epsilon(1e-8));

    // The returned plan is feasible and prices out to the reported cost.
    double recost = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double rowsum = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double p = got.plan.at(i, j);
        CHECK(p >= 0.0);
        rowsum += p;
        recost += p * cost.at(i, j);
      }
      CHECK(rowsum == doctest::Approx(a[i]).epsilon(1e-9));
    }
    for (std::size_t j = 0; j < n; ++j) {
      double colsum = 0.0;
      for (std::size_t i = 0; i < m; ++i) colsum += got.plan.at(i, j);
      CHECK(colsum == doctest::Approx(b[j]).epsilon(1e-9));
    }
    CHECK(recost == doctest::Approx(got.cost).epsilon(1e-10));
  }
}

TEST_CASE("network simplex handles sparse marginals and degenerate ties") {
  Rng rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 3 + rng.next_below(6);
    Matrix cost(n, n);
    // Integer costs force many ties (degeneracy stress).
    for (double& c : cost.data()) c = static_cast<double>(rng.next_below(4));
    const ProbVector a = testsupport::random_sparse_prob(rng, n, 0.5);
    const ProbVector b = testsupport::random_sparse_prob(rng, n, 0.5);

    const TransportPlan got = exact_wasserstein(cost, a, b);
    std::vector<double> flat(cost.data().begin(), cost.data().end());
    const auto want = testsupport::transport_lp(flat, std::vector<double>(a.vec()),
                                                std::vector<double>(b.vec()));
    CHECK(got.cost == doctest::Approx(want.value).epsilon(1e-8));
  }
}

TEST_CASE("network simplex input validation") {
  Matrix cost(2, 2, 1.0);
  std::vector<double> a{0.5, 0.5}, b{0.25, 0.75};
  CHECK_NOTHROW(exact_wasserstein(cost, std::span<const double>(a), b));

  std::vector<double> unbalanced{0.5, 0.6};
  CHECK_THROWS_AS(exact_wasserstein(cost, std::span<const double>(unbalanced), b), TreeotError);

  std::vector<double> negative{1.5, -0.5};
  CHECK_THROWS_AS(exact_wasserstein(cost, std::span<const double>(negative), b), TreeotError);

  Matrix bad_cost(2, 2, 1.0);
  bad_cost.at(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(exact_wasserstein(bad_cost, std::span<const double>(a), b), TreeotError);

  std::vector<double> zero_mass{0.0, 0.0};
  CHECK_THROWS_AS(exact_wasserstein(cost, std::span<const double>(zero_mass), zero_mass),
                  TreeotError);
}

TEST_CASE("closed form equals the LP on the tree metric, dense and sparse") {
  Rng rng(4242);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.next_below(24);
    const RootedTree tree =
        testsupport::random_weighted_tree(1000 + static_cast<std::uint64_t>(trial), n, 0.0, 5.0);
    const ProbVector mu = trial % 2 ? testsupport::random_sparse_prob(rng, n, 0.6)
                                    : testsupport::random_prob(rng, n);
    const ProbVector nu = trial % 3 ? testsupport::random_prob(rng, n)
                                    : testsupport::random_sparse_prob(rng, n, 0.6);
    const double fast = tree_wasserstein(tree, mu, nu);
    const double lp = exact_wasserstein(tree, mu, nu).cost;
    CHECK(fast == doctest::Approx(lp).epsilon(1e-9));
  }
}

TEST_CASE("closed form on path trees matches the CDF identity") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_below(40));
    std::vector<TreeEdge> edges;
    std::vector<double> w;
    for (int v = 1; v < n; ++v) {
      w.push_back(0.1 + 3.0 * rng.next_double());
      edges.push_back({v - 1, v, w.back()});
    }
    const RootedTree tree = RootedTree::build(n, 0, edges);
    const ProbVector mu = testsupport::random_prob(rng, static_cast<std::size_t>(n));
    const ProbVector nu = testsupport::random_prob(rng, static_cast<std::size_t>(n));
    CHECK(tree_wasserstein(tree, mu, nu) ==
          doctest::Approx(path_wasserstein(w, mu.values(), nu.values())).epsilon(1e-12));
  }
}

TEST_CASE("metric axioms of the closed form") {
  Rng rng(31);
  const RootedTree tree = testsupport::random_weighted_tree(5, 30, 0.1, 2.0);
  const ProbVector mu = testsupport::random_prob(rng, 30);
  const ProbVector nu = testsupport::random_prob(rng, 30);
  const ProbVector pi = testsupport::random_prob(rng, 30);

  CHECK(tree_wasserstein(tree, mu, mu) == 0.0);
  CHECK(tree_wasserstein(tree, mu, nu) == doctest::Approx(tree_wasserstein(tree, nu, mu)).epsilon(1e-14));
  CHECK(tree_wasserstein(tree, mu, nu) >= 0.0);
  CHECK(tree_wasserstein(tree, mu, pi) <=
        tree_wasserstein(tree, mu, nu) + tree_wasserstein(tree, nu, pi) + 1e-12);

  // Two-point sanity: all mass moved across one edge costs the weight.
  std::vector<TreeEdge> one = {{0, 1, 2.5}};
  const RootedTree pair = RootedTree::build(2, 0, one);
  CHECK(tree_wasserstein(pair, ProbVector::one_hot(2, 0), ProbVector::one_hot(2, 1)) ==
        doctest::Approx(2.5));
}

TEST_CASE("closed form is one linear pass with caller-owned scratch") {
  const std::size_t n = 500;
  const RootedTree tree = testsupport::random_weighted_tree(12, n, 0.0, 1.0);
  Rng rng(3);
  const ProbVector mu = testsupport::random_prob(rng, n);
  const ProbVector nu = testsupport::random_prob(rng, n);
  std::vector<double> work(n);
  OpCounter counter;
  const double v = tree_wasserstein(tree, mu.values(), nu.values(), work, &counter);
  CHECK(counter.visits == n);  // every node exactly once
  CHECK(v == doctest::Approx(tree_wasserstein(tree, mu, nu)));

  std::vector<double> short_work(n - 1);
  CHECK_THROWS_AS(tree_wasserstein(tree, mu.values(), nu.values(), short_work), TreeotError);
  std::vector<double> short_mu(n - 1, 1.0 / static_cast<double>(n - 1));
  CHECK_THROWS_AS(tree_wasserstein(tree, short_mu, nu.values(), work), TreeotError);
}

TEST_CASE("uniform off-diagonal cost gives total variation") {
  Rng rng(8);
  const std::size_t n = 12;
  const Matrix cost = uniform_offdiag_cost(n);
  const ProbVector a = testsupport::random_prob(rng, n);
  const ProbVector b = testsupport::random_prob(rng, n);
  double tv = 0.0;
  for (std::size_t i = 0; i < n; ++i) tv += std::abs(a[i] - b[i]);
  tv *= 0.5;
  CHECK(exact_wasserstein(cost, a, b).cost == doctest::Approx(tv).epsilon(1e-10));
}
