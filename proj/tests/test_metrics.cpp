#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <json.hpp>

#include "support/helpers.hpp"
#include "treeot/metrics.hpp"

using namespace treeot;

namespace {

// Trapezoidal ROC AUC built from scratch: sweep unique thresholds from high
// to low, trace (FPR, TPR), integrate. Ties handled by grouping equal scores
// into one step, which is exactly what the midrank formula integrates to.
double trapezoid_auc(std::span<const double> scores, std::span<const std::uint8_t> truth) {
  std::vector<std::size_t> idx(scores.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  double pos = 0.0, neg = 0.0;
  for (auto t : truth) (t ? pos : neg) += 1.0;
  double tp = 0.0, fp = 0.0, auc = 0.0;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    double dtp = 0.0, dfp = 0.0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      (truth[idx[j]] ? dtp : dfp) += 1.0;
      ++j;
    }
    // Trapezoid over the tied block.
    auc += (dfp / neg) * (tp / pos + 0.5 * dtp / pos);
    tp += dtp;
    fp += dfp;
    i = j;
  }
  return auc;
}

}  // namespace

TEST_CASE("identity cases: distance metrics vanish, similarity metrics peak") {
  Rng rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t n = 3 + rng.next_below(20);
    const ProbVector p = testsupport::random_prob(rng, n);
    CHECK(canberra(p.values(), p.values()) == 0.0);
    CHECK(chebyshev(p.values(), p.values()) == 0.0);
    CHECK(clark(p.values(), p.values()) == 0.0);
    CHECK(cosine(p.values(), p.values()) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(intersection(p.values(), p.values()) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(kl_metric(p.values(), p.values()) == doctest::Approx(0.0));
    const RootedTree t =
        testsupport::random_weighted_tree(static_cast<std::uint64_t>(trial), n, 0.1, 2.0);
    CHECK(wasserstein_metric(t, p.values(), p.values()) == 0.0);
  }
}

TEST_CASE("disjoint one-hot supports: extreme values with known constants") {
  const ProbVector a = ProbVector::one_hot(6, 1);
  const ProbVector b = ProbVector::one_hot(6, 4);
  CHECK(chebyshev(a.values(), b.values()) == 1.0);
  CHECK(canberra(a.values(), b.values()) == 2.0);  // two coordinates, each |1-0|/1
  CHECK(clark(a.values(), b.values()) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(cosine(a.values(), b.values()) == 0.0);
  CHECK(intersection(a.values(), b.values()) == 0.0);

  // Wasserstein between point masses is the tree distance between the nodes.
  const RootedTree t = testsupport::random_weighted_tree(10, 6, 0.3, 2.0);
  CHECK(wasserstein_metric(t, a.values(), b.values()) ==
        doctest::Approx(t.distances_from(1)[4]).epsilon(1e-12));
}

TEST_CASE("hand-computed values on a small pair") {
  const std::vector<double> p{0.5, 0.3, 0.2};
  const std::vector<double> q{0.2, 0.5, 0.3};
  CHECK(canberra(p, q) == doctest::Approx(0.3 / 0.7 + 0.2 / 0.8 + 0.1 / 0.5).epsilon(1e-14));
  CHECK(chebyshev(p, q) == doctest::Approx(0.3).epsilon(1e-15));
  const double c2 = 0.09 / 0.49 + 0.04 / 0.64 + 0.01 / 0.25;
  CHECK(clark(p, q) == doctest::Approx(std::sqrt(c2)).epsilon(1e-14));
  const double dot = 0.1 + 0.15 + 0.06;
  const double na = std::sqrt(0.25 + 0.09 + 0.04), nb = std::sqrt(0.04 + 0.25 + 0.09);
  CHECK(cosine(p, q) == doctest::Approx(dot / (na * nb)).epsilon(1e-14));
  CHECK(intersection(p, q) == doctest::Approx(0.2 + 0.3 + 0.2).epsilon(1e-15));
}

TEST_CASE("metrics demand matching lengths") {
  const std::vector<double> p{0.5, 0.5};
  const std::vector<double> q{1.0, 0.0, 0.0};
  CHECK_THROWS_AS((void)canberra(p, q), TreeotError);
  CHECK_THROWS_AS((void)cosine(p, q), TreeotError);
}

TEST_CASE("closed-form wasserstein column can be cross-checked against the LP") {
  Rng rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + rng.next_below(15);
    const RootedTree t =
        testsupport::random_weighted_tree(40 + static_cast<std::uint64_t>(trial), n, 0.0, 4.0);
    const ProbVector p = testsupport::random_prob(rng, n);
    const ProbVector q = testsupport::random_sparse_prob(rng, n, 0.4);
    CHECK(wasserstein_metric(t, p.values(), q.values()) ==
          doctest::Approx(wasserstein_metric_lp(t, p.values(), q.values())).epsilon(1e-9));
  }
}

TEST_CASE("ranked labels sort descending with stable ties") {
  const std::vector<double> s{0.1, 0.5, 0.5, 0.3};
  const std::vector<int> order = ranked_labels(s);
  REQUIRE(order.size() == 4);
  CHECK(order[0] == 1);  // ties keep original order: 1 before 2
  CHECK(order[1] == 2);
  CHECK(order[2] == 3);
  CHECK(order[3] == 0);
}

TEST_CASE("pseudo recall counts truth labels inside the top-|truth| cut") {
  const std::vector<double> s{0.05, 0.4, 0.3, 0.2, 0.05};
  std::vector<int> truth{1, 2};  // both in top-2
  CHECK(pseudo_recall(s, truth) == 1.0);
  truth = {1, 4};  // one of two in top-2
  CHECK(pseudo_recall(s, truth) == 0.5);
  truth = {0, 4};  // none in top-2
  CHECK(pseudo_recall(s, truth) == 0.0);
  std::vector<int> bad{99};
  CHECK_THROWS_AS(pseudo_recall(s, bad), TreeotError);
}

TEST_CASE("top-k cost on a path tree") {
  // Path 0-1-2-3-4, unit weights. Scores rank 2,3,1,...; truth = {0}.
  std::vector<TreeEdge> edges;
  for (int v = 1; v < 5; ++v) edges.push_back({v - 1, v, 1.0});
  const RootedTree t = RootedTree::build(5, 0, edges);
  const std::vector<double> s{0.1, 0.2, 0.4, 0.3, 0.0};
  std::vector<int> truth{0};
  // Top-2 nodes are 2 and 3 at distances 2 and 3 from node 0.
  CHECK(top_k_cost(t, s, truth, 2) == doctest::Approx((2.0 + 3.0) / 2.0));
  // Top-1 is node 2.
  CHECK(top_k_cost(t, s, truth, 1) == doctest::Approx(2.0));
  // A truth hit inside the top-k contributes zero.
  std::vector<int> truth2{2};
  CHECK(top_k_cost(t, s, truth2, 1) == 0.0);
  // k larger than the label count is clamped but still divides by k.
  CHECK(top_k_cost(t, s, truth2, 100) ==
        doctest::Approx((0.0 + 1.0 + 1.0 + 2.0 + 2.0) / 100.0));
}

TEST_CASE("roc auc equals the trapezoidal construction, ties included") {
  Rng rng(2025);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 4 + rng.next_below(30);
    std::vector<double> scores(n);
    std::vector<std::uint8_t> truth(n);
    // Quantized scores force ties in roughly half the trials.
    const bool quantize = trial % 2 == 0;
    bool has_pos = false, has_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = quantize ? static_cast<double>(rng.next_below(5)) / 4.0 : rng.next_double();
      truth[i] = static_cast<std::uint8_t>(rng.next_below(2));
      (truth[i] ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) {
      CHECK_FALSE(roc_auc(scores, truth).has_value());
      continue;
    }
    const auto got = roc_auc(scores, truth);
    REQUIRE(got.has_value());
    CHECK(std::abs(*got - trapezoid_auc(scores, truth)) < 1e-10);
  }

  // Degenerate labels yield no value.
  const std::vector<double> s{0.1, 0.9};
  const std::vector<std::uint8_t> all_pos{1, 1};
  CHECK_FALSE(roc_auc(s, all_pos).has_value());

  // Perfect and inverted rankings hit the extremes.
  const std::vector<double> s2{0.9, 0.8, 0.2, 0.1};
  const std::vector<std::uint8_t> t2{1, 1, 0, 0};
  CHECK(*roc_auc(s2, t2) == doctest::Approx(1.0));
  const std::vector<std::uint8_t> t3{0, 0, 1, 1};
  CHECK(*roc_auc(s2, t3) == doctest::Approx(0.0));
}

TEST_CASE("report: means, stds, json and csv stay consistent") {
  MetricReport report;
  report.add("alpha", {1.0, 2.0, 3.0});
  report.add("beta", {0.5, 0.5, 0.5});

  CHECK(report.mean_of("alpha") == doctest::Approx(2.0));
  CHECK(report.find("beta")->stddev() == doctest::Approx(0.0));
  CHECK(report.find("alpha")->stddev() == doctest::Approx(1.0));  // sample std
  CHECK(report.find("missing") == nullptr);
  CHECK_THROWS_AS(report.mean_of("missing"), TreeotError);

  // JSON parses and repeats the numbers.
  const nlohmann::json j = nlohmann::json::parse(report.to_json());
  CHECK(j.at("alpha").at("mean").get<double>() == doctest::Approx(2.0));
  CHECK(j.at("alpha").at("n").get<int>() == 3);

  // The summary is re-derivable from the per-sample CSV.
  const std::string csv = report.to_csv();
  std::vector<double> alpha_col;
  std::size_t pos = csv.find('\n') + 1;
  while (pos < csv.size()) {
    std::size_t eol = csv.find('\n', pos);
    if (eol == std::string::npos) eol = csv.size();
    const std::string line = csv.substr(pos, eol - pos);
    const std::size_t c1 = line.find(',');
    const std::size_t c2 = line.find(',', c1 + 1);
    alpha_col.push_back(parse_double(line.substr(c1 + 1, c2 - c1 - 1)));
    pos = eol + 1;
  }
  REQUIRE(alpha_col.size() == 3);
  double mean = (alpha_col[0] + alpha_col[1] + alpha_col[2]) / 3.0;
  CHECK(mean == doctest::Approx(j.at("alpha").at("mean").get<double>()).epsilon(1e-15));
}
