#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "treeot/error.hpp"
#include "treeot/io.hpp"
#include "treeot/objective.hpp"
#include "treeot/transport.hpp"
#include "treeot/tree.hpp"

namespace treeot {

namespace detail {
inline void check_same(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size() && !a.empty(), Errc::length_mismatch,
          "metric inputs must be nonempty and equal length");
}
}  // namespace detail

inline double canberra(std::span<const double> pred, std::span<const double> target) {
  detail::check_same(pred, target);
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double denom = pred[i] + target[i];
    if (denom > 0.0) total += std::abs(pred[i] - target[i]) / denom;
  }
  return total;
}

inline double chebyshev(std::span<const double> pred, std::span<const double> target) {
  detail::check_same(pred, target);
  double worst = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    worst = std::max(worst, std::abs(pred[i] - target[i]));
  return worst;
}

inline double clark(std::span<const double> pred, std::span<const double> target) {
  detail::check_same(pred, target);
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double denom = pred[i] + target[i];
    if (denom > 0.0) {
      const double r = (pred[i] - target[i]) / denom;
      total += r * r;
    }
  }
  return std::sqrt(total);
}

inline double cosine(std::span<const double> pred, std::span<const double> target) {
  detail::check_same(pred, target);
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    dot += pred[i] * target[i];
    na += pred[i] * pred[i];
    nb += target[i] * target[i];
  }
  require(na > 0.0 && nb > 0.0, Errc::invalid_config, "cosine of a zero vector");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline double intersection(std::span<const double> pred, std::span<const double> target) {
  detail::check_same(pred, target);
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) total += std::min(pred[i], target[i]);
  return total;
}

inline double kl_metric(std::span<const double> pred, std::span<const double> target,
                        double kl_epsilon = 1e-12) {
  return kl_loss(pred, target, kl_epsilon);
}

// Exact Wasserstein distance under the tree metric via the closed form.
inline double wasserstein_metric(const RootedTree& tree, std::span<const double> pred,
                                 std::span<const double> target) {
  std::vector<double> work(static_cast<std::size_t>(tree.node_count()));
  return tree_wasserstein(tree, pred, target, work);
}

// Same value through the LP route; the cross-check mode and the evaluation
// path for oracle-scale trees.
inline double wasserstein_metric_lp(const RootedTree& tree, std::span<const double> pred,
                                    std::span<const double> target) {
  return exact_wasserstein(tree.distance_matrix(), pred, target).cost;
}

// Indices 0..L-1 ordered by descending score, ties to the lowest index.
inline std::vector<int> ranked_labels(std::span<const double> scores) {
  std::vector<int> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
  });
  return idx;
}

// |top-|truth| predicted set  intersected with  truth| / |truth|.
inline double pseudo_recall(std::span<const double> scores, std::span<const int> truth) {
  require(!truth.empty(), Errc::empty_input, "truth set is empty");
  std::vector<std::uint8_t> is_truth(scores.size(), 0);
  for (int t : truth) {
    require(t >= 0 && static_cast<std::size_t>(t) < scores.size(), Errc::invalid_node,
            "truth label out of range");
    is_truth[static_cast<std::size_t>(t)] = 1;
  }
  const std::vector<int> order = ranked_labels(scores);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < truth.size() && k < order.size(); ++k)
    hits += is_truth[static_cast<std::size_t>(order[k])];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

// Mean over the K top-ranked labels of the tree distance to the nearest
// truth label.
inline double top_k_cost(const RootedTree& tree, std::span<const double> scores,
                         std::span<const int> truth, int k) {
  require(k >= 1, Errc::invalid_config, "k must be >= 1");
  require(!truth.empty(), Errc::empty_input, "truth set is empty");
  require(scores.size() == static_cast<std::size_t>(tree.node_count()), Errc::length_mismatch,
          "scores length != node count");
  const std::vector<int> order = ranked_labels(scores);
  const int kk = std::min<int>(k, static_cast<int>(order.size()));
  double total = 0.0;
  for (int i = 0; i < kk; ++i) {
    const std::vector<double> dist = tree.distances_from(order[static_cast<std::size_t>(i)]);
    double best = std::numeric_limits<double>::infinity();
    for (int t : truth) {
      require(t >= 0 && t < tree.node_count(), Errc::invalid_node, "truth label out of range");
      best = std::min(best, dist[static_cast<std::size_t>(t)]);
    }
    total += best;
  }
  return total / static_cast<double>(k);
}

// Mann-Whitney AUC with midrank tie handling. Empty when the truth vector has
// no positive or no negative labels (the curve is undefined there).
inline std::optional<double> roc_auc(std::span<const double> scores,
                                     std::span<const std::uint8_t> truth) {
  require(scores.size() == truth.size() && !scores.empty(), Errc::length_mismatch,
          "scores/truth length mismatch");
  std::size_t pos = 0;
  for (auto t : truth) pos += t ? 1 : 0;
  const std::size_t neg = truth.size() - pos;
  if (pos == 0 || neg == 0) return std::nullopt;

  std::vector<int> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return scores[static_cast<std::size_t>(a)] < scores[static_cast<std::size_t>(b)];
  });

  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() &&
           scores[static_cast<std::size_t>(idx[j + 1])] == scores[static_cast<std::size_t>(idx[i])])
      ++j;
    const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;  // ranks are 1-based
    for (std::size_t t = i; t <= j; ++t)
      if (truth[static_cast<std::size_t>(idx[t])]) rank_sum_pos += midrank;
    i = j + 1;
  }
  const double u = rank_sum_pos - 0.5 * static_cast<double>(pos) * static_cast<double>(pos + 1);
  return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

// --- aggregation -------------------------------------------------------

struct MetricSeries {
  std::string name;
  std::vector<double> values;

  double mean() const {
    if (values.empty()) return 0.0;
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
  }

  // Sample standard deviation (n-1); 0 for fewer than two values.
  double stddev() const {
    if (values.size() < 2) return 0.0;
    const double m = mean();
    double s = 0.0;
    for (double v : values) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(values.size() - 1));
  }
};

class MetricReport {
 public:
  void add(std::string name, std::vector<double> values) {
    series_.push_back({std::move(name), std::move(values)});
  }

  const std::vector<MetricSeries>& series() const { return series_; }

  const MetricSeries* find(std::string_view name) const {
    for (const auto& s : series_)
      if (s.name == name) return &s;
    return nullptr;
  }

  double mean_of(std::string_view name) const {
    const MetricSeries* s = find(name);
    require(s != nullptr, Errc::invalid_config, "no metric named '" + std::string(name) + "'");
    return s->mean();
  }

  std::string to_json() const {
    std::string out = "{";
    for (std::size_t i = 0; i < series_.size(); ++i) {
      const auto& s = series_[i];
      if (i) out += ",";
      out += "\"" + s.name + "\":{\"mean\":" + format_double(s.mean()) +
             ",\"std\":" + format_double(s.stddev()) + ",\"n\":" + std::to_string(s.values.size()) +
             "}";
    }
    out += "}";
    return out;
  }

  // One row per sample, one column per metric.
  std::string to_csv() const {
    std::string out = "sample";
    for (const auto& s : series_) out += "," + s.name;
    out += "\n";
    const std::size_t n = series_.empty() ? 0 : series_.front().values.size();
    for (const auto& s : series_)
      require(s.values.size() == n, Errc::length_mismatch, "metric series lengths differ");
    for (std::size_t i = 0; i < n; ++i) {
      out += std::to_string(i);
      for (const auto& s : series_) out += "," + format_double(s.values[i]);
      out += "\n";
    }
    return out;
  }

 private:
  std::vector<MetricSeries> series_;
};

}  // namespace treeot
