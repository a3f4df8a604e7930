#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "treeot/datagen.hpp"
#include "treeot/error.hpp"
#include "treeot/io.hpp"
#include "treeot/metrics.hpp"
#include "treeot/model.hpp"
#include "treeot/objective.hpp"
#include "treeot/rng.hpp"

namespace treeot {

struct TrainConfig {
  int epochs = 500;
  int batch_size = 10;
  double learning_rate = 0.001;
  std::uint64_t seed = 0;
  LossConfig loss;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  void validate() const {
    require(epochs >= 0, Errc::invalid_config, "epochs must be >= 0");
    require(batch_size >= 1, Errc::invalid_config, "batch_size must be >= 1");
    require(learning_rate > 0.0 && std::isfinite(learning_rate), Errc::invalid_config,
            "learning_rate must be positive");
    require(adam_beta1 > 0.0 && adam_beta1 < 1.0 && adam_beta2 > 0.0 && adam_beta2 < 1.0,
            Errc::invalid_config, "adam betas must lie in (0,1)");
    require(adam_epsilon > 0.0, Errc::invalid_config, "adam_epsilon must be positive");
  }
};

inline const char* regularizer_kind_name(RegularizerKind k) {
  switch (k) {
    case RegularizerKind::none: return "none";
    case RegularizerKind::tree_wasserstein: return "tw";
    case RegularizerKind::sinkhorn: return "sinkhorn";
  }
  return "none";
}

inline RegularizerKind parse_regularizer_kind(std::string_view s) {
  if (s == "none") return RegularizerKind::none;
  if (s == "tw" || s == "tree_wasserstein") return RegularizerKind::tree_wasserstein;
  if (s == "sinkhorn") return RegularizerKind::sinkhorn;
  fail(Errc::invalid_config, "unknown regularizer '" + std::string(s) + "'");
}

inline nlohmann::json train_config_to_json(const TrainConfig& cfg) {
  return nlohmann::json{
      {"epochs", cfg.epochs},
      {"batch_size", cfg.batch_size},
      {"learning_rate", cfg.learning_rate},
      {"seed", cfg.seed},
      {"adam_beta1", cfg.adam_beta1},
      {"adam_beta2", cfg.adam_beta2},
      {"adam_epsilon", cfg.adam_epsilon},
      {"loss",
       {{"lambda", cfg.loss.lambda},
        {"regularizer", regularizer_kind_name(cfg.loss.regularizer_kind)},
        {"sinkhorn_iterations", cfg.loss.sinkhorn_iterations},
        {"sinkhorn_reg", cfg.loss.sinkhorn_reg},
        {"sinkhorn_convention",
         cfg.loss.sinkhorn_convention == SinkhornConvention::scale_cost ? "scale_cost" : "epsilon"},
        {"kl_epsilon", cfg.loss.kl_epsilon}}}};
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig cfg;
  cfg.epochs = j.at("epochs").get<int>();
  cfg.batch_size = j.at("batch_size").get<int>();
  cfg.learning_rate = j.at("learning_rate").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.adam_beta1 = j.at("adam_beta1").get<double>();
  cfg.adam_beta2 = j.at("adam_beta2").get<double>();
  cfg.adam_epsilon = j.at("adam_epsilon").get<double>();
  const auto& l = j.at("loss");
  cfg.loss.lambda = l.at("lambda").get<double>();
  cfg.loss.regularizer_kind = parse_regularizer_kind(l.at("regularizer").get<std::string>());
  cfg.loss.sinkhorn_iterations = l.at("sinkhorn_iterations").get<int>();
  cfg.loss.sinkhorn_reg = l.at("sinkhorn_reg").get<double>();
  cfg.loss.sinkhorn_convention = l.at("sinkhorn_convention").get<std::string>() == "epsilon"
                                     ? SinkhornConvention::epsilon
                                     : SinkhornConvention::scale_cost;
  cfg.loss.kl_epsilon = l.at("kl_epsilon").get<double>();
  cfg.validate();
  return cfg;
}

inline void save_train_config(const TrainConfig& cfg, const std::filesystem::path& path) {
  write_file_atomic(path, train_config_to_json(cfg).dump(2) + "\n");
}

inline TrainConfig load_train_config(const std::filesystem::path& path) {
  try {
    return train_config_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::io_error, std::string("bad train config: ") + e.what());
  }
}

// Per-epoch averages of the objective parts over the training set, recorded
// as the epoch's samples are visited.
struct TrainingTrace {
  std::vector<double> total, kl_part, reg_part;

  std::string to_csv() const {
    std::string out = "epoch,total,kl,reg\n";
    for (std::size_t e = 0; e < total.size(); ++e) {
      out += std::to_string(e + 1) + "," + format_double(total[e]) + "," +
             format_double(kl_part[e]) + "," + format_double(reg_part[e]) + "\n";
    }
    return out;
  }
};

namespace detail {
// Standard Adam step over one flat parameter array.
class Adam {
 public:
  Adam(std::size_t n, double beta1, double beta2, double eps)
      : b1_(beta1), b2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::span<double> params, std::span<const double> grad, double lr, long t) {
    const double bc1 = 1.0 - std::pow(b1_, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(b2_, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = b1_ * m_[i] + (1.0 - b1_) * grad[i];
      v_[i] = b2_ * v_[i] + (1.0 - b2_) * grad[i] * grad[i];
      params[i] -= lr * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + eps_);
    }
  }

 private:
  double b1_, b2_, eps_;
  std::vector<double> m_, v_;
};
}  // namespace detail

struct TrainResult {
  LinearSoftmaxModel model;
  TrainingTrace trace;
};

// Minibatch Adam on the combined objective. Batch gradients are summed, not
// averaged, so the objective optimized is the literal sum over the batch.
// Everything downstream of `seed` is deterministic: initialization, the
// per-epoch shuffles, and therefore the trace and final weights.
inline TrainResult train(const Dataset& data, const RootedTree& tree, const TrainConfig& cfg) {
  cfg.validate();
  require(data.size() > 0, Errc::empty_input, "training dataset is empty");
  const std::size_t labels = static_cast<std::size_t>(tree.node_count());
  require(data.targets.cols() == labels, Errc::dimension_mismatch,
          "target dimension != tree node count");
  const std::size_t dim = data.features.cols();

  TrainResult out{LinearSoftmaxModel::init(labels, dim, cfg.seed), {}};
  LossContext ctx(tree, cfg.loss);

  const std::size_t n = data.size();
  const std::size_t wcount = labels * dim;
  detail::Adam adam_w(wcount, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon);
  detail::Adam adam_b(labels, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> logits(labels), glogits(labels);
  std::vector<double> gw(wcount), gb(labels);
  long step = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng = Rng::substream(cfg.seed, rng_domain::train_shuffle,
                                     static_cast<std::uint64_t>(epoch));
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle_rng.shuffle(std::span<std::size_t>(order));

    double ep_total = 0.0, ep_kl = 0.0, ep_reg = 0.0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
      std::fill(gw.begin(), gw.end(), 0.0);
      std::fill(gb.begin(), gb.end(), 0.0);
      for (std::size_t b = start; b < stop; ++b) {
        const std::size_t i = order[b];
        const auto x = data.features.row(i);
        out.model.logits(x, logits);
        const LossValue lv = ctx.loss_grad_logits(logits, data.targets.row(i), glogits);
        if (!std::isfinite(lv.total))
          fail(Errc::nonfinite_value, "nonfinite loss at epoch " + std::to_string(epoch + 1) +
                                          ", batch " + std::to_string(start / cfg.batch_size + 1));
        ep_total += lv.total;
        ep_kl += lv.kl_part;
        ep_reg += lv.reg_part;
        for (std::size_t l = 0; l < labels; ++l) {
          const double g = glogits[l];
          gb[l] += g;
          double* wrow = gw.data() + l * dim;
          for (std::size_t k = 0; k < dim; ++k) wrow[k] += g * x[k];
        }
      }
      ++step;
      adam_w.step(out.model.weights.data(), gw, cfg.learning_rate, step);
      adam_b.step(out.model.biases, gb, cfg.learning_rate, step);
    }
    out.trace.total.push_back(ep_total / static_cast<double>(n));
    out.trace.kl_part.push_back(ep_kl / static_cast<double>(n));
    out.trace.reg_part.push_back(ep_reg / static_cast<double>(n));
  }
  return out;
}

// The seven distribution metrics over a dataset. The Wasserstein column uses
// the LP oracle up to 500 labels and the (provably equal) closed form above
// that.
inline MetricReport evaluate(const LinearSoftmaxModel& model, const Dataset& data,
                             const RootedTree& tree) {
  const std::size_t labels = static_cast<std::size_t>(tree.node_count());
  require(model.label_count() == labels, Errc::dimension_mismatch,
          "model label count != tree node count");
  require(data.targets.cols() == labels, Errc::dimension_mismatch,
          "target dimension != tree node count");
  require(model.feature_dim() == data.features.cols(), Errc::dimension_mismatch,
          "model feature dim != dataset feature dim");

  const std::size_t n = data.size();
  const bool use_lp = labels <= 500;
  Matrix dist_matrix;
  if (use_lp) dist_matrix = tree.distance_matrix();

  std::vector<double> logits(labels), pred(labels), work(labels);
  std::vector<std::vector<double>> cols(7);
  for (auto& c : cols) c.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    model.logits(data.features.row(i), logits);
    softmax(logits, pred);
    const auto target = data.targets.row(i);
    cols[0].push_back(canberra(pred, target));
    cols[1].push_back(chebyshev(pred, target));
    cols[2].push_back(clark(pred, target));
    cols[3].push_back(cosine(pred, target));
    cols[4].push_back(intersection(pred, target));
    cols[5].push_back(kl_metric(pred, target));
    cols[6].push_back(use_lp ? exact_wasserstein(dist_matrix, pred, target).cost
                             : tree_wasserstein(tree, pred, target, work));
  }

  MetricReport report;
  const char* names[7] = {"canberra", "chebyshev", "clark",      "cosine",
                          "intersection", "kl",    "wasserstein"};
  for (std::size_t c = 0; c < 7; ++c) report.add(names[c], std::move(cols[c]));
  return report;
}

}  // namespace treeot
