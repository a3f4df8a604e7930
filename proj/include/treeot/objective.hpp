#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "treeot/error.hpp"
#include "treeot/prob.hpp"
#include "treeot/sinkhorn.hpp"
#include "treeot/transport.hpp"
#include "treeot/tree.hpp"

namespace treeot {

enum class RegularizerKind { none, tree_wasserstein, sinkhorn };

struct LossConfig {
  double lambda = 0.0;
  RegularizerKind regularizer_kind = RegularizerKind::none;
  int sinkhorn_iterations = 10;
  double sinkhorn_reg = 50.0;
  SinkhornConvention sinkhorn_convention = SinkhornConvention::scale_cost;
  double kl_epsilon = 1e-12;
};

struct LossValue {
  double total = 0.0;
  double kl_part = 0.0;
  double reg_part = 0.0;
};

inline void softmax(std::span<const double> logits, std::span<double> out) {
  require(logits.size() == out.size() && !logits.empty(), Errc::length_mismatch,
          "softmax buffers must match and be nonempty");
  double m = logits[0];
  for (double z : logits) m = std::max(m, z);
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    sum += out[i];
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= sum;
}

// Kullback-Leibler divergence sum_l target[l] * log(target[l] / pred[l]) with
// the 0 log 0 convention and pred floored at kl_epsilon inside the log only.
inline double kl_loss(std::span<const double> pred, std::span<const double> target,
                      double kl_epsilon = 1e-12) {
  require(pred.size() == target.size(), Errc::length_mismatch, "pred/target length mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double t = target[i];
    if (t <= 0.0) continue;
    total += t * (std::log(t) - std::log(std::max(pred[i], kl_epsilon)));
  }
  require(!std::isnan(total), Errc::nonfinite_value, "KL loss is NaN");
  return total;
}

inline double kl_loss(const ProbVector& pred, const ProbVector& target, double kl_epsilon = 1e-12) {
  require_same_length(pred, target);
  return kl_loss(pred.values(), target.values(), kl_epsilon);
}

inline double tw_regularizer(const RootedTree& tree, const ProbVector& pred, const ProbVector& target) {
  return tree_wasserstein(tree, pred, target);
}

namespace detail {
inline double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }
}  // namespace detail

// Value and subgradient of the tree distance in one O(L) round trip: the
// post-order pass turns pointwise differences into subtree-mass differences,
// the reverse pass pushes the signed edge weights back down the root paths
//   grad[u] = sum over non-root ancestors v of u (u included) of
//             edge_weight[v] * sign(mass_pred(v) - mass_target(v)),
// with sign(0) = 0, the minimum-norm choice at kinks. Returns the distance.
inline double tw_value_and_grad(const RootedTree& tree, std::span<const double> pred,
                                std::span<const double> target, std::span<double> grad,
                                std::span<double> work) {
  const std::size_t n = static_cast<std::size_t>(tree.node_count());
  require(pred.size() == n && target.size() == n, Errc::length_mismatch,
          "distribution length != node count");
  require(grad.size() == n && work.size() == n, Errc::length_mismatch, "buffer length != node count");
  for (std::size_t i = 0; i < n; ++i) work[i] = pred[i] - target[i];
  const int root = tree.root();
  const auto order = tree.post_order();
  double total = 0.0;
  for (int v : order) {
    if (v == root) continue;
    work[static_cast<std::size_t>(tree.parent(v))] += work[static_cast<std::size_t>(v)];
    total += tree.edge_weight(v) * std::abs(work[static_cast<std::size_t>(v)]);
  }
  grad[static_cast<std::size_t>(root)] = 0.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int v = *it;
    if (v == root) continue;
    grad[static_cast<std::size_t>(v)] =
        grad[static_cast<std::size_t>(tree.parent(v))] +
        tree.edge_weight(v) * detail::sign_of(work[static_cast<std::size_t>(v)]);
  }
  require(std::isfinite(total), Errc::nonfinite_value, "regularizer value is nonfinite");
  return total;
}

inline std::vector<double> tw_regularizer_grad(const RootedTree& tree, const ProbVector& pred,
                                               const ProbVector& target) {
  const std::size_t n = static_cast<std::size_t>(tree.node_count());
  std::vector<double> grad(n), work(n);
  tw_value_and_grad(tree, pred.values(), target.values(), grad, work);
  return grad;
}

// Shared state for repeated loss evaluations against one tree: the distance
// matrix and Sinkhorn solver are built once, and all per-call scratch lives
// here, so the training hot path allocates nothing.
class LossContext {
 public:
  LossContext(const RootedTree& tree, LossConfig cfg) : tree_(&tree), cfg_(cfg) {
    require(cfg.lambda >= 0.0 && std::isfinite(cfg.lambda), Errc::invalid_config, "lambda must be >= 0");
    require(cfg.kl_epsilon > 0.0, Errc::invalid_config, "kl_epsilon must be > 0");
    const std::size_t n = static_cast<std::size_t>(tree.node_count());
    work_.resize(n);
    twg_.resize(n);
    pred_.resize(n);
    if (cfg.regularizer_kind == RegularizerKind::sinkhorn) {
      dist_ = tree.distance_matrix();
      SinkhornOptions opts;
      opts.iterations = cfg.sinkhorn_iterations;
      opts.reg = cfg.sinkhorn_reg;
      opts.convention = cfg.sinkhorn_convention;
      opts.symmetry = CostSymmetry::symmetric;
      solver_.emplace(dist_, opts);
    }
  }

  const LossConfig& config() const { return cfg_; }
  const RootedTree& tree() const { return *tree_; }

  LossValue loss(std::span<const double> pred, std::span<const double> target) {
    LossValue v;
    v.kl_part = kl_loss(pred, target, cfg_.kl_epsilon);
    v.reg_part = regularizer_value(pred, target);
    v.total = v.kl_part + cfg_.lambda * v.reg_part;
    return v;
  }

  // Loss at pred = softmax(logits) plus its gradient with respect to the
  // logits. KL contributes pred - target; each regularizer contributes its
  // gradient g in pred pushed through the softmax Jacobian,
  // J^T g = pred .* g - pred * (pred . g).
  LossValue loss_grad_logits(std::span<const double> logits, std::span<const double> target,
                             std::span<double> grad_out) {
    const std::size_t n = pred_.size();
    require(logits.size() == n && target.size() == n && grad_out.size() == n,
            Errc::length_mismatch, "buffer length != node count");
    softmax(logits, pred_);

    LossValue v;
    v.kl_part = kl_loss(pred_, target, cfg_.kl_epsilon);
    for (std::size_t i = 0; i < n; ++i) grad_out[i] = pred_[i] - target[i];

    if (cfg_.regularizer_kind == RegularizerKind::none || cfg_.lambda == 0.0) {
      if (cfg_.regularizer_kind == RegularizerKind::tree_wasserstein) {
        v.reg_part = tree_wasserstein(*tree_, pred_, target, work_);
      } else if (cfg_.regularizer_kind == RegularizerKind::sinkhorn) {
        solver_->solve(pred_, target);
        v.reg_part = solver_->last_dual_value();
      }
      v.total = v.kl_part + cfg_.lambda * v.reg_part;
      return v;
    }

    if (cfg_.regularizer_kind == RegularizerKind::tree_wasserstein) {
      v.reg_part = tw_value_and_grad(*tree_, pred_, target, twg_, work_);
    } else {
      // The trained quantity is the entropic dual objective: its value and its
      // envelope gradient f / k belong to the same function, so finite
      // differences of the reported loss match the gradient that training uses.
      solver_->solve(pred_, target);
      v.reg_part = solver_->last_dual_value();
      const auto f = solver_->potentials_f();
      const double k = solver_->kernel_factor();
      for (std::size_t i = 0; i < n; ++i) twg_[i] = f[i] / k;
    }

    double dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) dot += pred_[i] * twg_[i];
    for (std::size_t i = 0; i < n; ++i)
      grad_out[i] += cfg_.lambda * pred_[i] * (twg_[i] - dot);
    v.total = v.kl_part + cfg_.lambda * v.reg_part;
    return v;
  }

 private:
  double regularizer_value(std::span<const double> pred, std::span<const double> target) {
    switch (cfg_.regularizer_kind) {
      case RegularizerKind::none: return 0.0;
      case RegularizerKind::tree_wasserstein: return tree_wasserstein(*tree_, pred, target, work_);
      case RegularizerKind::sinkhorn:
        solver_->solve(pred, target);
        return solver_->last_dual_value();
    }
    return 0.0;
  }

  const RootedTree* tree_;
  LossConfig cfg_;
  Matrix dist_;
  std::optional<SinkhornSolver> solver_;
  std::vector<double> work_, twg_, pred_;
};

inline LossValue combined_loss(const RootedTree& tree, const ProbVector& pred,
                               const ProbVector& target, const LossConfig& cfg) {
  LossContext ctx(tree, cfg);
  return ctx.loss(pred.values(), target.values());
}

inline std::vector<double> combined_loss_grad_logits(const RootedTree& tree,
                                                     std::span<const double> logits,
                                                     const ProbVector& target,
                                                     const LossConfig& cfg) {
  LossContext ctx(tree, cfg);
  std::vector<double> grad(logits.size());
  ctx.loss_grad_logits(logits, target.values(), grad);
  return grad;
}

}  // namespace treeot
