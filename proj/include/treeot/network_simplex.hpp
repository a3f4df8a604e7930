#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "treeot/error.hpp"
#include "treeot/matrix.hpp"

namespace treeot {

struct TransportPlan {
  Matrix plan;        // m x n, row marginals = supply, col marginals = demand
  double cost = 0.0;  // <C, plan>
  int pivots = 0;
};

// Primal network simplex specialized to the dense transportation polytope.
// Basis = spanning tree over the bipartite supply/demand graph, seeded with a
// northwest-corner solution. Dantzig pricing with a Bland fallback that kicks
// in after a long degenerate streak, so cycling cannot occur.
class NetworkSimplex {
 public:
  NetworkSimplex(const Matrix& cost, std::span<const double> supply, std::span<const double> demand)
      : c_(cost), m_(cost.rows()), n_(cost.cols()) {
    require(m_ > 0 && n_ > 0, Errc::empty_input, "cost matrix must be nonempty");
    require(supply.size() == m_, Errc::length_mismatch, "supply length != cost rows");
    require(demand.size() == n_, Errc::length_mismatch, "demand length != cost cols");
    a_.assign(supply.begin(), supply.end());
    b_.assign(demand.begin(), demand.end());
    double sa = 0.0, sb = 0.0;
    for (double x : a_) {
      require(std::isfinite(x) && x >= 0.0, Errc::invalid_config, "supplies must be finite and >= 0");
      sa += x;
    }
    for (double x : b_) {
      require(std::isfinite(x) && x >= 0.0, Errc::invalid_config, "demands must be finite and >= 0");
      sb += x;
    }
    require(sa > 0.0 && sb > 0.0, Errc::invalid_config, "total mass must be positive");
    require(std::abs(sa - sb) <= 1e-9, Errc::invalid_config, "supply and demand masses differ");
    const double scale = sa / sb;
    for (double& x : b_) x *= scale;
    double cmax = 0.0;
    for (std::size_t k = 0; k < m_ * n_; ++k) {
      const double v = c_.ptr()[k];
      require(std::isfinite(v), Errc::nonfinite_value, "cost matrix has a nonfinite entry");
      cmax = std::max(cmax, std::abs(v));
    }
    eps_ = 1e-13 * std::max(1.0, cmax);
  }

  TransportPlan solve() {
    northwest_corner();
    const std::size_t cells = m_ * n_;
    const int max_pivots = std::max<int>(10000, static_cast<int>(400 * (m_ + n_)));
    int pivots = 0;
    int degenerate_streak = 0;
    bool bland = false;
    std::vector<double> u(m_), v(n_);
    while (true) {
      compute_potentials(u, v);
      const long enter = bland ? first_negative(u, v) : most_negative(u, v);
      if (enter < 0) break;
      if (++pivots > max_pivots) fail(Errc::solver_failure, "pivot limit exceeded");
      const bool degenerate = pivot(static_cast<std::size_t>(enter) / n_, static_cast<std::size_t>(enter) % n_);
      if (degenerate) {
        if (++degenerate_streak > static_cast<int>(cells)) bland = true;
      } else {
        degenerate_streak = 0;
        bland = false;
      }
    }

    TransportPlan out;
    out.plan = Matrix(m_, n_, 0.0);
    double total = 0.0;
    for (std::size_t k = 0; k < basis_i_.size(); ++k) {
      const double f = std::max(0.0, basis_flow_[k]);
      out.plan.at(basis_i_[k], basis_j_[k]) = f;
      total += f * c_.at(basis_i_[k], basis_j_[k]);
    }
    require(std::isfinite(total), Errc::nonfinite_value, "transport cost is nonfinite");
    out.cost = total;
    out.pivots = pivots;
    return out;
  }

 private:
  std::size_t row_node(std::size_t i) const { return i; }
  std::size_t col_node(std::size_t j) const { return m_ + j; }

  void add_basic(std::size_t i, std::size_t j, double flow) {
    const int id = static_cast<int>(basis_i_.size());
    basis_i_.push_back(i);
    basis_j_.push_back(j);
    basis_flow_.push_back(flow);
    adj_[row_node(i)].push_back(id);
    adj_[col_node(j)].push_back(id);
  }

  void northwest_corner() {
    adj_.assign(m_ + n_, {});
    basis_i_.clear();
    basis_j_.clear();
    basis_flow_.clear();
    basis_i_.reserve(m_ + n_ - 1);
    std::size_t i = 0, j = 0;
    double ra = a_[0], cb = b_[0];
    while (true) {
      const double x = std::min(ra, cb);
      add_basic(i, j, x);
      if (i == m_ - 1 && j == n_ - 1) break;
      if ((ra <= cb && i < m_ - 1) || j == n_ - 1) {
        cb -= x;
        ra = a_[++i];
      } else {
        ra -= x;
        cb = b_[++j];
      }
    }
  }

  // Dual values from the basis tree: u_i + v_j = c_ij on every basic cell.
  void compute_potentials(std::vector<double>& u, std::vector<double>& v) const {
    std::vector<std::uint8_t> seen(m_ + n_, 0);
    std::vector<std::size_t> queue;
    queue.reserve(m_ + n_);
    u[0] = 0.0;
    seen[row_node(0)] = 1;
    queue.push_back(row_node(0));
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const std::size_t node = queue[q];
      for (int id : adj_[node]) {
        const std::size_t bi = basis_i_[static_cast<std::size_t>(id)];
        const std::size_t bj = basis_j_[static_cast<std::size_t>(id)];
        const std::size_t other = node < m_ ? col_node(bj) : row_node(bi);
        if (seen[other]) continue;
        seen[other] = 1;
        if (other >= m_)
          v[bj] = c_.at(bi, bj) - u[bi];
        else
          u[bi] = c_.at(bi, bj) - v[bj];
        queue.push_back(other);
      }
    }
    require(queue.size() == m_ + n_, Errc::solver_failure, "basis is not a spanning tree");
  }

  long most_negative(const std::vector<double>& u, const std::vector<double>& v) const {
    long best = -1;
    double best_r = -eps_;
    const double* c = c_.ptr();
    for (std::size_t i = 0; i < m_; ++i) {
      const double ui = u[i];
      const std::size_t base = i * n_;
      for (std::size_t j = 0; j < n_; ++j) {
        const double r = c[base + j] - ui - v[j];
        if (r < best_r) {
          best_r = r;
          best = static_cast<long>(base + j);
        }
      }
    }
    return best;
  }

  long first_negative(const std::vector<double>& u, const std::vector<double>& v) const {
    const double* c = c_.ptr();
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t base = i * n_;
      for (std::size_t j = 0; j < n_; ++j)
        if (c[base + j] - u[i] - v[j] < -eps_) return static_cast<long>(base + j);
    }
    return -1;
  }

  // Brings (ei, ej) into the basis. Returns true when the pivot was
  // degenerate (moved zero flow).
  bool pivot(std::size_t ei, std::size_t ej) {
    // Path between the entering cell's endpoints through the basis tree.
    std::vector<int> parent_cell(m_ + n_, -1);
    std::vector<std::int8_t> reached(m_ + n_, 0);
    std::vector<std::size_t> queue{row_node(ei)};
    reached[row_node(ei)] = 1;
    for (std::size_t q = 0; q < queue.size() && !reached[col_node(ej)]; ++q) {
      const std::size_t node = queue[q];
      for (int id : adj_[node]) {
        const std::size_t other =
            node < m_ ? col_node(basis_j_[static_cast<std::size_t>(id)]) : row_node(basis_i_[static_cast<std::size_t>(id)]);
        if (reached[other]) continue;
        reached[other] = 1;
        parent_cell[other] = id;
        queue.push_back(other);
      }
    }
    require(reached[col_node(ej)], Errc::solver_failure, "entering cell endpoints are disconnected");

    // Walk back from the demand endpoint; cells alternate signs around the
    // cycle, starting with minus for the cell sharing the entering row.
    std::vector<int> path;
    std::size_t node = col_node(ej);
    while (node != row_node(ei)) {
      const int id = parent_cell[node];
      path.push_back(id);
      const std::size_t bi = basis_i_[static_cast<std::size_t>(id)];
      const std::size_t bj = basis_j_[static_cast<std::size_t>(id)];
      node = node == row_node(bi) ? col_node(bj) : row_node(bi);
    }
    std::reverse(path.begin(), path.end());

    double theta = std::numeric_limits<double>::infinity();
    int leave = -1;
    long leave_key = 0;
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const int id = path[k];
      const double f = basis_flow_[static_cast<std::size_t>(id)];
      const long key = static_cast<long>(basis_i_[static_cast<std::size_t>(id)] * n_ + basis_j_[static_cast<std::size_t>(id)]);
      if (f < theta || (f == theta && key < leave_key)) {
        theta = f;
        leave = id;
        leave_key = key;
      }
    }
    require(leave >= 0, Errc::solver_failure, "no leaving arc found");

    for (std::size_t k = 0; k < path.size(); ++k) {
      const int id = path[k];
      double& f = basis_flow_[static_cast<std::size_t>(id)];
      f += (k % 2 == 0) ? -theta : theta;
      if (f < 0.0) f = 0.0;
    }

    // Replace the leaving cell in place.
    const std::size_t li = basis_i_[static_cast<std::size_t>(leave)];
    const std::size_t lj = basis_j_[static_cast<std::size_t>(leave)];
    detach(row_node(li), leave);
    detach(col_node(lj), leave);
    basis_i_[static_cast<std::size_t>(leave)] = ei;
    basis_j_[static_cast<std::size_t>(leave)] = ej;
    basis_flow_[static_cast<std::size_t>(leave)] = theta;
    adj_[row_node(ei)].push_back(leave);
    adj_[col_node(ej)].push_back(leave);
    return theta == 0.0;
  }

  void detach(std::size_t node, int id) {
    auto& list = adj_[node];
    list.erase(std::find(list.begin(), list.end(), id));
  }

  Matrix c_;
  std::size_t m_ = 0, n_ = 0;
  std::vector<double> a_, b_;
  double eps_ = 0.0;
  std::vector<std::size_t> basis_i_, basis_j_;
  std::vector<double> basis_flow_;
  std::vector<std::vector<int>> adj_;
};

}  // namespace treeot
