#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "treeot/error.hpp"
#include "treeot/io.hpp"
#include "treeot/matrix.hpp"
#include "treeot/prob.hpp"

namespace treeot {

struct TreeEdge {
  int parent = 0;
  int child = 0;
  double weight = 1.0;
};

class NodeSet {
 public:
  explicit NodeSet(std::size_t n) : mask_(n, 0) {}

  bool contains(int v) const { return mask_[static_cast<std::size_t>(v)] != 0; }
  void insert(int v) { mask_[static_cast<std::size_t>(v)] = 1; }
  std::size_t universe_size() const { return mask_.size(); }

  std::size_t count() const {
    std::size_t c = 0;
    for (auto m : mask_) c += m;
    return c;
  }

  std::vector<int> indices() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < mask_.size(); ++i)
      if (mask_[i]) out.push_back(static_cast<int>(i));
    return out;
  }

 private:
  std::vector<std::uint8_t> mask_;
};

struct OpCounter {
  std::uint64_t visits = 0;
};

// Rooted tree over dense node ids 0..L-1 with nonnegative edge weights stored
// on the child endpoint (the deeper node identifies its parent edge).
// Immutable after construction; cached post-order drives the linear passes.
class RootedTree {
 public:
  // A valid single-node tree; the placeholder state for aggregates that are
  // filled in later.
  RootedTree()
      : root_(0), parent_{-1}, edge_weight_{0.0}, children_(1), post_order_{0}, depth_{0},
        depth_weight_{0.0} {}

  static RootedTree build(int node_count, int root, std::span<const TreeEdge> edges) {
    require(node_count >= 1, Errc::invalid_config, "node_count must be >= 1");
    require(root >= 0 && root < node_count, Errc::invalid_node, "root id out of range");

    RootedTree t{Unfilled{}};
    t.root_ = root;
    t.parent_.assign(static_cast<std::size_t>(node_count), -2);  // -2 = unset
    t.parent_[static_cast<std::size_t>(root)] = -1;
    t.edge_weight_.assign(static_cast<std::size_t>(node_count), 0.0);

    for (const TreeEdge& e : edges) {
      require(e.parent >= 0 && e.parent < node_count && e.child >= 0 && e.child < node_count,
              Errc::invalid_node, "edge endpoint out of range");
      if (e.child == e.parent) fail(Errc::cycle_detected, "self-loop on node " + std::to_string(e.child));
      if (e.child == root) fail(Errc::cycle_detected, "root listed as a child");
      if (!(e.weight >= 0.0)) fail(Errc::negative_weight, "edge weight must be >= 0");
      auto& p = t.parent_[static_cast<std::size_t>(e.child)];
      if (p != -2) fail(Errc::duplicate_edge, "node " + std::to_string(e.child) + " has two parent edges");
      p = e.parent;
      t.edge_weight_[static_cast<std::size_t>(e.child)] = e.weight;
    }

    for (int v = 0; v < node_count; ++v)
      if (t.parent_[static_cast<std::size_t>(v)] == -2)
        fail(Errc::disconnected_node, "node " + std::to_string(v) + " is not connected to the root");

    t.check_acyclic();
    t.build_children_and_order();
    return t;
  }

  // Joins the components of a parent->child forest under one synthetic root
  // (appended as node id = node_count) connected to each component root.
  static RootedTree attach_root(int node_count, std::span<const TreeEdge> edges, double weight = 1.0) {
    require(node_count >= 1, Errc::invalid_config, "node_count must be >= 1");
    require(weight >= 0.0, Errc::negative_weight, "attach weight must be >= 0");
    std::vector<std::uint8_t> has_parent(static_cast<std::size_t>(node_count), 0);
    for (const TreeEdge& e : edges) {
      require(e.child >= 0 && e.child < node_count, Errc::invalid_node, "edge endpoint out of range");
      has_parent[static_cast<std::size_t>(e.child)] = 1;
    }
    std::vector<TreeEdge> all(edges.begin(), edges.end());
    for (int v = 0; v < node_count; ++v)
      if (!has_parent[static_cast<std::size_t>(v)]) all.push_back({node_count, v, weight});
    return build(node_count + 1, node_count, all);
  }

  int node_count() const { return static_cast<int>(parent_.size()); }
  int root() const { return root_; }
  bool is_root(int v) const { return v == root_; }

  int parent(int v) const {
    check_node(v);
    return parent_[static_cast<std::size_t>(v)];
  }

  // Weight of the edge from v to its parent; 0 for the root.
  double edge_weight(int v) const {
    check_node(v);
    return edge_weight_[static_cast<std::size_t>(v)];
  }

  std::span<const int> post_order() const { return post_order_; }
  std::span<const int> children(int v) const {
    check_node(v);
    return children_[static_cast<std::size_t>(v)];
  }

  int depth(int v) const {
    check_node(v);
    return depth_[static_cast<std::size_t>(v)];
  }

  // Sum of edge weights on the path from v up to the root.
  double depth_weight(int v) const {
    check_node(v);
    return depth_weight_[static_cast<std::size_t>(v)];
  }

  // All nodes whose root path passes through v (v included).
  NodeSet subtree_nodes(int v) const {
    check_node(v);
    NodeSet set(parent_.size());
    std::vector<int> stack{v};
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      set.insert(u);
      for (int c : children_[static_cast<std::size_t>(u)]) stack.push_back(c);
    }
    return set;
  }

  // out[v] = total mu-mass in the subtree rooted at v. One post-order pass.
  void subtree_masses(std::span<const double> mu, std::span<double> out,
                      OpCounter* counter = nullptr) const {
    require(mu.size() == parent_.size(), Errc::length_mismatch, "mu length != node count");
    require(out.size() == parent_.size(), Errc::length_mismatch, "out length != node count");
    std::copy(mu.begin(), mu.end(), out.begin());
    for (int v : post_order_) {
      if (counter) ++counter->visits;
      const int p = parent_[static_cast<std::size_t>(v)];
      if (p >= 0) out[static_cast<std::size_t>(p)] += out[static_cast<std::size_t>(v)];
    }
  }

  std::vector<double> subtree_masses(const ProbVector& mu) const {
    std::vector<double> out(parent_.size());
    subtree_masses(mu.values(), out);
    return out;
  }

  // Shortest-path distances from one source to every node; O(L).
  std::vector<double> distances_from(int source) const {
    check_node(source);
    std::vector<double> dist(parent_.size(), -1.0);
    dist[static_cast<std::size_t>(source)] = 0.0;
    std::vector<int> stack{source};
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      const double dv = dist[static_cast<std::size_t>(v)];
      const int p = parent_[static_cast<std::size_t>(v)];
      if (p >= 0 && dist[static_cast<std::size_t>(p)] < 0.0) {
        dist[static_cast<std::size_t>(p)] = dv + edge_weight_[static_cast<std::size_t>(v)];
        stack.push_back(p);
      }
      for (int c : children_[static_cast<std::size_t>(v)]) {
        if (dist[static_cast<std::size_t>(c)] < 0.0) {
          dist[static_cast<std::size_t>(c)] = dv + edge_weight_[static_cast<std::size_t>(c)];
          stack.push_back(c);
        }
      }
    }
    return dist;
  }

  int lca(int u, int v) const {
    check_node(u);
    check_node(v);
    while (depth(u) > depth(v)) u = parent_[static_cast<std::size_t>(u)];
    while (depth(v) > depth(u)) v = parent_[static_cast<std::size_t>(v)];
    while (u != v) {
      u = parent_[static_cast<std::size_t>(u)];
      v = parent_[static_cast<std::size_t>(v)];
    }
    return u;
  }

  // Full pairwise shortest-path matrix. d(u,v) = dw(u) + dw(v) - 2 dw(lca),
  // evaluated once per unordered pair so the result is exactly symmetric.
  // Quadratic output; defined below once LcaTable exists.
  Matrix distance_matrix() const;

  std::string to_text() const {
    std::string out;
    out += "#nodes " + std::to_string(node_count()) + "\n";
    out += "#root " + std::to_string(root_) + "\n";
    for (int v = 0; v < node_count(); ++v) {
      const int p = parent_[static_cast<std::size_t>(v)];
      if (p < 0) continue;
      out += std::to_string(p) + "\t" + std::to_string(v) + "\t" +
             format_double(edge_weight_[static_cast<std::size_t>(v)]) + "\n";
    }
    return out;
  }

  static RootedTree from_text(std::string_view text) {
    int node_count = -1;
    int root = -1;
    std::vector<TreeEdge> edges;
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t eol = text.find('\n', pos);
      if (eol == std::string_view::npos) eol = text.size();
      const std::string_view line = text.substr(pos, eol - pos);
      pos = eol + 1;
      if (line.empty()) continue;
      if (line.starts_with("#nodes ")) {
        node_count = static_cast<int>(parse_int(line.substr(7)));
      } else if (line.starts_with("#root ")) {
        root = static_cast<int>(parse_int(line.substr(6)));
      } else if (line.starts_with("#")) {
        continue;  // unknown comment line
      } else {
        const std::size_t t1 = line.find('\t');
        const std::size_t t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
        if (t2 == std::string_view::npos) fail(Errc::io_error, "malformed edge line: '" + std::string(line) + "'");
        TreeEdge e;
        e.parent = static_cast<int>(parse_int(line.substr(0, t1)));
        e.child = static_cast<int>(parse_int(line.substr(t1 + 1, t2 - t1 - 1)));
        e.weight = parse_double(line.substr(t2 + 1));
        edges.push_back(e);
      }
    }
    if (node_count < 0) fail(Errc::io_error, "missing #nodes header");
    if (root < 0) fail(Errc::io_error, "missing #root header");
    return build(node_count, root, edges);
  }

  void save(const std::filesystem::path& path) const { write_file_atomic(path, to_text()); }

  static RootedTree load(const std::filesystem::path& path) { return from_text(read_file(path)); }

 private:
  struct Unfilled {};
  explicit RootedTree(Unfilled) {}

  void check_node(int v) const {
    if (v < 0 || v >= node_count()) [[unlikely]]
      fail(Errc::invalid_node, "node id " + std::to_string(v) + " out of range");
  }

  void check_acyclic() const {
    // 0 = unvisited, 1 = on current chain, 2 = known good.
    std::vector<std::uint8_t> state(parent_.size(), 0);
    state[static_cast<std::size_t>(root_)] = 2;
    std::vector<int> chain;
    for (int start = 0; start < node_count(); ++start) {
      int v = start;
      chain.clear();
      while (state[static_cast<std::size_t>(v)] == 0) {
        state[static_cast<std::size_t>(v)] = 1;
        chain.push_back(v);
        v = parent_[static_cast<std::size_t>(v)];
      }
      if (state[static_cast<std::size_t>(v)] == 1)
        fail(Errc::cycle_detected, "parent chain from node " + std::to_string(start) + " loops");
      for (int u : chain) state[static_cast<std::size_t>(u)] = 2;
    }
  }

  void build_children_and_order() {
    const std::size_t n = parent_.size();
    children_.assign(n, {});
    for (int v = 0; v < static_cast<int>(n); ++v) {
      const int p = parent_[static_cast<std::size_t>(v)];
      if (p >= 0) children_[static_cast<std::size_t>(p)].push_back(v);  // ascending by construction
    }

    post_order_.clear();
    post_order_.reserve(n);
    std::vector<int> stack{root_};
    std::vector<std::size_t> next_child(n, 0);
    while (!stack.empty()) {
      const int v = stack.back();
      auto& nc = next_child[static_cast<std::size_t>(v)];
      if (nc < children_[static_cast<std::size_t>(v)].size()) {
        stack.push_back(children_[static_cast<std::size_t>(v)][nc++]);
      } else {
        post_order_.push_back(v);
        stack.pop_back();
      }
    }

    depth_.assign(n, 0);
    depth_weight_.assign(n, 0.0);
    for (auto it = post_order_.rbegin(); it != post_order_.rend(); ++it) {
      const int v = *it;
      const int p = parent_[static_cast<std::size_t>(v)];
      if (p >= 0) {
        depth_[static_cast<std::size_t>(v)] = depth_[static_cast<std::size_t>(p)] + 1;
        depth_weight_[static_cast<std::size_t>(v)] =
            depth_weight_[static_cast<std::size_t>(p)] + edge_weight_[static_cast<std::size_t>(v)];
      }
    }
  }

  int root_ = 0;
  std::vector<int> parent_;
  std::vector<double> edge_weight_;
  std::vector<std::vector<int>> children_;
  std::vector<int> post_order_;
  std::vector<int> depth_;
  std::vector<double> depth_weight_;
};

inline RootedTree build_tree(int node_count, int root, std::span<const TreeEdge> edges) {
  return RootedTree::build(node_count, root, edges);
}

// Constant-time lowest-common-ancestor queries via an Euler tour and a
// sparse table of depth minima. Build is O(L log L).
class LcaTable {
 public:
  explicit LcaTable(const RootedTree& tree) {
    const std::size_t n = static_cast<std::size_t>(tree.node_count());
    first_.assign(n, -1);
    euler_.reserve(2 * n);
    euler_depth_.reserve(2 * n);
    // Euler tour without recursion: re-emit a node after each child subtree.
    std::vector<std::pair<int, std::size_t>> stack{{tree.root(), 0}};
    while (!stack.empty()) {
      auto& [v, ci] = stack.back();
      if (ci == 0) {
        first_[static_cast<std::size_t>(v)] = static_cast<int>(euler_.size());
        euler_.push_back(v);
        euler_depth_.push_back(tree.depth(v));
      }
      const auto kids = tree.children(v);
      if (ci < kids.size()) {
        const int child = kids[ci++];
        stack.push_back({child, 0});
      } else {
        stack.pop_back();
        if (!stack.empty()) {
          euler_.push_back(stack.back().first);
          euler_depth_.push_back(tree.depth(stack.back().first));
        }
      }
    }

    const std::size_t len = euler_.size();
    levels_ = 1;
    while ((std::size_t{1} << levels_) <= len) ++levels_;
    table_.assign(levels_ * len, 0);
    for (std::size_t k = 0; k < len; ++k) table_[k] = static_cast<int>(k);
    for (std::size_t lvl = 1; lvl < levels_; ++lvl) {
      const std::size_t half = std::size_t{1} << (lvl - 1);
      if (len < 2 * half) break;
      for (std::size_t k = 0; k + 2 * half <= len; ++k) {
        const int left = table_[(lvl - 1) * len + k];
        const int right = table_[(lvl - 1) * len + k + half];
        table_[lvl * len + k] = euler_depth_[static_cast<std::size_t>(left)] <=
                                        euler_depth_[static_cast<std::size_t>(right)]
                                    ? left
                                    : right;
      }
    }
  }

  int lca(int u, int v) const {
    int lo = first_[static_cast<std::size_t>(u)];
    int hi = first_[static_cast<std::size_t>(v)];
    if (lo > hi) std::swap(lo, hi);
    const std::size_t span = static_cast<std::size_t>(hi - lo + 1);
    std::size_t lvl = 0;
    while ((std::size_t{2} << lvl) <= span) ++lvl;
    const std::size_t len = euler_.size();
    const int left = table_[lvl * len + static_cast<std::size_t>(lo)];
    const int right = table_[lvl * len + static_cast<std::size_t>(hi) + 1 - (std::size_t{1} << lvl)];
    const int pos = euler_depth_[static_cast<std::size_t>(left)] <= euler_depth_[static_cast<std::size_t>(right)]
                        ? left
                        : right;
    return euler_[static_cast<std::size_t>(pos)];
  }

 private:
  std::vector<int> euler_;
  std::vector<int> euler_depth_;
  std::vector<int> first_;
  std::vector<int> table_;
  std::size_t levels_ = 0;
};

inline Matrix RootedTree::distance_matrix() const {
  const std::size_t n = parent_.size();
  Matrix d(n, n, 0.0);
  const LcaTable lca(*this);
  const std::vector<double>& dw = depth_weight_;
  for (int u = 0; u < static_cast<int>(n); ++u) {
    for (int v = u + 1; v < static_cast<int>(n); ++v) {
      const double duv = dw[static_cast<std::size_t>(u)] + dw[static_cast<std::size_t>(v)] -
                         2.0 * dw[static_cast<std::size_t>(lca.lca(u, v))];
      d.at(static_cast<std::size_t>(u), static_cast<std::size_t>(v)) = duv;
      d.at(static_cast<std::size_t>(v), static_cast<std::size_t>(u)) = duv;
    }
  }
  return d;
}

}  // namespace treeot
