#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "treeot/error.hpp"
#include "treeot/io.hpp"
#include "treeot/matrix.hpp"
#include "treeot/prob.hpp"
#include "treeot/rng.hpp"
#include "treeot/tree.hpp"

namespace treeot {

// The generator's score exponent: as_written_positive uses exp(+d/sigma^2),
// which piles mass on nodes FAR from v and u; negated uses exp(-d/sigma^2),
// concentrating mass near them.
enum class ExponentSign { as_written_positive, negated };

inline const char* exponent_sign_name(ExponentSign s) {
  return s == ExponentSign::as_written_positive ? "as_written_positive" : "negated";
}

inline ExponentSign parse_exponent_sign(std::string_view s) {
  if (s == "as_written_positive" || s == "as-written") return ExponentSign::as_written_positive;
  if (s == "negated") return ExponentSign::negated;
  fail(Errc::invalid_config, "unknown exponent sign '" + std::string(s) + "'");
}

struct SynthConfig {
  int num_nodes = 2;     // l: label-tree size
  int feature_dim = 16;  // n: stored feature dimension
  int hidden_dim = 16;   // m: width of the first sigmoid layer
  int num_samples = 100; // N
  std::uint64_t seed = 0;
  ExponentSign sign = ExponentSign::as_written_positive;

  void validate() const {
    require(num_nodes >= 2, Errc::invalid_config, "num_nodes must be >= 2");
    require(feature_dim >= 1 && hidden_dim >= 1, Errc::invalid_config, "dims must be >= 1");
    require(num_samples >= 0, Errc::invalid_config, "num_samples must be >= 0");
  }
};

struct Dataset {
  Matrix features;  // N x n
  Matrix targets;   // N x l, each row a probability vector
  RootedTree tree;

  std::size_t size() const { return features.rows(); }
};

// Uniformly random labeled tree on l nodes (random Prufer sequence decoded
// with the pointer method), rooted at node 0, unit edge weights.
inline RootedTree random_tree(int l, std::uint64_t seed) {
  require(l >= 1, Errc::invalid_config, "tree needs at least one node");
  if (l == 1) return RootedTree::build(1, 0, {});
  std::vector<TreeEdge> edges;
  if (l == 2) {
    edges.push_back({0, 1, 1.0});
    return RootedTree::build(2, 0, edges);
  }

  Rng rng = Rng::substream(seed, rng_domain::tree, 0);
  std::vector<int> prufer(static_cast<std::size_t>(l - 2));
  for (int& p : prufer) p = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(l)));

  std::vector<int> degree(static_cast<std::size_t>(l), 1);
  for (int p : prufer) ++degree[static_cast<std::size_t>(p)];

  // Pointer decode: consume the smallest current leaf per sequence entry;
  // node l-1 is never consumed and receives the final edge.
  std::vector<std::pair<int, int>> undirected;
  undirected.reserve(static_cast<std::size_t>(l - 1));
  int ptr = 0;
  while (degree[static_cast<std::size_t>(ptr)] != 1) ++ptr;
  int leaf = ptr;
  for (int p : prufer) {
    undirected.emplace_back(leaf, p);
    if (--degree[static_cast<std::size_t>(p)] == 1 && p < ptr) {
      leaf = p;
    } else {
      while (degree[static_cast<std::size_t>(++ptr)] != 1) {}
      leaf = ptr;
    }
  }
  undirected.emplace_back(leaf, l - 1);

  std::vector<std::vector<int>> adj(static_cast<std::size_t>(l));
  for (auto [x, y] : undirected) {
    adj[static_cast<std::size_t>(x)].push_back(y);
    adj[static_cast<std::size_t>(y)].push_back(x);
  }
  std::vector<int> parent(static_cast<std::size_t>(l), -1);
  std::vector<int> stack{0};
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(l), 0);
  seen[0] = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w : adj[static_cast<std::size_t>(v)]) {
      if (seen[static_cast<std::size_t>(w)]) continue;
      seen[static_cast<std::size_t>(w)] = 1;
      parent[static_cast<std::size_t>(w)] = v;
      stack.push_back(w);
    }
  }
  edges.reserve(static_cast<std::size_t>(l - 1));
  for (int v = 1; v < l; ++v) edges.push_back({parent[static_cast<std::size_t>(v)], v, 1.0});
  return RootedTree::build(l, 0, edges);
}

// F_{v,u,sigma}: per-node score exp(s*d(v,.)/sigma^2) + exp(s*d(u,.)/sigma^2)
// normalized to a distribution, with one shared max shift so the scores never
// overflow.
inline ProbVector f_dist(const RootedTree& tree, int v, int u, double sigma, ExponentSign sign) {
  require(sigma > 0.0 && std::isfinite(sigma), Errc::invalid_config, "sigma must be positive");
  const double s = sign == ExponentSign::as_written_positive ? 1.0 : -1.0;
  const double inv = s / (sigma * sigma);
  const std::vector<double> dv = tree.distances_from(v);
  const std::vector<double> du = tree.distances_from(u);
  const std::size_t n = dv.size();
  double shift = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) shift = std::max({shift, inv * dv[i], inv * du[i]});
  std::vector<double> score(n);
  for (std::size_t i = 0; i < n; ++i)
    score[i] = std::exp(inv * dv[i] - shift) + std::exp(inv * du[i] - shift);
  return ProbVector(std::move(score));
}

namespace detail {
inline void sigmoid_inplace(std::span<double> x) {
  for (double& v : x) v = 1.0 / (1.0 + std::exp(-v));
}

// out = sigmoid(W x), sizes out = W.rows, x = W.cols.
inline void affine_sigmoid(const Matrix& w, std::span<const double> x, std::span<double> out) {
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const double* row = w.ptr() + r * w.cols();
    double acc = 0.0;
    for (std::size_t c = 0; c < w.cols(); ++c) acc += row[c] * x[c];
    out[r] = acc;
  }
  sigmoid_inplace(out);
}
}  // namespace detail

namespace rng_domain {
inline constexpr std::uint64_t gen_sample_test = 7;
}

// One sample from the generative pipeline: x ~ N(0,I_n) is the stored
// feature; two sigmoid layers map it to l+1 values, of which the last scaled
// by 10 becomes sigma and the first l pick v (argmax) and u (argmin); the
// target is F_{v,u,sigma} on the tree. Ties break toward the lowest index.
inline void synth_sample(const RootedTree& tree, const Matrix& w1, const Matrix& w2,
                         ExponentSign sign, Rng& rng, std::span<double> feature_out,
                         std::span<double> target_out) {
  const int l = tree.node_count();
  for (double& f : feature_out) f = rng.next_normal();
  std::vector<double> h1(w1.rows());
  std::vector<double> h2(w2.rows());
  detail::affine_sigmoid(w1, feature_out, h1);
  detail::affine_sigmoid(w2, h1, h2);
  const double sigma = 10.0 * h2[static_cast<std::size_t>(l)];
  int v = 0, u = 0;
  for (int i = 1; i < l; ++i) {
    if (h2[static_cast<std::size_t>(i)] > h2[static_cast<std::size_t>(v)]) v = i;
    if (h2[static_cast<std::size_t>(i)] < h2[static_cast<std::size_t>(u)]) u = i;
  }
  const ProbVector p = f_dist(tree, v, u, sigma, sign);
  std::copy(p.values().begin(), p.values().end(), target_out.begin());
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.next_normal();
  return m;
}

// The full pipeline for one split. `sample_domain` separates the train and
// test sample streams; every sample gets its own counter-keyed substream so
// the draw is independent of generation order.
inline Dataset generate_with_domain(const SynthConfig& cfg, std::uint64_t sample_domain) {
  cfg.validate();
  Dataset d{Matrix(static_cast<std::size_t>(cfg.num_samples), static_cast<std::size_t>(cfg.feature_dim)),
            Matrix(static_cast<std::size_t>(cfg.num_samples), static_cast<std::size_t>(cfg.num_nodes)),
            random_tree(cfg.num_nodes, cfg.seed)};
  Rng wrng = Rng::substream(cfg.seed, rng_domain::gen_weights, 0);
  const Matrix w1 = random_matrix(static_cast<std::size_t>(cfg.hidden_dim),
                                  static_cast<std::size_t>(cfg.feature_dim), wrng);
  const Matrix w2 = random_matrix(static_cast<std::size_t>(cfg.num_nodes + 1),
                                  static_cast<std::size_t>(cfg.hidden_dim), wrng);
  for (int i = 0; i < cfg.num_samples; ++i) {
    Rng srng = Rng::substream(cfg.seed, sample_domain, static_cast<std::uint64_t>(i));
    synth_sample(d.tree, w1, w2, cfg.sign, srng, d.features.row(static_cast<std::size_t>(i)),
                 d.targets.row(static_cast<std::size_t>(i)));
  }
  return d;
}

inline Dataset generate(const SynthConfig& cfg) {
  return generate_with_domain(cfg, rng_domain::gen_sample);
}

struct DatasetPair {
  Dataset train;
  Dataset test;
};

// Train and test share the tree and the pipeline weights; their sample
// streams are disjoint, and neither depends on the other's size.
inline DatasetPair generate_split(const SynthConfig& cfg, int test_samples) {
  SynthConfig test_cfg = cfg;
  test_cfg.num_samples = test_samples;
  return {generate_with_domain(cfg, rng_domain::gen_sample),
          generate_with_domain(test_cfg, rng_domain::gen_sample_test)};
}

// --- dataset files -----------------------------------------------------
// Header JSON line {version,N,n,l,seed,sign,tree_file}, then one line per
// sample {"x":[...],"p":[...]}. Numbers carry 17 significant digits so a
// load/save cycle is byte-identical.

inline std::string dataset_header_line(const SynthConfig& cfg, int num_samples,
                                       std::string_view tree_file) {
  std::string h = "{\"version\":1";
  h += ",\"N\":" + std::to_string(num_samples);
  h += ",\"n\":" + std::to_string(cfg.feature_dim);
  h += ",\"l\":" + std::to_string(cfg.num_nodes);
  h += ",\"seed\":" + std::to_string(cfg.seed);
  h += ",\"sign\":\"" + std::string(exponent_sign_name(cfg.sign)) + "\"";
  h += ",\"tree_file\":\"" + std::string(tree_file) + "\"}";
  return h;
}

inline void append_vector_json(std::string& out, std::span<const double> v) {
  out += '[';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  out += ']';
}

inline void save_dataset(const Dataset& d, const SynthConfig& cfg,
                         const std::filesystem::path& data_path, std::string_view tree_file) {
  std::string out = dataset_header_line(cfg, static_cast<int>(d.size()), tree_file);
  out += '\n';
  for (std::size_t i = 0; i < d.size(); ++i) {
    out += "{\"x\":";
    append_vector_json(out, d.features.row(i));
    out += ",\"p\":";
    append_vector_json(out, d.targets.row(i));
    out += "}\n";
  }
  write_file_atomic(data_path, out);
}

struct DatasetFile {
  Dataset dataset;
  SynthConfig config;      // as recorded in the header
  std::string tree_file;   // as recorded, relative to the dataset file's directory
};

inline DatasetFile load_dataset(const std::filesystem::path& data_path) {
  const std::string text = read_file(data_path);
  std::size_t pos = 0;
  auto next_line = [&]() -> std::string_view {
    if (pos >= text.size()) return {};
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    return line;
  };

  const std::string_view header_line = next_line();
  require(!header_line.empty(), Errc::io_error, "dataset file is empty");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_line);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::io_error, std::string("bad dataset header: ") + e.what());
  }
  require(header.value("version", 0) == 1, Errc::io_error, "unsupported dataset version");

  DatasetFile out;
  out.config.num_samples = header.at("N").get<int>();
  out.config.feature_dim = header.at("n").get<int>();
  out.config.num_nodes = header.at("l").get<int>();
  out.config.seed = header.at("seed").get<std::uint64_t>();
  out.config.sign = parse_exponent_sign(header.at("sign").get<std::string>());
  out.tree_file = header.at("tree_file").get<std::string>();
  out.config.validate();

  const std::filesystem::path tree_path =
      data_path.has_parent_path() ? data_path.parent_path() / out.tree_file
                                  : std::filesystem::path(out.tree_file);
  out.dataset.tree = RootedTree::load(tree_path);
  require(out.dataset.tree.node_count() == out.config.num_nodes, Errc::io_error,
          "tree size does not match dataset header");

  const std::size_t n_samples = static_cast<std::size_t>(out.config.num_samples);
  out.dataset.features = Matrix(n_samples, static_cast<std::size_t>(out.config.feature_dim));
  out.dataset.targets = Matrix(n_samples, static_cast<std::size_t>(out.config.num_nodes));
  for (std::size_t i = 0; i < n_samples; ++i) {
    const std::string_view line = next_line();
    require(!line.empty(), Errc::io_error, "dataset truncated at sample " + std::to_string(i));
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::io_error, "bad sample line " + std::to_string(i) + ": " + e.what());
    }
    const auto& x = row.at("x");
    const auto& p = row.at("p");
    require(x.size() == out.dataset.features.cols() && p.size() == out.dataset.targets.cols(),
            Errc::io_error, "sample " + std::to_string(i) + " has wrong dimensions");
    for (std::size_t j = 0; j < x.size(); ++j)
      out.dataset.features.at(i, j) = x[j].get<double>();
    double sum = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double v = p[j].get<double>();
      require(v >= 0.0, Errc::io_error, "negative target mass in sample " + std::to_string(i));
      out.dataset.targets.at(i, j) = v;
      sum += v;
    }
    require(std::abs(sum - 1.0) <= 1e-9, Errc::io_error,
            "target row " + std::to_string(i) + " does not sum to 1");
  }
  return out;
}

}  // namespace treeot
