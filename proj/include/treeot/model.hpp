#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "treeot/error.hpp"
#include "treeot/io.hpp"
#include "treeot/matrix.hpp"
#include "treeot/objective.hpp"
#include "treeot/prob.hpp"
#include "treeot/rng.hpp"

namespace treeot {

// Linear-softmax classifier over the label tree's nodes: class score
// w_l . x + b_l, prediction = softmax of the scores.
struct LinearSoftmaxModel {
  Matrix weights;              // L x d
  std::vector<double> biases;  // L

  std::size_t label_count() const { return weights.rows(); }
  std::size_t feature_dim() const { return weights.cols(); }

  static LinearSoftmaxModel init(std::size_t labels, std::size_t dim, std::uint64_t seed) {
    LinearSoftmaxModel m{Matrix(labels, dim), std::vector<double>(labels)};
    Rng rng = Rng::substream(seed, rng_domain::train_init, 0);
    for (double& w : m.weights.data()) w = rng.next_double() * 0.1 - 0.05;
    for (double& b : m.biases) b = rng.next_double() * 0.1 - 0.05;
    return m;
  }

  void logits(std::span<const double> x, std::span<double> out) const {
    require(x.size() == feature_dim(), Errc::dimension_mismatch, "feature dimension mismatch");
    require(out.size() == label_count(), Errc::dimension_mismatch, "logits buffer size mismatch");
    for (double v : x)
      require(std::isfinite(v), Errc::nonfinite_value, "nonfinite feature value");
    for (std::size_t l = 0; l < label_count(); ++l) {
      const double* row = weights.ptr() + l * feature_dim();
      double acc = biases[l];
      for (std::size_t k = 0; k < feature_dim(); ++k) acc += row[k] * x[k];
      out[l] = acc;
    }
  }
};

inline ProbVector predict(const LinearSoftmaxModel& model, std::span<const double> x) {
  std::vector<double> z(model.label_count());
  model.logits(x, z);
  std::vector<double> p(z.size());
  softmax(z, p);
  return ProbVector::unchecked(std::move(p));
}

// --- checkpoint --------------------------------------------------------
// Little-endian binary: 8-byte magic "TOTMDL01", u64 L, u64 d, L*d weight
// doubles (row-major), L bias doubles. Bit-exact round trip.

namespace detail {
inline constexpr char checkpoint_magic[9] = "TOTMDL01";

inline void put_u64(std::string& out, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.append(buf, 8);
}

inline void put_doubles(std::string& out, std::span<const double> v) {
  for (double d : v) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    put_u64(out, bits);
  }
}

inline std::uint64_t get_u64(const std::string& in, std::size_t& off) {
  require(off + 8 <= in.size(), Errc::io_error, "checkpoint truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[off + static_cast<std::size_t>(i)]))
         << (8 * i);
  off += 8;
  return v;
}

inline void get_doubles(const std::string& in, std::size_t& off, std::span<double> v) {
  for (double& d : v) {
    const std::uint64_t bits = get_u64(in, off);
    std::memcpy(&d, &bits, 8);
  }
}
}  // namespace detail

inline void save_model(const LinearSoftmaxModel& model, const std::filesystem::path& path) {
  std::string out;
  out.reserve(24 + 8 * (model.weights.data().size() + model.biases.size()));
  out.append(detail::checkpoint_magic, 8);
  detail::put_u64(out, model.label_count());
  detail::put_u64(out, model.feature_dim());
  detail::put_doubles(out, model.weights.data());
  detail::put_doubles(out, model.biases);
  write_file_atomic(path, out);
}

inline LinearSoftmaxModel load_model(const std::filesystem::path& path) {
  const std::string in = read_file(path);
  require(in.size() >= 24 && in.compare(0, 8, detail::checkpoint_magic, 8) == 0, Errc::io_error,
          "not a model checkpoint: " + path.string());
  std::size_t off = 8;
  const std::uint64_t labels = detail::get_u64(in, off);
  const std::uint64_t dim = detail::get_u64(in, off);
  require(labels > 0 && dim > 0 && labels < (1u << 24) && dim < (1u << 24), Errc::io_error,
          "implausible checkpoint dimensions");
  LinearSoftmaxModel m{Matrix(labels, dim), std::vector<double>(labels)};
  detail::get_doubles(in, off, m.weights.data());
  detail::get_doubles(in, off, m.biases);
  require(off == in.size(), Errc::io_error, "checkpoint has trailing bytes");
  return m;
}

}  // namespace treeot
