#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "treeot/alloc_stats.hpp"
#include "treeot/datagen.hpp"
#include "treeot/error.hpp"
#include "treeot/io.hpp"
#include "treeot/rng.hpp"
#include "treeot/sinkhorn.hpp"
#include "treeot/transport.hpp"

namespace treeot {

enum class BenchMethod { tw, sinkhorn };

inline const char* bench_method_name(BenchMethod m) {
  return m == BenchMethod::tw ? "tw" : "sinkhorn";
}

struct BenchResult {
  std::size_t support_size = 0;
  BenchMethod method = BenchMethod::tw;
  bool budget_exceeded = false;
  double time_s_median = 0.0;
  double time_s_min = 0.0;
  std::uint64_t peak_bytes = 0;   // live-bytes high-water delta for the cell
  std::uint64_t alloc_bytes = 0;  // cumulative bytes the cell allocated (setup + one run)
  int repeats = 0;
  double distance_value = 0.0;    // seeded, for reproducibility snapshots
};

struct BenchOptions {
  std::vector<std::size_t> sizes = {100, 1000, 10000};
  int repeats = 3;
  std::uint64_t seed = 0;
  bool charge_cost_matrix = false;
  std::uint64_t memory_budget = std::uint64_t{4} << 30;
  double min_sample_seconds = 0.01;  // inner-loop calibration target
};

// Peak resident set from the kernel, when available.
inline std::optional<std::uint64_t> read_peak_rss_bytes() {
  std::string status;
  try {
    status = read_file("/proc/self/status");
  } catch (const TreeotError&) {
    return std::nullopt;
  }
  const std::size_t pos = status.find("VmHWM:");
  if (pos == std::string::npos) return std::nullopt;
  std::size_t p = pos + 6;
  while (p < status.size() && (status[p] == ' ' || status[p] == '\t')) ++p;
  std::uint64_t kb = 0;
  while (p < status.size() && status[p] >= '0' && status[p] <= '9') {
    kb = kb * 10 + static_cast<std::uint64_t>(status[p] - '0');
    ++p;
  }
  return kb * 1024;
}

namespace detail {

inline double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

// Times fn() by running it in calibrated inner loops: per repeat, enough
// iterations to fill ~min_sample_seconds, reported as seconds per call.
template <typename Fn>
void time_repeats(Fn&& fn, int repeats, double min_sample_seconds, double& median_out,
                  double& min_out) {
  double t0 = now_seconds();
  fn();
  const double first = std::max(1e-9, now_seconds() - t0);
  const long inner = std::max<long>(1, static_cast<long>(min_sample_seconds / first));

  std::vector<double> per_call;
  per_call.reserve(static_cast<std::size_t>(repeats));
  per_call.push_back(first);
  for (int r = 1; r < repeats; ++r) {
    t0 = now_seconds();
    for (long k = 0; k < inner; ++k) fn();
    per_call.push_back(std::max(1e-9, now_seconds() - t0) / static_cast<double>(inner));
  }
  std::sort(per_call.begin(), per_call.end());
  min_out = per_call.front();
  median_out = per_call[per_call.size() / 2];
}

inline void random_pair(std::size_t n, Rng& rng, std::vector<double>& a, std::vector<double>& b) {
  a.resize(n);
  b.resize(n);
  double sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = rng.next_double_open();
    sa += a[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    b[i] = rng.next_double_open();
    sb += b[i];
  }
  for (double& v : a) v /= sa;
  for (double& v : b) v /= sb;
}

}  // namespace detail

// One method at one support size. The memory estimate is checked against the
// budget BEFORE anything is allocated, so an oversized cell reports a marker
// instead of taking the process down.
inline BenchResult bench_cell(std::size_t size, BenchMethod method, const BenchOptions& opts) {
  BenchResult res;
  res.support_size = size;
  res.method = method;
  res.repeats = opts.repeats;

  const std::uint64_t overhead = 1 << 20;
  const std::uint64_t estimate =
      method == BenchMethod::sinkhorn
          ? 8 * static_cast<std::uint64_t>(size) * size + 256 * size + overhead
          : 256 * static_cast<std::uint64_t>(size) + overhead;
  if (estimate > opts.memory_budget) {
    res.budget_exceeded = true;
    return res;
  }

  Rng rng = Rng::substream(opts.seed, rng_domain::bench, size);
  std::vector<double> a, b;
  detail::random_pair(size, rng, a, b);

  alloc_stats::rebase_peak();
  const auto before = alloc_stats::snapshot();

  if (method == BenchMethod::tw) {
    const RootedTree tree = random_tree(static_cast<int>(size), opts.seed + size);
    std::vector<double> work(size);
    res.distance_value = tree_wasserstein(tree, a, b, work);
    res.alloc_bytes = alloc_stats::snapshot().bytes - before.bytes;
    detail::time_repeats([&] { tree_wasserstein(tree, a, b, work); }, opts.repeats,
                         opts.min_sample_seconds, res.time_s_median, res.time_s_min);
  } else {
    SinkhornOptions sopts;
    sopts.symmetry = CostSymmetry::symmetric;
    const Matrix cost = uniform_offdiag_cost(size);
    SinkhornSolver solver(cost, sopts);
    res.distance_value = solver.solve(a, b);
    res.alloc_bytes = alloc_stats::snapshot().bytes - before.bytes;
    if (opts.charge_cost_matrix) {
      detail::time_repeats(
          [&] {
            const Matrix c2 = uniform_offdiag_cost(size);
            SinkhornSolver s2(c2, sopts);
            s2.solve(a, b);
          },
          opts.repeats, opts.min_sample_seconds, res.time_s_median, res.time_s_min);
    } else {
      detail::time_repeats([&] { solver.solve(a, b); }, opts.repeats, opts.min_sample_seconds,
                           res.time_s_median, res.time_s_min);
    }
  }

  res.peak_bytes = alloc_stats::snapshot().peak - before.live;
  return res;
}

inline std::vector<BenchResult> run_bench(const BenchOptions& opts) {
  require(!opts.sizes.empty(), Errc::empty_input, "no support sizes given");
  require(opts.repeats >= 1, Errc::invalid_config, "repeats must be >= 1");
  std::vector<BenchResult> out;
  for (std::size_t size : opts.sizes) {
    require(size >= 2, Errc::invalid_config, "support size must be >= 2");
    out.push_back(bench_cell(size, BenchMethod::tw, opts));
    out.push_back(bench_cell(size, BenchMethod::sinkhorn, opts));
  }
  return out;
}

// Least-squares slope of log(median time) against log(L): the empirical
// complexity exponent of one method's completed cells.
inline double scaling_fit(const std::vector<BenchResult>& results, BenchMethod method) {
  std::vector<double> xs, ys;
  for (const auto& r : results) {
    if (r.method != method || r.budget_exceeded) continue;
    xs.push_back(std::log(static_cast<double>(r.support_size)));
    ys.push_back(std::log(r.time_s_median));
  }
  require(xs.size() >= 2, Errc::empty_input, "need at least two completed sizes to fit");
  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline std::string bench_csv(const std::vector<BenchResult>& results) {
  std::string out = "L,method,time_s_median,time_s_min,peak_bytes,alloc_bytes,repeats\n";
  for (const auto& r : results) {
    out += std::to_string(r.support_size);
    out += ",";
    out += bench_method_name(r.method);
    if (r.budget_exceeded) {
      out += ",-,-,-,-," + std::to_string(r.repeats) + "\n";
    } else {
      out += "," + format_double(r.time_s_median) + "," + format_double(r.time_s_min) + "," +
             std::to_string(r.peak_bytes) + "," + std::to_string(r.alloc_bytes) + "," +
             std::to_string(r.repeats) + "\n";
    }
  }
  return out;
}

inline std::string bench_markdown(const std::vector<BenchResult>& results) {
  std::vector<std::size_t> sizes;
  for (const auto& r : results)
    if (std::find(sizes.begin(), sizes.end(), r.support_size) == sizes.end())
      sizes.push_back(r.support_size);

  auto find_cell = [&](std::size_t size, BenchMethod m) -> const BenchResult* {
    for (const auto& r : results)
      if (r.support_size == size && r.method == m) return &r;
    return nullptr;
  };

  auto time_str = [](const BenchResult* r) -> std::string {
    if (!r || r->budget_exceeded) return "-";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", r->time_s_median);
    return buf;
  };
  auto mem_str = [](const BenchResult* r) -> std::string {
    if (!r || r->budget_exceeded) return "-";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f MB",
                  static_cast<double>(std::max(r->peak_bytes, r->alloc_bytes)) / (1024.0 * 1024.0));
    return buf;
  };

  std::string out = "| method | metric |";
  for (std::size_t s : sizes) out += " " + std::to_string(s) + " |";
  out += "\n|---|---|";
  for (std::size_t i = 0; i < sizes.size(); ++i) out += "---|";
  out += "\n";
  for (BenchMethod m : {BenchMethod::tw, BenchMethod::sinkhorn}) {
    out += std::string("| ") + bench_method_name(m) + " | time (s) |";
    for (std::size_t s : sizes) out += " " + time_str(find_cell(s, m)) + " |";
    out += "\n";
    out += std::string("| ") + bench_method_name(m) + " | memory |";
    for (std::size_t s : sizes) out += " " + mem_str(find_cell(s, m)) + " |";
    out += "\n";
  }
  return out;
}

}  // namespace treeot
