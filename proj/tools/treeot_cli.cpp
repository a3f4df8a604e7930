// treeot command-line tool: synthetic data generation, training, evaluation,
// micro-benchmarks, and one-off distance computation on files.
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "treeot/treeot.hpp"

TREEOT_DEFINE_ALLOC_HOOKS

namespace {

using treeot::Errc;
using treeot::TreeotError;
namespace fs = std::filesystem;

int exit_code_for(Errc c) {
  switch (c) {
    case Errc::nonfinite_value:
    case Errc::solver_failure:
      return 4;
    default:
      return 3;
  }
}

std::string iso8601_utc(std::chrono::system_clock::time_point tp) {
  const std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Run manifest: everything needed to reproduce a command's outputs, written
// atomically next to them. The two timestamp fields are the only entries a
// re-run is allowed to change.
class Manifest {
 public:
  explicit Manifest(std::string command) : start_(std::chrono::system_clock::now()) {
    j_["command"] = std::move(command);
    j_["tool_version"] = treeot::version_string;
  }

  void set_config(nlohmann::json cfg) { j_["config"] = std::move(cfg); }

  void add_artifact(const std::string& name, const fs::path& p) {
    j_["artifacts"][name] = p.filename().string();
  }

  void write(const fs::path& dir) {
    j_["started_at"] = iso8601_utc(start_);
    j_["finished_at"] = iso8601_utc(std::chrono::system_clock::now());
    treeot::write_file_atomic(dir / "manifest.json", j_.dump(2) + "\n");
  }

 private:
  nlohmann::json j_;
  std::chrono::system_clock::time_point start_;
};

int env_thread_cap() {
  const char* env = std::getenv("TREEOT_THREADS");
  if (env && *env) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<int>(v);
    } catch (const std::exception&) {
    }
    treeot::fail(Errc::invalid_config, "TREEOT_THREADS must be a positive integer");
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

// Whitespace/newline-separated doubles; '#' starts a comment line.
std::vector<double> read_vector_file(const fs::path& path) {
  const std::string text = treeot::read_file(path);
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (text[pos] == '#') {
      const std::size_t eol = text.find('\n', pos);
      pos = eol == std::string::npos ? text.size() : eol + 1;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(text[pos]))) {
      ++pos;
      continue;
    }
    std::size_t end = pos;
    while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
    out.push_back(treeot::parse_double(std::string_view(text).substr(pos, end - pos)));
    pos = end;
  }
  treeot::require(!out.empty(), Errc::empty_input, "no values in " + path.string());
  return out;
}

// Truth-set file for the ranking metrics: one JSON array of label ids per
// line, aligned with the dataset's samples.
std::vector<std::vector<int>> read_truth_file(const fs::path& path, int label_count) {
  const std::string text = treeot::read_file(path);
  std::vector<std::vector<int>> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    const std::string_view line = std::string_view(text).substr(pos, eol - pos);
    pos = eol + 1;
    if (line.empty()) continue;
    nlohmann::json arr;
    try {
      arr = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      treeot::fail(Errc::io_error, std::string("bad truth line: ") + e.what());
    }
    treeot::require(arr.is_array() && !arr.empty(), Errc::io_error,
                    "each truth line must be a nonempty array of label ids");
    std::vector<int> set;
    for (const auto& v : arr) {
      const int t = v.get<int>();
      treeot::require(t >= 0 && t < label_count, Errc::invalid_node, "truth label out of range");
      for (int prev : set)
        treeot::require(prev != t, Errc::io_error, "duplicate label in truth set");
      set.push_back(t);
    }
    treeot::require(static_cast<int>(set.size()) < label_count, Errc::io_error,
                    "truth set must not cover every label");
    out.push_back(std::move(set));
  }
  return out;
}

// ---------------------------------------------------------------- gen ----

struct GenArgs {
  int nodes = 0;
  int samples = 0;
  int test_samples = -1;  // default: same as samples
  int feature_dim = 16;
  int hidden_dim = 16;
  std::uint64_t seed = 0;
  std::string sign = "as-written";
  std::string out;
};

int cmd_gen(const GenArgs& args) {
  treeot::SynthConfig cfg;
  cfg.num_nodes = args.nodes;
  cfg.num_samples = args.samples;
  cfg.feature_dim = args.feature_dim;
  cfg.hidden_dim = args.hidden_dim;
  cfg.seed = args.seed;
  cfg.sign = treeot::parse_exponent_sign(args.sign);
  cfg.validate();
  const int test_n = args.test_samples >= 0 ? args.test_samples : args.samples;

  const fs::path dir(args.out);
  fs::create_directories(dir);

  Manifest man("gen");
  man.set_config({{"nodes", cfg.num_nodes},
                  {"samples", cfg.num_samples},
                  {"test_samples", test_n},
                  {"feature_dim", cfg.feature_dim},
                  {"hidden_dim", cfg.hidden_dim},
                  {"seed", cfg.seed},
                  {"sign", treeot::exponent_sign_name(cfg.sign)}});

  const treeot::DatasetPair pair = treeot::generate_split(cfg, test_n);
  pair.train.tree.save(dir / "tree.txt");
  treeot::save_dataset(pair.train, cfg, dir / "train.jsonl", "tree.txt");
  treeot::SynthConfig test_cfg = cfg;
  test_cfg.num_samples = test_n;
  treeot::save_dataset(pair.test, test_cfg, dir / "test.jsonl", "tree.txt");

  man.add_artifact("tree", dir / "tree.txt");
  man.add_artifact("train", dir / "train.jsonl");
  man.add_artifact("test", dir / "test.jsonl");
  man.write(dir);

  std::printf("wrote %s (%d nodes, %d train / %d test samples)\n", dir.string().c_str(),
              cfg.num_nodes, cfg.num_samples, test_n);
  return 0;
}

// -------------------------------------------------------------- train ----

struct TrainArgs {
  std::string data;
  double lambda = 0.0;
  std::string reg = "none";
  int epochs = 500;
  int batch = 10;
  double lr = 0.001;
  std::uint64_t seed = 0;
  int sinkhorn_iterations = 10;
  double sinkhorn_reg = 50.0;
  std::string out;
};

treeot::TrainConfig make_train_config(const TrainArgs& args) {
  treeot::TrainConfig cfg;
  cfg.epochs = args.epochs;
  cfg.batch_size = args.batch;
  cfg.learning_rate = args.lr;
  cfg.seed = args.seed;
  cfg.loss.lambda = args.lambda;
  cfg.loss.regularizer_kind = treeot::parse_regularizer_kind(args.reg);
  cfg.loss.sinkhorn_iterations = args.sinkhorn_iterations;
  cfg.loss.sinkhorn_reg = args.sinkhorn_reg;
  cfg.validate();
  return cfg;
}

int cmd_train(const TrainArgs& args) {
  const treeot::TrainConfig cfg = make_train_config(args);
  const fs::path data_dir(args.data);
  const treeot::DatasetFile train_file = treeot::load_dataset(data_dir / "train.jsonl");

  const fs::path dir(args.out);
  fs::create_directories(dir);

  Manifest man("train");
  man.set_config(treeot::train_config_to_json(cfg));

  const treeot::TrainResult res = treeot::train(train_file.dataset, train_file.dataset.tree, cfg);

  treeot::save_model(res.model, dir / "model.ckpt");
  treeot::write_file_atomic(dir / "trace.csv", res.trace.to_csv());
  treeot::save_train_config(cfg, dir / "train_config.json");
  man.add_artifact("model", dir / "model.ckpt");
  man.add_artifact("trace", dir / "trace.csv");
  man.add_artifact("train_config", dir / "train_config.json");
  man.write(dir);

  const double final_loss = res.trace.total.empty() ? 0.0 : res.trace.total.back();
  std::printf("trained %d epochs on %zu samples; final mean loss %s\n", cfg.epochs,
              train_file.dataset.size(), treeot::format_double(final_loss).c_str());
  return 0;
}

// --------------------------------------------------------------- eval ----

struct EvalArgs {
  std::string model;
  std::string data;
  std::string split = "test";
  std::string truth;
  int top_k = 5;
  std::string out;
};

int cmd_eval(const EvalArgs& args) {
  const fs::path model_path(args.model);
  const treeot::LinearSoftmaxModel model = treeot::load_model(model_path);
  const treeot::DatasetFile df = treeot::load_dataset(fs::path(args.data) / (args.split + ".jsonl"));
  const treeot::Dataset& data = df.dataset;

  treeot::MetricReport report = treeot::evaluate(model, data, data.tree);

  if (!args.truth.empty()) {
    const auto truth = read_truth_file(args.truth, data.tree.node_count());
    treeot::require(truth.size() == data.size(), Errc::length_mismatch,
                    "truth line count != sample count");
    std::vector<double> recall, topk, auc;
    std::vector<double> logits(model.label_count()), pred(model.label_count());
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(data.tree.node_count()));
    for (std::size_t i = 0; i < data.size(); ++i) {
      model.logits(data.features.row(i), logits);
      treeot::softmax(logits, pred);
      recall.push_back(treeot::pseudo_recall(pred, truth[i]));
      topk.push_back(treeot::top_k_cost(data.tree, pred, truth[i], args.top_k));
      std::fill(mask.begin(), mask.end(), std::uint8_t{0});
      for (int t : truth[i]) mask[static_cast<std::size_t>(t)] = 1;
      const auto a = treeot::roc_auc(pred, mask);
      treeot::require(a.has_value(), Errc::invalid_config, "roc_auc undefined for truth set");
      auc.push_back(*a);
    }
    report.add("pseudo_recall", std::move(recall));
    report.add("top_k_cost", std::move(topk));
    report.add("roc_auc", std::move(auc));
  }

  const fs::path dir = args.out.empty()
                           ? (model_path.has_parent_path() ? model_path.parent_path() : fs::path("."))
                           : fs::path(args.out);
  fs::create_directories(dir);

  Manifest man("eval");
  man.set_config({{"model", args.model},
                  {"data", args.data},
                  {"split", args.split},
                  {"truth", args.truth},
                  {"top_k", args.top_k}});
  const fs::path json_path = dir / ("report_" + args.split + ".json");
  const fs::path csv_path = dir / ("report_" + args.split + ".csv");
  treeot::write_file_atomic(json_path, report.to_json() + "\n");
  treeot::write_file_atomic(csv_path, report.to_csv());
  man.add_artifact("report_json", json_path);
  man.add_artifact("report_csv", csv_path);
  man.write(dir);

  std::printf("%s\n", report.to_json().c_str());
  return 0;
}

// -------------------------------------------------------------- bench ----

struct BenchArgs {
  std::vector<std::size_t> sizes = {100, 1000, 10000};
  int repeats = 3;
  std::uint64_t seed = 0;
  bool charge_cost_matrix = false;
  std::uint64_t memory_budget = std::uint64_t{4} << 30;
  std::string out;
};

int cmd_bench(const BenchArgs& args) {
  treeot::BenchOptions opts;
  opts.sizes = args.sizes;
  opts.repeats = args.repeats;
  opts.seed = args.seed;
  opts.charge_cost_matrix = args.charge_cost_matrix;
  opts.memory_budget = args.memory_budget;

  const std::vector<treeot::BenchResult> results = treeot::run_bench(opts);
  const std::string csv = treeot::bench_csv(results);
  const std::string md = treeot::bench_markdown(results);

  if (!args.out.empty()) {
    const fs::path dir(args.out);
    fs::create_directories(dir);
    Manifest man("bench");
    nlohmann::json sizes_json = nlohmann::json::array();
    for (auto s : args.sizes) sizes_json.push_back(s);
    man.set_config({{"sizes", sizes_json},
                    {"repeats", args.repeats},
                    {"seed", args.seed},
                    {"charge_cost_matrix", args.charge_cost_matrix},
                    {"memory_budget", args.memory_budget}});
    treeot::write_file_atomic(dir / "bench.csv", csv);
    treeot::write_file_atomic(dir / "bench.md", md);
    man.add_artifact("csv", dir / "bench.csv");
    man.add_artifact("markdown", dir / "bench.md");
    man.write(dir);
  }

  std::fputs(md.c_str(), stdout);
  return 0;
}

// --------------------------------------------------------------- dist ----

struct DistArgs {
  std::string tree;
  std::string mu;
  std::string nu;
  std::string method = "tw";
  int iterations = 10;
  double reg = 50.0;
};

int cmd_dist(const DistArgs& args) {
  const treeot::RootedTree tree = treeot::RootedTree::load(args.tree);
  const treeot::ProbVector mu(read_vector_file(args.mu));
  const treeot::ProbVector nu(read_vector_file(args.nu));
  treeot::require(static_cast<int>(mu.size()) == tree.node_count() && mu.size() == nu.size(),
                  Errc::length_mismatch, "distribution length != tree node count");

  double value = 0.0;
  if (args.method == "tw") {
    value = treeot::tree_wasserstein(tree, mu, nu);
  } else if (args.method == "exact") {
    value = treeot::exact_wasserstein(tree, mu, nu).cost;
  } else if (args.method == "sinkhorn") {
    value = treeot::sinkhorn_wasserstein(tree.distance_matrix(), mu, nu, args.iterations, args.reg);
  } else {
    treeot::fail(Errc::invalid_config, "unknown method '" + args.method + "'");
  }
  std::printf("%.12g\n", value);
  return 0;
}

// -------------------------------------------------------------- repro ----

struct ReproArgs {
  int nodes = 100;
  int train_samples = 500;
  int test_samples = 500;
  int epochs = 100;
  int seeds = 5;
  std::uint64_t base_seed = 0;
  int batch = 10;
  double lr = 0.001;
  std::string sign = "negated";
  std::string out;
};

struct ReproArm {
  const char* label;
  treeot::RegularizerKind kind;
  double lambda;
};

constexpr ReproArm kReproArms[] = {
    {"KL", treeot::RegularizerKind::none, 0.0},
    {"KL + 1/2 W1", treeot::RegularizerKind::sinkhorn, 0.5},
    {"KL + W1", treeot::RegularizerKind::sinkhorn, 1.0},
    {"KL + 1/2 TW", treeot::RegularizerKind::tree_wasserstein, 0.5},
    {"KL + TW", treeot::RegularizerKind::tree_wasserstein, 1.0},
};

// One (config, seed) cell: generate, train, evaluate; returns the seven
// test-set metric means in report order.
std::vector<double> repro_cell(const ReproArgs& args, const ReproArm& arm,
                               std::uint64_t seed) {
  treeot::SynthConfig gen_cfg;
  gen_cfg.num_nodes = args.nodes;
  gen_cfg.num_samples = args.train_samples;
  gen_cfg.seed = seed;
  gen_cfg.sign = treeot::parse_exponent_sign(args.sign);
  const treeot::DatasetPair pair = treeot::generate_split(gen_cfg, args.test_samples);

  treeot::TrainConfig cfg;
  cfg.epochs = args.epochs;
  cfg.batch_size = args.batch;
  cfg.learning_rate = args.lr;
  cfg.seed = seed;
  cfg.loss.lambda = arm.lambda;
  cfg.loss.regularizer_kind = arm.kind;

  const treeot::TrainResult res = treeot::train(pair.train, pair.train.tree, cfg);
  const treeot::MetricReport report = treeot::evaluate(res.model, pair.test, pair.test.tree);
  std::vector<double> means;
  for (const auto& s : report.series()) means.push_back(s.mean());
  return means;
}

int cmd_repro(const ReproArgs& args) {
  treeot::require(args.seeds >= 1, Errc::invalid_config, "need at least one seed");
  const fs::path dir(args.out);
  fs::create_directories(dir);

  Manifest man("repro");
  man.set_config({{"nodes", args.nodes},
                  {"train_samples", args.train_samples},
                  {"test_samples", args.test_samples},
                  {"epochs", args.epochs},
                  {"seeds", args.seeds},
                  {"base_seed", args.base_seed},
                  {"batch", args.batch},
                  {"lr", args.lr},
                  {"sign", args.sign}});

  constexpr int n_cfg = static_cast<int>(std::size(kReproArms));
  const int cells = n_cfg * args.seeds;
  std::vector<std::vector<double>> cell_means(static_cast<std::size_t>(cells));

  // Independent cells, deterministic per cell, so any schedule yields the
  // same table. TREEOT_THREADS caps the worker count.
  const int workers = std::min(env_thread_cap(), cells);
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const int cell = next.fetch_add(1);
      if (cell >= cells || failed.load()) return;
      const int c = cell / args.seeds;
      const int s = cell % args.seeds;
      try {
        cell_means[static_cast<std::size_t>(cell)] =
            repro_cell(args, kReproArms[c], args.base_seed + static_cast<std::uint64_t>(s));
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!failed.exchange(true)) first_error = e.what();
        return;
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failed.load()) treeot::fail(Errc::solver_failure, "repro cell failed: " + first_error);

  const char* metric_names[7] = {"canberra", "chebyshev", "clark",      "cosine",
                                 "intersection", "kl",    "wasserstein"};

  // Per config: mean and sample std across seeds for each metric.
  nlohmann::json summary;
  std::string md = "| loss |";
  for (const char* m : metric_names) md += std::string(" ") + m + " |";
  md += "\n|---|";
  for (int m = 0; m < 7; ++m) md += "---|";
  md += "\n";
  for (int c = 0; c < n_cfg; ++c) {
    md += std::string("| ") + kReproArms[c].label + " |";
    for (int m = 0; m < 7; ++m) {
      treeot::MetricSeries series;
      for (int s = 0; s < args.seeds; ++s)
        series.values.push_back(cell_means[static_cast<std::size_t>(c * args.seeds + s)]
                                          [static_cast<std::size_t>(m)]);
      const double mean = series.mean();
      const double sd = series.stddev();
      char buf[64];
      std::snprintf(buf, sizeof(buf), " %.3f ± %.3f |", mean, sd);
      md += buf;
      summary[kReproArms[c].label][metric_names[m]] = {{"mean", mean}, {"std", sd}};
    }
    md += "\n";
  }

  treeot::write_file_atomic(dir / "repro.md", md);
  treeot::write_file_atomic(dir / "repro.json", summary.dump(2) + "\n");
  man.add_artifact("markdown", dir / "repro.md");
  man.add_artifact("json", dir / "repro.json");
  man.write(dir);

  std::fputs(md.c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optimal transport on tree metrics: data generation, training, evaluation, benchmarks"};
  app.require_subcommand(1);
  int rc = 0;

  GenArgs gen;
  CLI::App* sgen = app.add_subcommand("gen", "generate a synthetic dataset");
  sgen->add_option("--nodes", gen.nodes, "number of tree nodes (labels)")
      ->required()
      ->check(CLI::PositiveNumber);
  sgen->add_option("--samples", gen.samples, "number of training samples")
      ->required()
      ->check(CLI::PositiveNumber);
  sgen->add_option("--test-samples", gen.test_samples, "test samples (default: same as --samples)")
      ->check(CLI::NonNegativeNumber);
  sgen->add_option("--feature-dim", gen.feature_dim, "feature dimension n")->check(CLI::PositiveNumber);
  sgen->add_option("--hidden-dim", gen.hidden_dim, "hidden dimension m")->check(CLI::PositiveNumber);
  sgen->add_option("--seed", gen.seed, "random seed");
  sgen->add_option("--sign", gen.sign, "exponent sign: as-written | negated")
      ->check(CLI::IsMember({"as-written", "as_written_positive", "negated"}));
  sgen->add_option("--out", gen.out, "output directory")->required();
  sgen->callback([&] { rc = cmd_gen(gen); });

  TrainArgs train;
  CLI::App* strain = app.add_subcommand("train", "train the linear softmax model");
  strain->add_option("--data", train.data, "dataset directory (from gen)")->required();
  strain->add_option("--lambda", train.lambda, "regularization strength")
      ->check(CLI::NonNegativeNumber);
  strain->add_option("--reg", train.reg, "regularizer: tw | sinkhorn | none")
      ->check(CLI::IsMember({"tw", "tree_wasserstein", "sinkhorn", "none"}));
  strain->add_option("--epochs", train.epochs, "training epochs")->check(CLI::NonNegativeNumber);
  strain->add_option("--batch", train.batch, "minibatch size")->check(CLI::PositiveNumber);
  strain->add_option("--lr", train.lr, "learning rate")->check(CLI::PositiveNumber);
  strain->add_option("--seed", train.seed, "random seed");
  strain->add_option("--sinkhorn-iterations", train.sinkhorn_iterations,
                     "iterations for the sinkhorn regularizer")
      ->check(CLI::PositiveNumber);
  strain->add_option("--sinkhorn-reg", train.sinkhorn_reg, "sinkhorn regularization strength")
      ->check(CLI::PositiveNumber);
  strain->add_option("--out", train.out, "output directory")->required();
  strain->callback([&] { rc = cmd_train(train); });

  EvalArgs eval;
  CLI::App* seval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset split");
  seval->add_option("--model", eval.model, "model checkpoint path")->required();
  seval->add_option("--data", eval.data, "dataset directory (from gen)")->required();
  seval->add_option("--split", eval.split, "split to evaluate: test | train")
      ->check(CLI::IsMember({"test", "train"}));
  seval->add_option("--truth", eval.truth, "optional truth-set file enabling ranking metrics");
  seval->add_option("--top-k", eval.top_k, "k for the top-k cost ranking metric")
      ->check(CLI::PositiveNumber);
  seval->add_option("--out", eval.out, "report directory (default: checkpoint directory)");
  seval->callback([&] { rc = cmd_eval(eval); });

  BenchArgs bench;
  CLI::App* sbench = app.add_subcommand("bench", "time/memory benchmark over support sizes");
  sbench->add_option("--sizes", bench.sizes, "support sizes")->delimiter(',')->expected(-1);
  sbench->add_option("--repeats", bench.repeats, "timing repeats per cell")->check(CLI::PositiveNumber);
  sbench->add_option("--seed", bench.seed, "random seed");
  sbench->add_flag("--charge-cost-matrix", bench.charge_cost_matrix,
                   "include cost-matrix construction in the timed region");
  sbench->add_option("--memory-budget", bench.memory_budget, "memory budget in bytes");
  sbench->add_option("--out", bench.out, "optional output directory for CSV/Markdown");
  sbench->callback([&] { rc = cmd_bench(bench); });

  DistArgs dist;
  CLI::App* sdist = app.add_subcommand("dist", "distance between two distributions on a tree");
  sdist->add_option("--tree", dist.tree, "tree file")->required();
  sdist->add_option("--mu", dist.mu, "first distribution file")->required();
  sdist->add_option("--nu", dist.nu, "second distribution file")->required();
  sdist->add_option("--method", dist.method, "tw | sinkhorn | exact")
      ->check(CLI::IsMember({"tw", "sinkhorn", "exact"}));
  sdist->add_option("--iterations", dist.iterations, "sinkhorn iterations")
      ->check(CLI::PositiveNumber);
  sdist->add_option("--reg", dist.reg, "sinkhorn regularization strength")->check(CLI::PositiveNumber);
  sdist->callback([&] { rc = cmd_dist(dist); });

  ReproArgs repro;
  CLI::App* srepro = app.add_subcommand(
      "repro", "run the 5-configuration x N-seed training sweep and summarize");
  srepro->add_option("--nodes", repro.nodes, "tree nodes")->check(CLI::PositiveNumber);
  srepro->add_option("--train-samples", repro.train_samples, "train samples per seed")
      ->check(CLI::PositiveNumber);
  srepro->add_option("--test-samples", repro.test_samples, "test samples per seed")
      ->check(CLI::PositiveNumber);
  srepro->add_option("--epochs", repro.epochs, "epochs per cell")->check(CLI::NonNegativeNumber);
  srepro->add_option("--seeds", repro.seeds, "number of seeds")->check(CLI::PositiveNumber);
  srepro->add_option("--base-seed", repro.base_seed, "first seed value");
  srepro->add_option("--batch", repro.batch, "minibatch size")->check(CLI::PositiveNumber);
  srepro->add_option("--lr", repro.lr, "learning rate")->check(CLI::PositiveNumber);
  srepro->add_option("--sign", repro.sign, "exponent sign for datagen")
      ->check(CLI::IsMember({"as-written", "as_written_positive", "negated"}));
  srepro->add_option("--out", repro.out, "output directory")->required();
  srepro->callback([&] { rc = cmd_repro(repro); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const TreeotError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return rc;
}
