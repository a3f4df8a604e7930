#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <string>

#include "support/helpers.hpp"
#include "treeot/datagen.hpp"

using namespace treeot;
namespace fs = std::filesystem;

TEST_CASE("random trees: valid, rooted at 0, unit weights, deterministic") {
  for (int l : {1, 2, 3, 5, 17, 100}) {
    const RootedTree t = random_tree(l, 42);
    CHECK(t.node_count() == l);
    CHECK(t.root() == 0);
    for (int v = 1; v < l; ++v) CHECK(t.edge_weight(v) == 1.0);
  }
  CHECK(random_tree(50, 7).to_text() == random_tree(50, 7).to_text());
  CHECK(random_tree(50, 7).to_text() != random_tree(50, 8).to_text());
  CHECK_THROWS_AS(random_tree(0, 1), TreeotError);
}

TEST_CASE("random trees cover many shapes") {
  // On 4 nodes both stars and paths exist; across seeds we should see
  // several distinct labeled trees (a uniform sampler gives 16).
  std::set<std::string> shapes;
  for (std::uint64_t seed = 0; seed < 64; ++seed) shapes.insert(random_tree(4, seed).to_text());
  CHECK(shapes.size() >= 8);

  // Depth statistics distinguish paths from stars; a sampler stuck on one
  // topology would fail one of these.
  bool saw_deep = false, saw_shallow = false;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const RootedTree t = random_tree(8, seed);
    int max_depth = 0;
    for (int v = 0; v < 8; ++v) max_depth = std::max(max_depth, t.depth(v));
    if (max_depth >= 4) saw_deep = true;
    if (max_depth <= 3) saw_shallow = true;
  }
  CHECK(saw_deep);
  CHECK(saw_shallow);
}

TEST_CASE("target construction: bimodal scores around the two picked nodes") {
  const RootedTree t = random_tree(30, 5);
  const int v = 7, u = 23;
  const ProbVector p = f_dist(t, v, u, 1.0, ExponentSign::negated);
  REQUIRE(p.size() == 30);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += p[i];
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

  // With the negated exponent, scores decay with distance, so v and u are
  // local maxima of the target.
  const std::vector<double> dv = t.distances_from(v);
  for (int i = 0; i < 30; ++i)
    if (i != v && i != u) CHECK(p[static_cast<std::size_t>(v)] >= p[static_cast<std::size_t>(i)]);

  // Positive sign flips the shape: mass concentrates far from v and u.
  const ProbVector q = f_dist(t, v, u, 1.0, ExponentSign::as_written_positive);
  int far_node = 0;
  double far_dist = -1.0;
  for (int i = 0; i < 30; ++i)
    if (dv[static_cast<std::size_t>(i)] > far_dist) {
      far_dist = dv[static_cast<std::size_t>(i)];
      far_node = i;
    }
  CHECK(q[static_cast<std::size_t>(far_node)] > q[static_cast<std::size_t>(v)]);

  CHECK_THROWS_AS(f_dist(t, v, u, 0.0, ExponentSign::negated), TreeotError);
  CHECK_THROWS_AS(f_dist(t, v, u, -1.0, ExponentSign::negated), TreeotError);
}

TEST_CASE("tiny sigma concentrates the target on the picked nodes") {
  const RootedTree t = random_tree(12, 9);
  const ProbVector p = f_dist(t, 3, 8, 0.05, ExponentSign::negated);
  CHECK(p[3] + p[8] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("generation is deterministic and order-independent per sample") {
  SynthConfig cfg;
  cfg.num_nodes = 20;
  cfg.num_samples = 12;
  cfg.feature_dim = 6;
  cfg.hidden_dim = 5;
  cfg.seed = 31;
  cfg.sign = ExponentSign::negated;

  const Dataset d1 = generate(cfg);
  const Dataset d2 = generate(cfg);
  REQUIRE(d1.size() == 12);
  for (std::size_t i = 0; i < d1.features.data().size(); ++i)
    CHECK(d1.features.data()[i] == d2.features.data()[i]);
  for (std::size_t i = 0; i < d1.targets.data().size(); ++i)
    CHECK(d1.targets.data()[i] == d2.targets.data()[i]);

  // Sample i doesn't depend on how many samples are generated.
  SynthConfig longer = cfg;
  longer.num_samples = 25;
  const Dataset d3 = generate(longer);
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < d1.targets.cols(); ++j)
      CHECK(d1.targets.at(i, j) == d3.targets.at(i, j));

  // Every target row is a probability vector; features are standard-normal-ish.
  for (std::size_t i = 0; i < d3.size(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < d3.targets.cols(); ++j) {
      const double t = d3.targets.at(i, j);
      CHECK(t >= 0.0);
      sum += t;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
  double mean = 0.0;
  for (double x : d3.features.data()) mean += x;
  mean /= static_cast<double>(d3.features.data().size());
  CHECK(std::abs(mean) < 0.5);
}

TEST_CASE("train/test split: shared tree, disjoint streams, stable test set") {
  SynthConfig cfg;
  cfg.num_nodes = 15;
  cfg.num_samples = 10;
  cfg.feature_dim = 4;
  cfg.hidden_dim = 4;
  cfg.seed = 77;

  const DatasetPair p1 = generate_split(cfg, 6);
  CHECK(p1.train.size() == 10);
  CHECK(p1.test.size() == 6);
  CHECK(p1.train.tree.to_text() == p1.test.tree.to_text());

  // Test data is independent of the train size.
  SynthConfig cfg2 = cfg;
  cfg2.num_samples = 3;
  const DatasetPair p2 = generate_split(cfg2, 6);
  for (std::size_t i = 0; i < p1.test.features.data().size(); ++i)
    CHECK(p1.test.features.data()[i] == p2.test.features.data()[i]);

  // Train and test streams differ.
  bool same = true;
  for (std::size_t j = 0; j < p1.train.features.cols() && same; ++j)
    same = p1.train.features.at(0, j) == p1.test.features.at(0, j);
  CHECK_FALSE(same);
}

TEST_CASE("dataset files round trip bit-exactly") {
  SynthConfig cfg;
  cfg.num_nodes = 9;
  cfg.num_samples = 7;
  cfg.feature_dim = 3;
  cfg.hidden_dim = 4;
  cfg.seed = 123;
  cfg.sign = ExponentSign::negated;
  const Dataset d = generate(cfg);

  const fs::path dir = fs::temp_directory_path() / "treeot_datagen_test";
  fs::create_directories(dir);
  d.tree.save(dir / "tree.txt");
  save_dataset(d, cfg, dir / "data.jsonl", "tree.txt");

  const DatasetFile loaded = load_dataset(dir / "data.jsonl");
  CHECK(loaded.config.num_nodes == 9);
  CHECK(loaded.config.seed == 123);
  CHECK(loaded.config.sign == ExponentSign::negated);
  CHECK(loaded.tree_file == "tree.txt");
  CHECK(loaded.dataset.tree.to_text() == d.tree.to_text());
  for (std::size_t i = 0; i < d.features.data().size(); ++i)
    CHECK(loaded.dataset.features.data()[i] == d.features.data()[i]);
  for (std::size_t i = 0; i < d.targets.data().size(); ++i)
    CHECK(loaded.dataset.targets.data()[i] == d.targets.data()[i]);

  // Saving the loaded dataset again yields the identical byte stream.
  save_dataset(loaded.dataset, cfg, dir / "data2.jsonl", "tree.txt");
  CHECK(read_file(dir / "data.jsonl") == read_file(dir / "data2.jsonl"));
  fs::remove_all(dir);
}

TEST_CASE("dataset loader rejects malformed files") {
  const fs::path dir = fs::temp_directory_path() / "treeot_datagen_bad";
  fs::create_directories(dir);
  const RootedTree t = random_tree(3, 1);
  t.save(dir / "tree.txt");

  auto write_and_load = [&](const std::string& content) {
    write_file_atomic(dir / "bad.jsonl", content);
    return load_dataset(dir / "bad.jsonl");
  };

  const std::string header =
      R"({"version":1,"N":1,"n":2,"l":3,"seed":0,"sign":"negated","tree_file":"tree.txt"})";
  CHECK_NOTHROW(write_and_load(header + "\n" + R"({"x":[0.1,0.2],"p":[0.5,0.25,0.25]})" + "\n"));

  CHECK_THROWS_AS(write_and_load(""), TreeotError);  // empty
  CHECK_THROWS_AS(write_and_load(R"({"version":2,"N":0,"n":2,"l":3,"seed":0,"sign":"negated","tree_file":"tree.txt"})"
                                 "\n"),
                  TreeotError);                      // wrong version
  CHECK_THROWS_AS(write_and_load(header + "\n"), TreeotError);  // truncated
  CHECK_THROWS_AS(write_and_load(header + "\n" + R"({"x":[0.1,0.2],"p":[0.9,0.25,0.25]})" + "\n"),
                  TreeotError);                      // row sum != 1
  CHECK_THROWS_AS(write_and_load(header + "\n" + R"({"x":[0.1,0.2],"p":[-0.5,0.75,0.75]})" + "\n"),
                  TreeotError);                      // negative mass
  CHECK_THROWS_AS(write_and_load(header + "\n" + R"({"x":[0.1],"p":[0.5,0.25,0.25]})" + "\n"),
                  TreeotError);                      // wrong feature dim
  CHECK_THROWS_AS(write_and_load("not json\n"), TreeotError);
  fs::remove_all(dir);
}

TEST_CASE("config validation") {
  SynthConfig cfg;
  cfg.num_nodes = 1;  // needs at least two labels
  CHECK_THROWS_AS(cfg.validate(), TreeotError);
  cfg.num_nodes = 2;
  cfg.feature_dim = 0;
  CHECK_THROWS_AS(cfg.validate(), TreeotError);
  CHECK_THROWS_AS(parse_exponent_sign("sideways"), TreeotError);
  CHECK(parse_exponent_sign("as-written") == ExponentSign::as_written_positive);
  CHECK(parse_exponent_sign("negated") == ExponentSign::negated);
}
