#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numeric>
#include <filesystem>
#include <fstream>
#include <set>

#include "graphdec/graph.hpp"

using namespace graphdec;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& tag) {
  const auto dir = fs::temp_directory_path() / ("graphdec_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void put(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  out << text;
}

fs::path two_graph_fixture(const std::string& tag) {
  const auto dir = scratch_dir(tag);
  put(dir / "FIX_A.txt", "1, 2\n2, 1\n2, 3\n4, 5\n");
  put(dir / "FIX_graph_indicator.txt", "1\n1\n1\n2\n2\n");
  put(dir / "FIX_graph_labels.txt", "1\n-1\n");
  return dir;
}

bool valid_one_hot(const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    int ones = 0;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (m(r, c) == 1.0) ++ones;
      else if (m(r, c) != 0.0) return false;
    }
    if (ones != 1) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("TU loader parses the two-graph fixture") {
  const auto dir = two_graph_fixture("fixture");
  const auto ds = load_tu_dataset(dir, "FIX");
  REQUIRE(ds.graphs.size() == 2);
  CHECK(ds.graphs[0].node_count == 3);
  CHECK(ds.graphs[1].node_count == 2);
  // -1 -> 0, 1 -> 1
  CHECK(ds.graphs[0].label == 1);
  CHECK(ds.graphs[1].label == 0);
  CHECK(ds.class_count == 2);
  // (1,2) and (2,1) collapse into one edge
  CHECK(ds.graphs[0].edges == std::vector<Edge>{{0, 1}, {1, 2}});
  CHECK(ds.graphs[1].edges == std::vector<Edge>{{0, 1}});
  // degree one-hot fallback
  CHECK(ds.feature_dim() == 11);
  CHECK(valid_one_hot(ds.graphs[0].features));
  CHECK(ds.graphs[0].features(1, 2) == 1.0);
}

TEST_CASE("TU loader treats an empty node-label file as absent") {
  const auto dir = two_graph_fixture("empty_labels");
  put(dir / "FIX_node_labels.txt", "");
  const auto ds = load_tu_dataset(dir, "FIX", TuLoadOptions{4});
  CHECK(ds.feature_dim() == 5);
}

TEST_CASE("TU loader one-hot encodes node labels") {
  const auto dir = two_graph_fixture("node_labels");
  put(dir / "FIX_node_labels.txt", "7\n3\n3\n7\n9\n");
  const auto ds = load_tu_dataset(dir, "FIX");
  CHECK(ds.feature_dim() == 3);
  CHECK(ds.graphs[0].features(0, 1) == 1.0);  // 7 is the second distinct value
  CHECK(ds.graphs[1].features(1, 2) == 1.0);
}

TEST_CASE("TU loader errors carry line numbers") {
  SUBCASE("dangling reference") {
    const auto dir = two_graph_fixture("dangling");
    put(dir / "FIX_A.txt", "1, 2\n2, 9\n");
    CHECK_THROWS_WITH_AS(load_tu_dataset(dir, "FIX"), doctest::Contains("FIX_A.txt:2"), LoadError);
  }
  SUBCASE("non-contiguous indicator") {
    const auto dir = two_graph_fixture("gap");
    put(dir / "FIX_graph_indicator.txt", "1\n1\n1\n3\n3\n");
    CHECK_THROWS_WITH_AS(load_tu_dataset(dir, "FIX"), doctest::Contains("graph_indicator.txt:4"),
                         LoadError);
  }
  SUBCASE("unparseable line") {
    const auto dir = two_graph_fixture("garbage");
    put(dir / "FIX_graph_labels.txt", "1\nabc\n");
    CHECK_THROWS_WITH_AS(load_tu_dataset(dir, "FIX"), doctest::Contains("graph_labels.txt:2"),
                         LoadError);
  }
  SUBCASE("missing file") {
    const auto dir = scratch_dir("missing");
    CHECK_THROWS_AS(load_tu_dataset(dir, "FIX"), LoadError);
  }
}

TEST_CASE("TU round trip preserves structure and labels") {
  std::vector<int> atoms;
  MoleculeSpec spec;
  spec.negative_count = 12;
  spec.positive_count = 9;
  spec.seed = 4;
  const auto ds = generate_molecule_like(spec, &atoms);
  const auto dir = scratch_dir("roundtrip");
  write_tu_dataset(ds, dir, "MOL", &atoms);
  const auto back = load_tu_dataset(dir, "MOL");
  REQUIRE(back.graphs.size() == ds.graphs.size());
  for (std::size_t i = 0; i < ds.graphs.size(); ++i) {
    CHECK(back.graphs[i].node_count == ds.graphs[i].node_count);
    CHECK(back.graphs[i].edges == ds.graphs[i].edges);
    CHECK(back.graphs[i].label == ds.graphs[i].label);
  }
  CHECK(dataset_fingerprint(back) == dataset_fingerprint(ds));

  // LF endings, no blank trailing line
  std::ifstream in(dir / "MOL_A.txt", std::ios::binary);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(text.find('\r') == std::string::npos);
  CHECK(text.substr(text.size() - 2) != "\n\n");
}

TEST_CASE("synthetic imbalanced generator") {
  SyntheticSpec spec;
  spec.seed = 11;
  const auto ds = generate_synthetic_imbalanced(spec);
  CHECK(ds.graphs.size() == 100);
  std::vector<int> all(100);
  std::iota(all.begin(), all.end(), 0);
  CHECK(class_counts(ds, all) == std::vector<int>{90, 10});
  for (const auto& g : ds.graphs) CHECK(valid_one_hot(g.features));

  const auto again = generate_synthetic_imbalanced(spec);
  for (std::size_t i = 0; i < ds.graphs.size(); ++i) CHECK(again.graphs[i].edges == ds.graphs[i].edges);

  spec.noise_edge_prob = 0.0;
  const auto exact = generate_synthetic_imbalanced(spec);
  for (const auto& g : exact.graphs) {
    const auto deg = node_degrees(g);
    if (g.label == 0) {
      for (int d : deg) CHECK(d == 2);
    } else {
      CHECK(*std::max_element(deg.begin(), deg.end()) == g.node_count - 1);
    }
  }

  spec.min_nodes = 2;
  CHECK_THROWS_AS(generate_synthetic_imbalanced(spec), ContractViolation);
}

TEST_CASE("imbalanced split") {
  MoleculeSpec spec;
  const auto ds = generate_molecule_like(spec);
  const int minority = minority_class(ds);
  CHECK(minority == 0);
  const auto s = make_imbalanced_split(ds, SplitSpec::binary(minority, 5, 45, 0.25, 1));
  CHECK(class_counts(ds, s.train) == std::vector<int>{5, 45});
  const auto again = make_imbalanced_split(ds, SplitSpec::binary(minority, 5, 45, 0.25, 1));
  CHECK(again.train == s.train);
  CHECK(again.test == s.test);
  const std::size_t remainder = ds.graphs.size() - 50;
  CHECK(s.validation.size() == static_cast<std::size_t>(std::llround(0.25 * remainder)));
  CHECK_THROWS_WITH_AS(make_imbalanced_split(ds, SplitSpec::binary(minority, 70, 45, 0.25, 1)),
                       doctest::Contains("class 0"), ContractViolation);

  SyntheticSpec bal;
  bal.class0_count = 50;
  bal.class1_count = 50;
  const auto bds = generate_synthetic_imbalanced(bal);
  std::vector<int> all(100);
  std::iota(all.begin(), all.end(), 0);
  CHECK(class_counts(bds, all) == std::vector<int>{50, 50});
  CHECK(class_counts(bds, {}) == std::vector<int>{0, 0});
  const auto sym = make_imbalanced_split(bds, SplitSpec::binary(0, 10, 10, 0.25, 3));
  CHECK(class_counts(bds, sym.train) == std::vector<int>{10, 10});
}

TEST_CASE("split invariants over random specs") {
  MoleculeSpec spec;
  const auto ds = generate_molecule_like(spec);
  RngStream rng(77, "test");
  for (int trial = 0; trial < 100; ++trial) {
    const int a = 1 + static_cast<int>(rng.uniform_int(60));
    const int b = 1 + static_cast<int>(rng.uniform_int(120));
    const double vf = rng.uniform();
    const auto s = make_imbalanced_split(ds, SplitSpec::binary(0, a, b, vf, rng.next_u64()));
    CHECK(class_counts(ds, s.train) == std::vector<int>{a, b});
    std::set<int> seen;
    for (const auto* part : {&s.train, &s.validation, &s.test})
      for (int id : *part) CHECK(seen.insert(id).second);
    CHECK(seen.size() == ds.graphs.size());
  }
}

TEST_CASE("long-tail node split") {
  NodeDatasetSpec spec;
  const auto ds = generate_node_dataset(spec);
  CHECK(ds.task == TaskKind::node);
  CHECK(ds.graphs.size() == 1);
  CHECK(longtail_counts(ds, 10.0, 20) == std::vector<int>{20, 6, 2});
  CHECK(longtail_counts(ds, 1.0, 20) == std::vector<int>{20, 20, 20});
  for (int c : longtail_counts(ds, 1000.0, 3)) CHECK(c >= 1);
  const auto s = make_longtail_node_split(ds, 10.0, 20, 0.25, 5);
  CHECK(class_counts(ds, s.train) == std::vector<int>{20, 6, 2});
  CHECK_THROWS_AS(make_longtail_node_split(ds, 10.0, 500, 0.25, 5), ContractViolation);
}
