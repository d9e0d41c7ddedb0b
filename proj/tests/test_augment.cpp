#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "graphdec/augment.hpp"
#include "test_support.hpp"

using namespace graphdec;

TEST_CASE("node drop removes floor(ratio n) nodes") {
  RngStream rng(1, "augment");
  const Graph g = testing::random_graph(rng, 12, 3);
  const View v = node_drop_view(g, 0.25, rng);
  CHECK(v.graph.node_count == 9);
  v.graph.validate();
  int kept = 0;
  int last = -1;
  for (int old = 0; old < g.node_count; ++old) {
    const int now = v.node_map[old];
    if (now < 0) continue;
    ++kept;
    CHECK(now > last);
    last = now;
    CHECK(v.graph.features.row(now) == g.features.row(old));
  }
  CHECK(kept == 9);
  // edges of the view exist in the original under the inverse map
  std::vector<int> back(v.graph.node_count);
  for (int old = 0; old < g.node_count; ++old)
    if (v.node_map[old] >= 0) back[v.node_map[old]] = old;
  for (auto [a, b] : v.graph.edges) {
    const Edge e{std::min(back[a], back[b]), std::max(back[a], back[b])};
    CHECK(std::find(g.edges.begin(), g.edges.end(), e) != g.edges.end());
  }
}

TEST_CASE("node drop keeps at least one node") {
  RngStream rng(2, "augment");
  const Graph g = testing::random_graph(rng, 3, 2);
  CHECK(node_drop(g, 0.99, rng).node_count == 1);
  const Graph single = make_graph(1, {}, Matrix::Ones(1, 2));
  CHECK(node_drop(single, 0.5, rng).node_count == 1);
}

TEST_CASE("edge drop") {
  RngStream rng(3, "augment");
  const Graph g = testing::random_graph(rng, 10, 2);
  const auto e = g.edges.size();
  const Graph d = edge_drop(g, 0.25, rng);
  CHECK(d.edges.size() == e - static_cast<std::size_t>(std::floor(0.25 * e)));
  CHECK(d.node_count == g.node_count);
  CHECK(edge_drop(g, 0.0, rng).edges == g.edges);
}

TEST_CASE("views are deterministic per stream") {
  RngStream rng(4, "augment");
  const Graph g = testing::random_graph(rng, 10, 2);
  AugmentSpec spec;
  RngStream a = RngStream(9, "augment").substream(1, 2);
  RngStream b = RngStream(9, "augment").substream(1, 2);
  const auto va = make_views(g, spec, a);
  const auto vb = make_views(g, spec, b);
  CHECK(va.first.graph.edges == vb.first.graph.edges);
  CHECK(va.second.node_map == vb.second.node_map);
}

TEST_CASE("augment spec validation") {
  AugmentSpec bad;
  bad.node_drop_ratio = 1.0;
  CHECK_THROWS_AS(bad.validate(), ContractViolation);
  AugmentSpec neg;
  neg.edge_drop_ratio = -0.1;
  CHECK_THROWS_AS(neg.validate(), ContractViolation);
}
