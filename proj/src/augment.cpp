#include "graphdec/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace graphdec {

void AugmentSpec::validate() const {
  require(node_drop_ratio >= 0 && node_drop_ratio < 1, "augment: node_drop_ratio outside [0, 1)");
  require(edge_drop_ratio >= 0 && edge_drop_ratio < 1, "augment: edge_drop_ratio outside [0, 1)");
}

namespace {

int drop_count(double ratio, std::size_t total) {
  return static_cast<int>(std::floor(ratio * static_cast<double>(total)));
}

std::vector<int> identity_map(int n) {
  std::vector<int> map(static_cast<std::size_t>(n));
  std::iota(map.begin(), map.end(), 0);
  return map;
}

}  // namespace

View node_drop_view(const Graph& g, double ratio, RngStream& rng) {
  require(ratio >= 0 && ratio < 1, "node_drop: ratio outside [0, 1)");
  const int drops = std::min(drop_count(ratio, static_cast<std::size_t>(g.node_count)),
                             std::max(g.node_count - 1, 0));
  if (drops == 0) return {g, identity_map(g.node_count)};

  std::vector<char> dropped(static_cast<std::size_t>(g.node_count), 0);
  for (int v : rng.sample_without_replacement(g.node_count, drops)) dropped[v] = 1;

  View view;
  view.node_map.assign(static_cast<std::size_t>(g.node_count), -1);
  int next = 0;
  for (int v = 0; v < g.node_count; ++v)
    if (!dropped[v]) view.node_map[v] = next++;

  Graph& out = view.graph;
  out.node_count = next;
  out.label = g.label;
  out.features.resize(next, g.features.cols());
  for (int v = 0; v < g.node_count; ++v)
    if (!dropped[v]) out.features.row(view.node_map[v]) = g.features.row(v);
  for (const auto& [u, v] : g.edges)
    if (!dropped[u] && !dropped[v]) out.edges.emplace_back(view.node_map[u], view.node_map[v]);
  return view;
}

Graph node_drop(const Graph& g, double ratio, RngStream& rng) {
  return node_drop_view(g, ratio, rng).graph;
}

Graph edge_drop(const Graph& g, double ratio, RngStream& rng) {
  require(ratio >= 0 && ratio < 1, "edge_drop: ratio outside [0, 1)");
  const int drops = drop_count(ratio, g.edges.size());
  if (drops == 0) return g;
  std::vector<char> dropped(g.edges.size(), 0);
  for (int e : rng.sample_without_replacement(static_cast<int>(g.edges.size()), drops))
    dropped[e] = 1;
  Graph out;
  out.node_count = g.node_count;
  out.features = g.features;
  out.label = g.label;
  out.edges.reserve(g.edges.size() - static_cast<std::size_t>(drops));
  for (std::size_t e = 0; e < g.edges.size(); ++e)
    if (!dropped[e]) out.edges.push_back(g.edges[e]);
  return out;
}

View augment(const Graph& g, const AugmentSpec& spec, RngStream& rng) {
  spec.validate();
  switch (spec.kind) {
    case AugmentKind::node_drop:
      return node_drop_view(g, spec.node_drop_ratio, rng);
    case AugmentKind::edge_drop:
      return {edge_drop(g, spec.edge_drop_ratio, rng), identity_map(g.node_count)};
    case AugmentKind::compose: {
      View view = node_drop_view(g, spec.node_drop_ratio, rng);
      view.graph = edge_drop(view.graph, spec.edge_drop_ratio, rng);
      return view;
    }
  }
  throw ContractViolation("augment: unknown kind");
}

std::pair<View, View> make_views(const Graph& g, const AugmentSpec& spec, RngStream& rng) {
  View first = augment(g, spec, rng);
  View second = augment(g, spec, rng);
  return {std::move(first), std::move(second)};
}

}  // namespace graphdec
