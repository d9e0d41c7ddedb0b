#pragma once

#include <utility>
#include <vector>

#include "graphdec/graph.hpp"

namespace graphdec {

enum class AugmentKind { node_drop, edge_drop, compose };

struct AugmentSpec {
  double node_drop_ratio = 0.25;
  double edge_drop_ratio = 0.25;
  AugmentKind kind = AugmentKind::compose;

  void validate() const;
};

/// Augmented graph plus the old -> new node index map (-1 for dropped nodes).
struct View {
  Graph graph;
  std::vector<int> node_map;
};

/// Drops floor(ratio * n) uniformly chosen nodes (at least one survives) and
/// their incident edges. Survivors keep their relative order.
View node_drop_view(const Graph& g, double ratio, RngStream& rng);
Graph node_drop(const Graph& g, double ratio, RngStream& rng);

/// Drops floor(ratio * |E|) uniformly chosen edges.
Graph edge_drop(const Graph& g, double ratio, RngStream& rng);

/// Applies the spec (node drop, then edge drop for compose).
View augment(const Graph& g, const AugmentSpec& spec, RngStream& rng);

/// Two independent applications of the spec, drawn one after the other from `rng`.
std::pair<View, View> make_views(const Graph& g, const AugmentSpec& spec, RngStream& rng);

}  // namespace graphdec
