#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "graphdec/numerics.hpp"

namespace graphdec {

/// Undirected edge stored with first < second.
using Edge = std::pair<int, int>;

struct Graph {
  int node_count = 0;
  std::vector<Edge> edges;
  Matrix features;  // node_count x feature_dim
  std::optional<int> label;

  int feature_dim() const { return static_cast<int>(features.cols()); }

  /// Throws ContractViolation when an endpoint is out of range, a self-loop or
  /// duplicate edge is stored, or the feature row count disagrees.
  void validate() const;
};

/// Builds a graph from an arbitrary edge list: orients pairs, drops self-loops,
/// removes duplicates and sorts.
Graph make_graph(int node_count, const std::vector<Edge>& edges, Matrix features,
                 std::optional<int> label = std::nullopt);

std::vector<int> node_degrees(const Graph& g);

/// One-hot degree rows; degrees >= cap share the last bucket (width cap + 1).
Matrix degree_one_hot(const Graph& g, int cap);

enum class TaskKind { graph, node };

struct GraphDataset {
  TaskKind task = TaskKind::graph;
  std::vector<Graph> graphs;
  int class_count = 0;
  // node-level only
  std::vector<int> node_labels;
  std::vector<int> labeled_nodes;

  /// Number of sample units: graphs for graph-level, nodes for node-level.
  int unit_count() const;
  int label_of(int unit) const;
  int feature_dim() const { return graphs.empty() ? 0 : graphs.front().feature_dim(); }
  void validate() const;
};

/// Stable content hash over structure, features and labels.
std::uint64_t dataset_fingerprint(const GraphDataset& ds);

// ---------------------------------------------------------------------------
// TU text format

struct TuLoadOptions {
  int degree_cap = 10;
};

GraphDataset load_tu_dataset(const std::filesystem::path& directory, const std::string& name,
                             const TuLoadOptions& options = {});

/// Writes `<name>_A.txt`, `_graph_indicator.txt`, `_graph_labels.txt` and, when
/// node labels are given (one per node over the whole dataset), `_node_labels.txt`.
void write_tu_dataset(const GraphDataset& ds, const std::filesystem::path& directory,
                      const std::string& name, const std::vector<int>* node_labels = nullptr);

// ---------------------------------------------------------------------------
// Synthetic data

struct SyntheticSpec {
  int min_nodes = 8;
  int max_nodes = 16;
  int class0_count = 90;  // noisy cycles
  int class1_count = 10;  // noisy stars
  double noise_edge_prob = 0.05;
  int degree_cap = 10;
  std::uint64_t seed = 0;
};

GraphDataset generate_synthetic_imbalanced(const SyntheticSpec& spec);

struct MoleculeSpec {
  int negative_count = 63;   // class 0
  int positive_count = 125;  // class 1
  double label_noise = 0.1;
  std::uint64_t seed = 0;
};

/// Small molecule-like graphs with 7 atom types. Class 1 carries fused aromatic
/// rings with nitro groups; class 0 carries single rings with halogen or
/// hydroxyl substituents. Returns the atom type of every node in `atom_types`
/// when non-null.
GraphDataset generate_molecule_like(const MoleculeSpec& spec,
                                    std::vector<int>* atom_types = nullptr);

struct NodeDatasetSpec {
  std::vector<int> class_sizes{200, 150, 100};
  int feature_dim = 16;
  double intra_prob = 0.05;
  double inter_prob = 0.004;
  double feature_noise = 1.0;
  std::uint64_t seed = 0;
};

/// Single graph from a stochastic block model with Gaussian class-centroid features.
GraphDataset generate_node_dataset(const NodeDatasetSpec& spec);

// ---------------------------------------------------------------------------
// Splits

struct SplitSpec {
  std::vector<int> train_counts;  // per class
  double validation_fraction = 0.25;
  std::uint64_t seed = 0;

  static SplitSpec binary(int minority_class, int minority_count, int majority_count,
                          double validation_fraction, std::uint64_t seed);
};

struct SplitResult {
  std::vector<int> train;
  std::vector<int> validation;
  std::vector<int> test;
};

/// Class with the smallest population in the dataset (lowest id on ties).
int minority_class(const GraphDataset& ds);

std::vector<int> class_counts(const GraphDataset& ds, const std::vector<int>& indices);

SplitResult make_imbalanced_split(const GraphDataset& ds, const SplitSpec& spec);

/// Per-class training counts decaying geometrically in class-frequency rank
/// from `base` so that largest/smallest = ratio. Indexed by class id.
std::vector<int> longtail_counts(const GraphDataset& ds, double ratio, int base);

SplitResult make_longtail_node_split(const GraphDataset& ds, double ratio, int base,
                                     double validation_fraction, std::uint64_t seed);

}  // namespace graphdec
