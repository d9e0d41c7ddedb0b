#pragma once

#include <Eigen/SparseCore>

#include <optional>
#include <vector>

#include "graphdec/graph.hpp"
#include "graphdec/model.hpp"

namespace graphdec {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// D^{-1/2} (A + I) D^{-1/2}, with D the degree matrix of A + I.
SparseMatrix normalized_adjacency(const Graph& g);

/// Activations kept by forward() for the reverse pass.
struct ForwardCache {
  SparseMatrix adjacency;
  std::vector<Matrix> effective;  // W ⊙ mask per layer
  Matrix agg_input;               // Â X
  Matrix pre1;                    // Â X W1
  Matrix agg_hidden;              // Â H1
  Matrix pre2;                    // Â H1 W2
  Matrix hidden2;                 // relu(pre2)
  Vector row_norms;               // norms of H2 Wp rows
  Vector mean;                    // column mean of normalized rows
  double mean_norm = 0.0;
};

struct EncoderOutput {
  Matrix node_embeddings;  // unit rows (zero rows stay zero)
  Vector graph_embedding;  // unit mean readout
  std::optional<ForwardCache> cache;
};

/// H1 = relu(Â X W1), H2 = relu(Â H1 W2), Z = rownorm(H2 Wp), graph = unit(mean(Z)).
/// Weights enter as W ⊙ mask.
EncoderOutput forward(const Graph& g, const EncoderParams& params, const SparsityMask& mask,
                      bool keep_cache = true);

/// Reverse pass. Either upstream may be null. Returns gradients with respect to
/// the effective (masked) weights at every position, including masked ones;
/// use apply_mask() before an optimizer step.
ParamGrads backward(const EncoderOutput& output, const Matrix* upstream_nodes,
                    const Vector* upstream_graph);

ParamGrads apply_mask(const ParamGrads& grads, const SparsityMask& mask);

/// In-place SGD on the unmasked entries.
void masked_sgd_step(EncoderParams& params, const ParamGrads& grads, const SparsityMask& mask,
                     double lr);

/// Clean-view embeddings, one row per unit in `indices` order (graph embeddings
/// for graph-level datasets, node embeddings for node-level ones).
Matrix embed_dataset(const GraphDataset& ds, const std::vector<int>& indices,
                     const EncoderParams& params, const SparsityMask& mask);

}  // namespace graphdec
