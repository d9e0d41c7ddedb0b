#include "graphdec/encoder.hpp"

#include <cmath>

namespace graphdec {

SparseMatrix normalized_adjacency(const Graph& g) {
  const int n = g.node_count;
  std::vector<double> inv_sqrt(static_cast<std::size_t>(n));
  const auto deg = node_degrees(g);
  for (int v = 0; v < n; ++v) inv_sqrt[v] = 1.0 / std::sqrt(deg[v] + 1.0);

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(n) + 2 * g.edges.size());
  for (int v = 0; v < n; ++v) entries.emplace_back(v, v, inv_sqrt[v] * inv_sqrt[v]);
  for (const auto& [u, v] : g.edges) {
    const double w = inv_sqrt[u] * inv_sqrt[v];
    entries.emplace_back(u, v, w);
    entries.emplace_back(v, u, w);
  }
  SparseMatrix adj(n, n);
  adj.setFromTriplets(entries.begin(), entries.end());
  return adj;
}

namespace {

Matrix relu(const Matrix& m) { return m.cwiseMax(0.0); }

Matrix relu_grad(const Matrix& upstream, const Matrix& pre) {
  return (pre.array() > 0.0).select(upstream, 0.0);
}

}  // namespace

EncoderOutput forward(const Graph& g, const EncoderParams& params, const SparsityMask& mask,
                      bool keep_cache) {
  params.validate();
  mask.check_against(params);
  require(g.feature_dim() == params.input_dim(), "forward: feature_dim differs from params");

  ForwardCache c;
  c.adjacency = normalized_adjacency(g);
  for (std::size_t l = 0; l < params.layers.size(); ++l)
    c.effective.push_back(params.layers[l].cwiseProduct(mask.keep[l]));

  c.agg_input = c.adjacency * g.features;
  c.pre1 = c.agg_input * c.effective[0];
  const Matrix h1 = relu(c.pre1);
  c.agg_hidden = c.adjacency * h1;
  c.pre2 = c.agg_hidden * c.effective[1];
  c.hidden2 = relu(c.pre2);
  const Matrix raw = c.hidden2 * c.effective[2];

  EncoderOutput out;
  out.node_embeddings = raw;
  c.row_norms.resize(raw.rows());
  for (Eigen::Index r = 0; r < raw.rows(); ++r) {
    c.row_norms[r] = raw.row(r).norm();
    if (c.row_norms[r] > 0) out.node_embeddings.row(r) /= c.row_norms[r];
  }

  const auto n = out.node_embeddings.rows();
  c.mean = n > 0 ? Vector(out.node_embeddings.colwise().mean().transpose())
                 : Vector::Zero(params.embed_dim());
  c.mean_norm = c.mean.norm();
  out.graph_embedding = c.mean_norm > 0 ? Vector(c.mean / c.mean_norm) : c.mean;

  if (keep_cache) out.cache = std::move(c);
  return out;
}

ParamGrads backward(const EncoderOutput& output, const Matrix* upstream_nodes,
                    const Vector* upstream_graph) {
  if (!output.cache) throw ContractViolation("backward: forward cache missing");
  const ForwardCache& c = *output.cache;
  const Matrix& z = output.node_embeddings;
  const auto n = z.rows();

  Matrix dz = upstream_nodes ? *upstream_nodes : Matrix::Zero(z.rows(), z.cols());
  require(dz.rows() == z.rows() && dz.cols() == z.cols(), "backward: node upstream shape mismatch");

  if (upstream_graph && n > 0 && c.mean_norm > 0) {
    const Vector& gout = output.graph_embedding;
    require(upstream_graph->size() == gout.size(), "backward: graph upstream shape mismatch");
    const Vector dmean = (*upstream_graph - gout * gout.dot(*upstream_graph)) / c.mean_norm;
    dz.rowwise() += (dmean / static_cast<double>(n)).transpose();
  }

  // row normalization
  Matrix draw = Matrix::Zero(z.rows(), z.cols());
  for (Eigen::Index r = 0; r < n; ++r) {
    if (c.row_norms[r] > 0)
      draw.row(r) = (dz.row(r) - z.row(r) * z.row(r).dot(dz.row(r))) / c.row_norms[r];
  }

  ParamGrads grads(3);
  grads[2] = c.hidden2.transpose() * draw;
  const Matrix dpre2 = relu_grad(draw * c.effective[2].transpose(), c.pre2);
  grads[1] = c.agg_hidden.transpose() * dpre2;
  // Â is symmetric
  const Matrix dh1 = c.adjacency * (dpre2 * c.effective[1].transpose());
  const Matrix dpre1 = relu_grad(dh1, c.pre1);
  grads[0] = c.agg_input.transpose() * dpre1;
  return grads;
}

ParamGrads apply_mask(const ParamGrads& grads, const SparsityMask& mask) {
  require(grads.size() == mask.keep.size(), "apply_mask: layer count mismatch");
  ParamGrads out;
  out.reserve(grads.size());
  for (std::size_t l = 0; l < grads.size(); ++l) out.push_back(grads[l].cwiseProduct(mask.keep[l]));
  return out;
}

void masked_sgd_step(EncoderParams& params, const ParamGrads& grads, const SparsityMask& mask,
                     double lr) {
  mask.check_against(params);
  require(grads.size() == params.layers.size(), "masked_sgd_step: layer count mismatch");
  for (std::size_t l = 0; l < params.layers.size(); ++l)
    params.layers[l] = sgd_step(params.layers[l], grads[l].cwiseProduct(mask.keep[l]), lr);
}

Matrix embed_dataset(const GraphDataset& ds, const std::vector<int>& indices,
                     const EncoderParams& params, const SparsityMask& mask) {
  Matrix out(static_cast<Eigen::Index>(indices.size()), params.embed_dim());
  if (ds.task == TaskKind::graph) {
    for (std::size_t i = 0; i < indices.size(); ++i) {
      require(indices[i] >= 0 && indices[i] < ds.unit_count(), "embed_dataset: index out of range");
      out.row(static_cast<Eigen::Index>(i)) =
          forward(ds.graphs[indices[i]], params, mask, false).graph_embedding.transpose();
    }
  } else {
    const auto res = forward(ds.graphs.front(), params, mask, false);
    for (std::size_t i = 0; i < indices.size(); ++i) {
      require(indices[i] >= 0 && indices[i] < ds.unit_count(), "embed_dataset: index out of range");
      out.row(static_cast<Eigen::Index>(i)) = res.node_embeddings.row(indices[i]);
    }
  }
  return out;
}

}  // namespace graphdec
