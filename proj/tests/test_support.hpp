#pragma once

#include <utility>
#include <vector>

#include "graphdec/augment.hpp"
#include "graphdec/decanter.hpp"
#include "graphdec/encoder.hpp"

namespace graphdec::testing {

/// Connected-ish random graph with dense random features.
inline Graph random_graph(RngStream& rng, int nodes, int feature_dim) {
  std::vector<Edge> edges;
  for (int v = 1; v < nodes; ++v) edges.emplace_back(static_cast<int>(rng.uniform_int(v)), v);
  for (int u = 0; u < nodes; ++u)
    for (int v = u + 1; v < nodes; ++v)
      if (rng.uniform() < 0.2) edges.emplace_back(u, v);
  Matrix x(nodes, feature_dim);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  return make_graph(nodes, edges, x);
}

/// Mean InfoNCE over fixed view pairs, optionally with gradients.
inline double contrastive_objective(const std::vector<std::pair<Graph, Graph>>& pairs,
                                    const EncoderParams& params, const SparsityMask& mask,
                                    ParamGrads* grads = nullptr) {
  const auto n = static_cast<Eigen::Index>(pairs.size());
  std::vector<EncoderOutput> a, b;
  Matrix z1(n, params.embed_dim()), z2(n, params.embed_dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    a.push_back(forward(pairs[i].first, params, mask));
    b.push_back(forward(pairs[i].second, params, mask));
    z1.row(i) = a.back().graph_embedding.transpose();
    z2.row(i) = b.back().graph_embedding.transpose();
  }
  const auto nce = infonce_loss(z1, z2);
  if (grads) {
    *grads = zero_grads_like(params);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Vector d1 = nce.grad_first.row(i).transpose();
      const Vector d2 = nce.grad_second.row(i).transpose();
      add_into(*grads, backward(a[i], nullptr, &d1));
      add_into(*grads, backward(b[i], nullptr, &d2));
    }
  }
  return nce.loss;
}

}  // namespace graphdec::testing
