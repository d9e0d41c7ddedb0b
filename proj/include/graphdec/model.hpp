#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "graphdec/numerics.hpp"

namespace graphdec {

/// Two GCN layers followed by a linear projection head. No biases.
struct EncoderParams {
  static constexpr int kLayerCount = 3;
  static constexpr std::array<std::string_view, kLayerCount> kLayerNames{"gcn1", "gcn2", "proj"};

  std::vector<Matrix> layers;  // in_dim x hidden, hidden x hidden, hidden x embed

  int input_dim() const { return static_cast<int>(layers.at(0).rows()); }
  int hidden_dim() const { return static_cast<int>(layers.at(0).cols()); }
  int embed_dim() const { return static_cast<int>(layers.at(2).cols()); }
  Eigen::Index size() const;

  /// Glorot-uniform initialization.
  static EncoderParams init(int input_dim, int hidden_dim, int embed_dim, RngStream& rng);

  void validate() const;
};

/// Per-layer gradients, same shapes as EncoderParams::layers.
using ParamGrads = std::vector<Matrix>;

ParamGrads zero_grads_like(const EncoderParams& params);
void add_into(ParamGrads& acc, const ParamGrads& g);

/// Per-layer 0/1 keep masks plus the keep fraction they were built for.
struct SparsityMask {
  std::vector<Matrix> keep;
  double keep_fraction = 1.0;
  int epoch = 0;

  static SparsityMask full(const EncoderParams& params);

  Eigen::Index active_count(std::size_t layer) const;
  Eigen::Index active_count() const;
  /// Requires mask shapes to match params.
  void check_against(const EncoderParams& params) const;
};

}  // namespace graphdec
