#include "graphdec/model.hpp"

#include <cmath>

namespace graphdec {

Eigen::Index EncoderParams::size() const {
  Eigen::Index n = 0;
  for (const auto& w : layers) n += w.size();
  return n;
}

EncoderParams EncoderParams::init(int input_dim, int hidden_dim, int embed_dim, RngStream& rng) {
  require(input_dim >= 1 && hidden_dim >= 1 && embed_dim >= 1,
          "EncoderParams::init: dimensions must be positive");
  EncoderParams p;
  const std::array<std::pair<int, int>, kLayerCount> shapes{
      {{input_dim, hidden_dim}, {hidden_dim, hidden_dim}, {hidden_dim, embed_dim}}};
  for (const auto& [rows, cols] : shapes) {
    const double bound = std::sqrt(6.0 / (rows + cols));
    Matrix w(rows, cols);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = bound * (2.0 * rng.uniform() - 1.0);
    p.layers.push_back(std::move(w));
  }
  return p;
}

void EncoderParams::validate() const {
  require(layers.size() == kLayerCount, "EncoderParams: expected exactly 3 weight matrices");
  require(layers[0].cols() == layers[1].rows() && layers[1].cols() == layers[2].rows(),
          "EncoderParams: inconsistent layer dimensions");
}

ParamGrads zero_grads_like(const EncoderParams& params) {
  ParamGrads g;
  g.reserve(params.layers.size());
  for (const auto& w : params.layers) g.push_back(Matrix::Zero(w.rows(), w.cols()));
  return g;
}

void add_into(ParamGrads& acc, const ParamGrads& g) {
  require(acc.size() == g.size(), "add_into: layer count mismatch");
  for (std::size_t l = 0; l < acc.size(); ++l) acc[l] += g[l];
}

SparsityMask SparsityMask::full(const EncoderParams& params) {
  SparsityMask m;
  for (const auto& w : params.layers) m.keep.push_back(Matrix::Ones(w.rows(), w.cols()));
  m.keep_fraction = 1.0;
  return m;
}

Eigen::Index SparsityMask::active_count(std::size_t layer) const {
  return static_cast<Eigen::Index>(keep.at(layer).sum());
}

Eigen::Index SparsityMask::active_count() const {
  Eigen::Index n = 0;
  for (std::size_t l = 0; l < keep.size(); ++l) n += active_count(l);
  return n;
}

void SparsityMask::check_against(const EncoderParams& params) const {
  require(keep.size() == params.layers.size(), "mask: layer count differs from params");
  for (std::size_t l = 0; l < keep.size(); ++l)
    require(keep[l].rows() == params.layers[l].rows() && keep[l].cols() == params.layers[l].cols(),
            "mask: layer shape differs from params");
}

}  // namespace graphdec
