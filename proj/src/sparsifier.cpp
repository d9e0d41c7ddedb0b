#include "graphdec/sparsifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace graphdec {

void SparsitySchedule::validate() const {
  require(alpha_min > 0 && alpha_min <= alpha0 && alpha0 <= 1,
          "sparsity schedule: need 0 < alpha_min <= alpha0 <= 1");
  require(horizon >= 1, "sparsity schedule: horizon must be >= 1");
  require(reactivation_interval >= 1, "sparsity schedule: reactivation interval must be >= 1");
}

double alpha_at(const SparsitySchedule& sched, int t) {
  sched.validate();
  if (t < 1 || t > sched.horizon)
    throw ContractViolation("alpha_at: epoch " + std::to_string(t) + " outside [1, " +
                            std::to_string(sched.horizon) + "]");
  return std::max(sched.alpha_min, cosine_decay(sched.alpha0, t, sched.horizon));
}

Eigen::Index keep_count(double alpha, Eigen::Index size) {
  require(alpha > 0 && alpha <= 1, "keep_count: alpha outside (0, 1]");
  const auto k = static_cast<Eigen::Index>(std::ceil(alpha * static_cast<double>(size)));
  return std::clamp<Eigen::Index>(k, 1, size);
}

Eigen::Index flat_index(const Matrix& m, Eigen::Index row, Eigen::Index col) {
  return row * m.cols() + col;
}

double& flat_ref(Matrix& m, Eigen::Index flat) { return m(flat / m.cols(), flat % m.cols()); }

std::vector<Eigen::Index> top_k_flat(const Matrix& scores, Eigen::Index k) {
  const Eigen::Index n = scores.size();
  require(k >= 0 && k <= n, "top_k_flat: k out of range");
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  auto value = [&](Eigen::Index f) { return scores(f / scores.cols(), f % scores.cols()); };
  auto before = [&](Eigen::Index a, Eigen::Index b) {
    const double va = value(a), vb = value(b);
    return va > vb || (va == vb && a < b);
  };
  std::nth_element(idx.begin(), idx.begin() + k, idx.end(), before);
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

namespace {

SparsityMask mask_from_scores(const EncoderParams& params, const std::vector<Matrix>& scores,
                              double alpha) {
  require(alpha > 0 && alpha <= 1, "mask: alpha outside (0, 1]");
  SparsityMask mask;
  mask.keep_fraction = alpha;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& w = params.layers[l];
    Matrix keep = Matrix::Zero(w.rows(), w.cols());
    for (auto f : top_k_flat(scores[l], keep_count(alpha, w.size()))) flat_ref(keep, f) = 1.0;
    mask.keep.push_back(std::move(keep));
  }
  return mask;
}

}  // namespace

SparsityMask prune_topk(const EncoderParams& params, double alpha) {
  std::vector<Matrix> magnitudes;
  for (const auto& w : params.layers) magnitudes.push_back(w.cwiseAbs());
  return mask_from_scores(params, magnitudes, alpha);
}

SparsityMask reactivate(const EncoderParams& params, const ParamGrads& grads, double alpha) {
  require(grads.size() == params.layers.size(), "reactivate: layer count mismatch");
  std::vector<Matrix> magnitudes;
  for (std::size_t l = 0; l < grads.size(); ++l) {
    require(grads[l].rows() == params.layers[l].rows() && grads[l].cols() == params.layers[l].cols(),
            "reactivate: gradient shape differs from params");
    magnitudes.push_back(grads[l].cwiseAbs());
  }
  return mask_from_scores(params, magnitudes, alpha);
}

SparsityMask random_mask(const EncoderParams& params, double alpha, RngStream& rng) {
  SparsityMask mask;
  mask.keep_fraction = alpha;
  for (const auto& w : params.layers) {
    Matrix keep = Matrix::Zero(w.rows(), w.cols());
    const auto k = keep_count(alpha, w.size());
    for (int f : rng.sample_without_replacement(static_cast<int>(w.size()), static_cast<int>(k)))
      flat_ref(keep, f) = 1.0;
    mask.keep.push_back(std::move(keep));
  }
  return mask;
}

nlohmann::json mask_to_json(const SparsityMask& mask) {
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < mask.keep.size(); ++l) {
    const Matrix& m = mask.keep[l];
    std::vector<Eigen::Index> active;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        if (m(r, c) != 0.0) active.push_back(flat_index(m, r, c));
    const std::string name = l < EncoderParams::kLayerNames.size()
                                 ? std::string(EncoderParams::kLayerNames[l])
                                 : "layer" + std::to_string(l);
    layers.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}, {"active", active}});
  }
  return {{"epoch", mask.epoch}, {"keep_fraction", mask.keep_fraction}, {"layers", layers}};
}

SparsityMask mask_from_json(const nlohmann::json& j) {
  SparsityMask mask;
  mask.epoch = j.at("epoch").get<int>();
  mask.keep_fraction = j.at("keep_fraction").get<double>();
  for (const auto& layer : j.at("layers")) {
    Matrix m = Matrix::Zero(layer.at("rows").get<Eigen::Index>(), layer.at("cols").get<Eigen::Index>());
    for (const auto& f : layer.at("active")) {
      const auto flat = f.get<Eigen::Index>();
      require(flat >= 0 && flat < m.size(), "mask_from_json: flat index out of range");
      flat_ref(m, flat) = 1.0;
    }
    mask.keep.push_back(std::move(m));
  }
  return mask;
}

}  // namespace graphdec
