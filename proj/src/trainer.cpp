#include "graphdec/trainer.hpp"

#include <algorithm>
#include <exception>
#include <cctype>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

namespace graphdec {

std::string to_string(Selector s) {
  switch (s) {
    case Selector::graphdec: return "graphdec";
    case Selector::vanilla: return "vanilla";
    case Selector::random_subset: return "random_subset";
    case Selector::data_diet: return "data_diet";
  }
  return "unknown";
}

Selector selector_from_string(const std::string& name) {
  if (name == "graphdec") return Selector::graphdec;
  if (name == "vanilla") return Selector::vanilla;
  if (name == "random_subset") return Selector::random_subset;
  if (name == "data_diet") return Selector::data_diet;
  throw ConfigError("unknown selector '" + name + "'");
}

Ablation Ablation::all_off() {
  return Ablation{false, false, false, false, false, false, false, false, false};
}

void Ablation::disable(const std::string& names) {
  std::stringstream in(names);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::string key;
    for (char c : item)
      if (!std::isspace(static_cast<unsigned char>(c)))
        key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (key.empty()) continue;
    if (key == "gs") gs = false;
    else if (key == "ss") ss = false;
    else if (key == "cad") cad = false;
    else if (key == "rs") rs = false;
    else if (key == "rm") rm = false;
    else if (key == "sg") sg = false;
    else if (key == "cag") cag = false;
    else if (key == "rw") rw = false;
    else if (key == "self_supervision" || key == "ssl") self_supervision = false;
    else throw ConfigError("unknown ablation toggle '" + item + "'");
  }
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 2) throw ConfigError("batch_size must be >= 2");
  if (!(learning_rate > 0)) throw ConfigError("learning_rate must be positive");
  if (momentum < 0 || momentum >= 1) throw ConfigError("momentum must be in [0, 1)");
  if (hidden_dim < 1 || embed_dim < 1) throw ConfigError("hidden_dim and embed_dim must be >= 1");
  if (warmup_epochs < 0) throw ConfigError("warmup_epochs must be >= 0");
  if (!(temperature > 0)) throw ConfigError("temperature must be positive");
  if (decanter.initial_fraction <= 0 || decanter.initial_fraction > 1)
    throw ConfigError("decanter.initial_fraction must be in (0, 1]");
  if (decanter.epsilon < 0 || decanter.epsilon >= 1)
    throw ConfigError("decanter.epsilon must be in [0, 1)");
  if (diet.keep_fraction <= 0 || diet.keep_fraction > 1)
    throw ConfigError("diet.keep_fraction must be in (0, 1]");
  if (selector == Selector::data_diet && (diet.pick_epoch < 1 || diet.pick_epoch > epochs))
    throw ConfigError("diet.pick_epoch must be in [1, epochs]");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  try {
    augment.validate();
    resolved_sparsity().validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  }
}

SparsitySchedule TrainConfig::resolved_sparsity() const {
  SparsitySchedule s = sparsity;
  s.horizon = epochs;
  return s;
}

std::vector<int> labels_of(const GraphDataset& ds, const std::vector<int>& ids) {
  std::vector<int> y;
  y.reserve(ids.size());
  for (int id : ids) y.push_back(ds.label_of(id));
  return y;
}

namespace {

/// Runs f(i) for i in [0, n). Results must be written to per-index slots.
template <typename F>
void parallel_for(int n, int workers, F&& f) {
  if (workers <= 1 || n < 2) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  const int count = std::min(workers, n);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  pool.reserve(static_cast<std::size_t>(count));
  for (int w = 0; w < count; ++w)
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < n; i += count) f(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct BatchOutcome {
  double loss = 0.0;
  std::vector<double> scores;  // batch order
  ParamGrads grads;
  Matrix head_grad;
};

class Pipeline {
 public:
  Pipeline(const GraphDataset& ds, const SplitResult& split, const TrainConfig& cfg)
      : ds_(ds), split_(split), cfg_(cfg), augment_rng_(cfg.seed, "augment") {
    RngStream init(cfg.seed, "init");
    params_ = EncoderParams::init(ds.feature_dim(), cfg.hidden_dim, cfg.embed_dim, init);
    head_ = Matrix(cfg.embed_dim, ds.class_count);
    for (Eigen::Index i = 0; i < head_.size(); ++i) head_.data()[i] = 0.1 * init.normal();
    mask_ = SparsityMask::full(params_);
    velocity_ = zero_grads_like(params_);
    head_velocity_ = Matrix::Zero(head_.rows(), head_.cols());
    reactivation_acc_ = zero_grads_like(params_);
  }

  TrainResult run();

 private:
  BatchOutcome contrastive_graph_batch(const std::vector<int>& batch, int epoch);
  BatchOutcome contrastive_node_batch(const std::vector<int>& batch, const View& v1, const View& v2);
  BatchOutcome supervised_batch(const std::vector<int>& batch);
  void apply_update(const BatchOutcome& b);
  void update_mask(int epoch, bool sparse_model);
  std::vector<std::vector<int>> make_batches(std::vector<int> ids, int epoch) const;

  const GraphDataset& ds_;
  const SplitResult& split_;
  const TrainConfig& cfg_;
  RngStream augment_rng_;
  EncoderParams params_;
  Matrix head_;
  SparsityMask mask_;
  ParamGrads velocity_;
  Matrix head_velocity_;
  ParamGrads reactivation_acc_;
};

std::vector<std::vector<int>> Pipeline::make_batches(std::vector<int> ids, int epoch) const {
  RngStream rng = RngStream(cfg_.seed, "batching").substream(static_cast<std::uint64_t>(epoch));
  rng.shuffle(ids);
  std::vector<std::vector<int>> batches;
  const auto bs = static_cast<std::size_t>(cfg_.batch_size);
  for (std::size_t start = 0; start < ids.size(); start += bs) {
    const auto end = std::min(ids.size(), start + bs);
    batches.emplace_back(ids.begin() + static_cast<long>(start), ids.begin() + static_cast<long>(end));
  }
  // A trailing batch without a negative is merged into its predecessor.
  if (batches.size() >= 2 && batches.back().size() < 2) {
    auto last = std::move(batches.back());
    batches.pop_back();
    batches.back().insert(batches.back().end(), last.begin(), last.end());
  }
  return batches;
}

BatchOutcome Pipeline::contrastive_graph_batch(const std::vector<int>& batch, int epoch) {
  const int n = static_cast<int>(batch.size());
  std::vector<EncoderOutput> first(batch.size()), second(batch.size());
  parallel_for(n, cfg_.workers, [&](int i) {
    RngStream rng = augment_rng_.substream(static_cast<std::uint64_t>(epoch),
                                           static_cast<std::uint64_t>(batch[i]));
    auto [v1, v2] = make_views(ds_.graphs[batch[i]], cfg_.augment, rng);
    first[i] = forward(v1.graph, params_, mask_);
    second[i] = forward(v2.graph, params_, mask_);
  });
  Matrix z1(n, cfg_.embed_dim), z2(n, cfg_.embed_dim);
  for (int i = 0; i < n; ++i) {
    z1.row(i) = first[i].graph_embedding.transpose();
    z2.row(i) = second[i].graph_embedding.transpose();
  }
  const auto nce = infonce_loss(z1, z2, cfg_.denominator, cfg_.temperature);

  std::vector<ParamGrads> per_sample(batch.size());
  parallel_for(n, cfg_.workers, [&](int i) {
    const Vector d1 = nce.grad_first.row(i).transpose();
    const Vector d2 = nce.grad_second.row(i).transpose();
    per_sample[i] = backward(first[i], nullptr, &d1);
    add_into(per_sample[i], backward(second[i], nullptr, &d2));
  });

  BatchOutcome out;
  out.loss = nce.loss;
  out.grads = zero_grads_like(params_);
  for (int i = 0; i < n; ++i) add_into(out.grads, per_sample[i]);
  for (int i = 0; i < n; ++i)
    out.scores.push_back(sample_score({z1.row(i).transpose(), z2.row(i).transpose()}));
  return out;
}

BatchOutcome Pipeline::contrastive_node_batch(const std::vector<int>& batch, const View& v1,
                                              const View& v2) {
  const int n = static_cast<int>(batch.size());
  const auto o1 = forward(v1.graph, params_, mask_);
  const auto o2 = forward(v2.graph, params_, mask_);
  // Nodes dropped from a view get a zero embedding there.
  Matrix z1 = Matrix::Zero(n, cfg_.embed_dim), z2 = Matrix::Zero(n, cfg_.embed_dim);
  for (int i = 0; i < n; ++i) {
    if (const int r = v1.node_map[batch[i]]; r >= 0) z1.row(i) = o1.node_embeddings.row(r);
    if (const int r = v2.node_map[batch[i]]; r >= 0) z2.row(i) = o2.node_embeddings.row(r);
  }
  const auto nce = infonce_loss(z1, z2, cfg_.denominator, cfg_.temperature);
  Matrix up1 = Matrix::Zero(o1.node_embeddings.rows(), cfg_.embed_dim);
  Matrix up2 = Matrix::Zero(o2.node_embeddings.rows(), cfg_.embed_dim);
  for (int i = 0; i < n; ++i) {
    if (const int r = v1.node_map[batch[i]]; r >= 0) up1.row(r) += nce.grad_first.row(i);
    if (const int r = v2.node_map[batch[i]]; r >= 0) up2.row(r) += nce.grad_second.row(i);
  }
  BatchOutcome out;
  out.loss = nce.loss;
  out.grads = backward(o1, &up1, nullptr);
  add_into(out.grads, backward(o2, &up2, nullptr));
  for (int i = 0; i < n; ++i)
    out.scores.push_back(sample_score({z1.row(i).transpose(), z2.row(i).transpose()}));
  return out;
}

BatchOutcome Pipeline::supervised_batch(const std::vector<int>& batch) {
  const int n = static_cast<int>(batch.size());
  std::vector<EncoderOutput> outs;
  Matrix h(n, cfg_.embed_dim);
  std::optional<EncoderOutput> node_out;
  if (ds_.task == TaskKind::graph) {
    outs.resize(batch.size());
    parallel_for(n, cfg_.workers,
                 [&](int i) { outs[i] = forward(ds_.graphs[batch[i]], params_, mask_); });
    for (int i = 0; i < n; ++i) h.row(i) = outs[i].graph_embedding.transpose();
  } else {
    node_out = forward(ds_.graphs.front(), params_, mask_);
    for (int i = 0; i < n; ++i) h.row(i) = node_out->node_embeddings.row(batch[i]);
  }
  const Matrix p = softmax_rows(h * head_);
  Matrix residual = p;
  BatchOutcome out;
  for (int i = 0; i < n; ++i) {
    const int y = ds_.label_of(batch[i]);
    out.loss -= std::log(std::max(p(i, y), 1e-300)) / n;
    residual(i, y) -= 1.0;
    // cross-entropy gradient with respect to the logits
    out.scores.push_back(residual.row(i).norm());
  }
  const Matrix dlogits = residual / static_cast<double>(n);
  out.head_grad = h.transpose() * dlogits;
  const Matrix dh = dlogits * head_.transpose();
  out.grads = zero_grads_like(params_);
  if (ds_.task == TaskKind::graph) {
    std::vector<ParamGrads> per_sample(batch.size());
    parallel_for(n, cfg_.workers, [&](int i) {
      const Vector d = dh.row(i).transpose();
      per_sample[i] = backward(outs[i], nullptr, &d);
    });
    for (int i = 0; i < n; ++i) add_into(out.grads, per_sample[i]);
  } else {
    Matrix up = Matrix::Zero(node_out->node_embeddings.rows(), cfg_.embed_dim);
    for (int i = 0; i < n; ++i) up.row(batch[i]) += dh.row(i);
    out.grads = backward(*node_out, &up, nullptr);
  }
  return out;
}

void Pipeline::apply_update(const BatchOutcome& b) {
  add_into(reactivation_acc_, b.grads);
  for (std::size_t l = 0; l < params_.layers.size(); ++l) {
    const Matrix g = b.grads[l].cwiseProduct(mask_.keep[l]);
    velocity_[l] = cfg_.momentum * velocity_[l] + g;
    params_.layers[l] =
        sgd_step(params_.layers[l], velocity_[l].cwiseProduct(mask_.keep[l]), cfg_.learning_rate);
  }
  if (b.head_grad.size() > 0) {
    head_velocity_ = cfg_.momentum * head_velocity_ + b.head_grad;
    head_ = sgd_step(head_, head_velocity_, cfg_.learning_rate);
  }
}

void Pipeline::update_mask(int epoch, bool sparse_model) {
  if (!sparse_model) {
    mask_ = SparsityMask::full(params_);
    mask_.epoch = epoch;
    return;
  }
  const auto& ab = cfg_.ablation;
  const auto sched = cfg_.resolved_sparsity();
  const double alpha = alpha_at(sched, ab.cag ? epoch : sched.horizon);
  const bool reactivation_epoch =
      ab.rw && epoch > 1 && (epoch - 1) % sched.reactivation_interval == 0;
  if (reactivation_epoch) {
    mask_ = reactivate(params_, reactivation_acc_, alpha);
    reactivation_acc_ = zero_grads_like(params_);
  } else if (ab.rm) {
    mask_ = prune_topk(params_, alpha);
  } else {
    RngStream rng = RngStream(cfg_.seed, "mask").substream(static_cast<std::uint64_t>(epoch));
    mask_ = random_mask(params_, alpha, rng);
  }
  mask_.epoch = epoch;
}

TrainResult Pipeline::run() {
  cfg_.validate();
  ds_.validate();
  require(!split_.train.empty(), "train: empty training split");
  require(split_.train.size() >= 2, "train: need at least 2 training samples");

  const int T = cfg_.epochs;
  const Selector sel = cfg_.selector;
  const bool decanting = sel == Selector::graphdec || sel == Selector::random_subset;
  Ablation ab = cfg_.ablation;
  if (sel == Selector::random_subset) ab.gs = false;
  const bool sparse_model = decanting && ab.sg;

  std::vector<int> all_train = split_.train;
  std::sort(all_train.begin(), all_train.end());
  const int n_train = static_cast<int>(all_train.size());

  // Warmup epochs train on the full set; the subset schedule runs on the rest.
  const int warmup = std::min(cfg_.warmup_epochs, T - 1);
  DecanterSchedule dsched;
  dsched.initial_size =
      std::max(1, static_cast<int>(std::lround(cfg_.decanter.initial_fraction * n_train)));
  dsched.horizon = T - warmup;
  dsched.min_size = cfg_.decanter.min_size >= 0
                        ? std::min(cfg_.decanter.min_size, dsched.initial_size)
                        : DecanterSchedule::default_min_size(dsched.initial_size);
  const int fixed_target =
      std::max(dsched.min_size, static_cast<int>(std::lround(0.5 * dsched.initial_size)));
  DecanterState state = initial_decanter_state(all_train, dsched, ab.rs ? cfg_.decanter.epsilon : 0.0);

  std::optional<std::vector<int>> diet_subset;
  const RngStream recycle_root(cfg_.seed, "recycle");
  const RngStream select_root(cfg_.seed, "select");

  TrainResult result;
  for (int t = 1; t <= T; ++t) {
    const auto start = std::chrono::steady_clock::now();
    update_mask(t, sparse_model);
    if (cfg_.keep_mask_snapshots) result.mask_snapshots.push_back(mask_);

    std::vector<int> train_ids;
    if (decanting) {
      train_ids = ab.ss ? state.active : all_train;
    } else if (sel == Selector::data_diet && diet_subset) {
      train_ids = *diet_subset;
    } else {
      train_ids = all_train;
    }

    std::map<int, double> raw_by_id;
    double loss_sum = 0.0;
    const auto batches = make_batches(train_ids, t);
    std::optional<std::pair<View, View>> node_views;
    if (ds_.task == TaskKind::node && ab.self_supervision) {
      RngStream rng = augment_rng_.substream(static_cast<std::uint64_t>(t));
      node_views = make_views(ds_.graphs.front(), cfg_.augment, rng);
    }
    for (const auto& batch : batches) {
      BatchOutcome b;
      if (!ab.self_supervision) {
        b = supervised_batch(batch);
      } else if (ds_.task == TaskKind::graph) {
        b = contrastive_graph_batch(batch, t);
      } else {
        b = contrastive_node_batch(batch, node_views->first, node_views->second);
      }
      apply_update(b);
      loss_sum += b.loss * static_cast<double>(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) raw_by_id[batch[i]] = b.scores[i];
    }

    std::vector<ScoredSample> scored;
    scored.reserve(raw_by_id.size());
    for (const auto& [id, raw] : raw_by_id) scored.push_back({id, raw, 0.0});
    const auto ranked = normalize_and_rank(scored);
    std::map<int, double> normalized_by_id;
    for (const auto& s : ranked) normalized_by_id[s.id] = s.normalized;

    // Traces describe the subset that was used in this epoch.
    EpochTrace trace;
    trace.epoch = t;
    trace.mean_loss = loss_sum / static_cast<double>(train_ids.size());
    trace.subset_size = decanting ? state.subset_size : static_cast<int>(train_ids.size());
    trace.keep_fraction = mask_.keep_fraction;
    trace.subset_class_counts = class_counts(ds_, decanting ? state.active : train_ids);
    trace.scored_count = static_cast<int>(scored.size());
    result.scored_sample_epochs += trace.scored_count;

    {
      const std::vector<int>& subset = decanting ? state.active : train_ids;
      std::vector<char> in_subset(static_cast<std::size_t>(ds_.unit_count()), 0);
      std::vector<char> in_bin(static_cast<std::size_t>(ds_.unit_count()), 0);
      for (int id : subset) in_subset[id] = 1;
      if (decanting)
        for (int id : state.bin) in_bin[id] = 1;
      for (int id : all_train) {
        ScoreRecord rec;
        rec.epoch = t;
        rec.sample_id = id;
        if (const auto it = raw_by_id.find(id); it != raw_by_id.end()) {
          rec.raw_score = it->second;
          rec.normalized_score = normalized_by_id.at(id);
        }
        rec.in_subset = in_subset[id] != 0;
        rec.in_bin = in_bin[id] != 0;
        result.scores.push_back(rec);
      }
    }
    result.subsets.push_back(train_ids);

    // Subset for the next epoch.
    const int data_step = t + 1 - warmup;
    if (decanting && t < T && data_step >= 1) {
      const int next_size = ab.cad ? subset_size_at(dsched, data_step) : fixed_target;
      RngStream rng = recycle_root.substream(static_cast<std::uint64_t>(t));
      if (!ab.gs) {
        // Uniform subset of the same size.
        RngStream pick = select_root.substream(static_cast<std::uint64_t>(t));
        std::vector<int> next_active;
        for (int k : pick.sample_without_replacement(n_train, next_size))
          next_active.push_back(all_train[k]);
        std::sort(next_active.begin(), next_active.end());
        DecanterState next = state;
        next.active = next_active;
        next.bin.clear();
        std::set_difference(all_train.begin(), all_train.end(), next_active.begin(),
                            next_active.end(), std::back_inserter(next.bin));
        next.subset_size = next_size;
        next.epoch = state.epoch + 1;
        state = std::move(next);
      } else {
        std::vector<int> ranked_active;
        std::vector<char> active_flag(static_cast<std::size_t>(ds_.unit_count()), 0);
        for (int id : state.active) active_flag[id] = 1;
        for (const auto& s : ranked)
          if (active_flag[s.id]) ranked_active.push_back(s.id);
        state = decant_update(state, ranked_active, next_size, rng);
      }
    }
    if (sel == Selector::data_diet && t == cfg_.diet.pick_epoch) {
      const auto keep = static_cast<std::size_t>(
          std::max(1L, std::lround(std::ceil(cfg_.diet.keep_fraction * n_train - 1e-9))));
      std::vector<int> picked;
      for (std::size_t i = 0; i < std::min(keep, ranked.size()); ++i) picked.push_back(ranked[i].id);
      std::sort(picked.begin(), picked.end());
      diet_subset = std::move(picked);
    }

    trace.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.traces.push_back(std::move(trace));
  }

  result.params = params_;
  result.mask = mask_;
  result.diet_subset = diet_subset;
  result.data_budget = static_cast<double>(result.scored_sample_epochs) /
                       (static_cast<double>(n_train) * static_cast<double>(T));
  return result;
}

}  // namespace

TrainResult train(const GraphDataset& ds, const SplitResult& split, const TrainConfig& cfg) {
  Pipeline pipeline(ds, split, cfg);
  return pipeline.run();
}

std::vector<int> select_data_diet(const GraphDataset& ds, const SplitResult& split,
                                  const TrainConfig& cfg, int pick_epoch, double keep_fraction) {
  if (pick_epoch < 1 || pick_epoch >= cfg.epochs)
    throw ConfigError("select_data_diet: pick epoch must be in [1, epochs)");
  // Epochs up to the pick do not depend on the horizon for a dense model.
  TrainConfig c = cfg;
  c.selector = Selector::data_diet;
  c.epochs = pick_epoch;
  c.diet.pick_epoch = pick_epoch;
  c.diet.keep_fraction = keep_fraction;
  return *train(ds, split, c).diet_subset;
}

EvalReport evaluate(const GraphDataset& ds, const SplitResult& split, const EncoderParams& params,
                    const SparsityMask& mask, const ProbeConfig& probe) {
  const Matrix train_x = embed_dataset(ds, split.train, params, mask);
  const Matrix test_x = embed_dataset(ds, split.test, params, mask);
  return linear_probe(train_x, labels_of(ds, split.train), test_x, labels_of(ds, split.test),
                      ds.class_count, probe);
}

}  // namespace graphdec
