#ifndef SCOREQ_TRAINING_TRAINER_HPP_
#define SCOREQ_TRAINING_TRAINER_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "scoreq/data/sample.hpp"
#include "scoreq/eval/bootstrap.hpp"
#include "scoreq/eval/stats.hpp"
#include "scoreq/loss/offline.hpp"
#include "scoreq/loss/scoreq_loss.hpp"
#include "scoreq/model/checkpoint.hpp"
#include "scoreq/model/model.hpp"
#include "scoreq/training/adam.hpp"

namespace scoreq {

enum class LossMode { l2, scoreq_fixed, scoreq_adaptive, offline_triplet };

inline const char* to_string(LossMode m) {
  switch (m) {
    case LossMode::l2: return "l2";
    case LossMode::scoreq_fixed: return "scoreq_fixed";
    case LossMode::scoreq_adaptive: return "scoreq_adaptive";
    case LossMode::offline_triplet: return "offline_triplet";
  }
  return "?";
}

inline LossMode loss_mode_from_string(const std::string& s) {
  if (s == "l2") return LossMode::l2;
  if (s == "scoreq_fixed") return LossMode::scoreq_fixed;
  if (s == "scoreq_adaptive") return LossMode::scoreq_adaptive;
  if (s == "offline_triplet") return LossMode::offline_triplet;
  throw ConfigError("unknown loss mode '" + s + "'");
}

inline bool is_triplet_mode(LossMode m) { return m != LossMode::l2; }

struct TrainConfig {
  LossMode loss_mode = LossMode::scoreq_adaptive;
  std::size_t batch_size = 128;
  LearningRates lr{1e-5, 1e-3};
  double decay_factor = 0.99;
  std::size_t decay_patience_epochs = 10;
  std::size_t early_stop_patience = 100;
  std::size_t max_epochs = 1000;
  std::uint64_t seed = 0;
  MarginSpec margin = MarginSpec::adaptive();
  Reduction reduction = Reduction::mean_active;
  /// Frames kept per training sample; 0 keeps the full sequence.
  std::size_t max_train_frames = 0;
  /// Representation used for the NMR validation criterion.
  Layer validation_layer = Layer::projection;
  std::size_t offline_per_anchor = 10;
  /// Anchors sampled for the offline triplet list; 0 uses every training sample.
  std::size_t offline_anchors = 0;

  void validate() const {
    if (!(lr.encoder > 0.0) || !(lr.head > 0.0)) throw ConfigError("TrainConfig: learning rates must be > 0");
    if (!(decay_factor > 0.0 && decay_factor <= 1.0)) throw ConfigError("TrainConfig: decay_factor must be in (0, 1]");
    if (batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
    if (is_triplet_mode(loss_mode) && batch_size < 3) {
      throw ConfigError("TrainConfig: batch_size must be >= 3 for triplet losses");
    }
    if (max_epochs < 1) throw ConfigError("TrainConfig: max_epochs must be >= 1");
    margin.validate();
  }
};

/// Validation criterion tracker with LR-decay and early-stop triggers.
struct EarlyStopState {
  enum class Kind { validation_sc_nmr, validation_l2 };

  Kind kind = Kind::validation_l2;
  double best_criterion = 0.0;
  std::size_t best_epoch = 0;
  std::size_t epochs_since_improve = 0;
  bool has_best = false;

  bool higher_is_better() const { return kind == Kind::validation_sc_nmr; }

  /// Returns true when the criterion improved on the best so far.
  bool update(double criterion, std::size_t epoch) {
    const bool improved = !has_best || (higher_is_better() ? criterion > best_criterion : criterion < best_criterion);
    if (improved) {
      best_criterion = criterion;
      best_epoch = epoch;
      epochs_since_improve = 0;
      has_best = true;
    } else {
      ++epochs_since_improve;
    }
    return improved;
  }

  /// Decay fires each time the no-improvement counter reaches a multiple of patience.
  bool should_decay(std::size_t patience) const {
    return patience > 0 && epochs_since_improve > 0 && epochs_since_improve % patience == 0;
  }
  bool should_stop(std::size_t patience) const { return epochs_since_improve > patience; }
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_criterion = 0.0;
  double lr_encoder = 0.0;
  double lr_head = 0.0;
  double active_triplet_fraction = 0.0;
};

inline void write_epoch_log_csv(std::ostream& os, std::span<const EpochLog> log) {
  os << "epoch,train_loss,val_criterion,lr_encoder,lr_head,active_triplet_fraction\n";
  auto num = [](double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
  };
  for (const auto& e : log) {
    os << e.epoch << ',' << num(e.train_loss) << ',' << num(e.val_criterion) << ',' << num(e.lr_encoder) << ','
       << num(e.lr_head) << ',' << num(e.active_triplet_fraction) << '\n';
  }
}

struct TrainStats {
  std::size_t steps = 0;
  std::size_t skipped_batches = 0;
  /// Times the offline triplet list was built.
  std::size_t triplet_list_builds = 0;
  std::size_t offline_triplets = 0;
  std::size_t max_train_frames_seen = 0;
  std::size_t max_eval_frames_seen = 0;
  /// Largest |grad| over encoder parameters observed after any step.
  double max_encoder_grad = 0.0;
};

struct TrainResult {
  Checkpoint best;
  Checkpoint final;
  std::vector<EpochLog> log;
  TrainStats stats;
};

namespace detail {

struct EpochOutcome {
  double loss = 0.0;
  double active_fraction = 0.0;
};

inline std::vector<FeatureSequence> training_features(std::span<const LabeledSample> samples,
                                                      std::size_t max_frames, TrainStats& stats) {
  std::vector<FeatureSequence> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    out.push_back(max_frames > 0 ? trim_frames(s.features, max_frames) : s.features);
    stats.max_train_frames_seen = std::max(stats.max_train_frames_seen, out.back().rows());
  }
  return out;
}

inline std::vector<const FeatureSequence*> eval_features(std::span<const LabeledSample> samples, TrainStats& stats) {
  for (const auto& s : samples) stats.max_eval_frames_seen = std::max(stats.max_eval_frames_seen, s.features.rows());
  return feature_ptrs(samples);
}

inline std::string batch_dump(std::span<const LabeledSample> samples, std::span<const std::size_t> idx) {
  std::string out = "batch ids:";
  for (std::size_t i : idx) out += " " + samples[i].id;
  return out;
}

/// Shared epoch/validation/decay/early-stop loop. The best model (by the
/// validation criterion) is returned, not the last.
inline TrainResult run_schedule(Model& model, const TrainConfig& cfg, EarlyStopState::Kind kind,
                                const std::function<EpochOutcome(const LearningRates&)>& run_epoch,
                                const std::function<double()>& validate, const std::string& stage) {
  EarlyStopState es;
  es.kind = kind;
  TrainResult res;
  Model best = model;
  LearningRates rates = cfg.lr;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const EpochOutcome out = run_epoch(rates);
    const double crit = validate();
    res.log.push_back({epoch, out.loss, crit, rates.encoder, rates.head, out.active_fraction});
    if (es.update(crit, epoch)) best = model;
    if (es.should_stop(cfg.early_stop_patience)) break;
    if (es.should_decay(cfg.decay_patience_epochs)) {
      rates.encoder *= cfg.decay_factor;
      rates.head *= cfg.decay_factor;
    }
  }
  TrainingMetadata meta{cfg.seed, es.best_epoch, to_string(cfg.loss_mode), stage, es.best_criterion};
  res.best = Checkpoint{std::move(best), meta};
  meta.epoch = res.log.back().epoch;
  meta.criterion = res.log.back().val_criterion;
  res.final = Checkpoint{model, meta};
  return res;
}

/// |SC| between NMR distances of the validation set and its labels.
inline double nmr_validation_sc(const Model& model, std::span<const FeatureSequence* const> val,
                                std::span<const double> val_mos, std::span<const FeatureSequence* const> refs,
                                Layer layer) {
  const ReferenceSet rs = make_reference_set(model, refs, layer);
  const auto scores = nmr_scores(model, val, rs);
  try {
    return std::abs(spearman(scores, val_mos));
  } catch (const UndefinedCorrelationError&) {
    return 0.0;
  }
}

inline double mse_of(std::span<const double> pred, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - y[i]) * (pred[i] - y[i]);
  return s / static_cast<double>(pred.size());
}

inline void check_finite_loss(double v, std::span<const LabeledSample> samples, std::span<const std::size_t> idx) {
  if (!std::isfinite(v)) throw NonFiniteError("non-finite training loss; " + batch_dump(samples, idx));
}

inline double mean_label(std::span<const LabeledSample> samples) {
  double s = 0.0;
  for (const auto& x : samples) s += x.mos;
  return samples.empty() ? 0.0 : s / static_cast<double>(samples.size());
}

inline std::vector<Parameter*> with(std::vector<Parameter*> a, std::initializer_list<Parameter*> b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace detail

/// Margin actually applied for a triplet loss mode: scoreq_adaptive uses the
/// adaptive form, scoreq_fixed and offline_triplet the fixed margin m.
inline MarginSpec effective_margin(const TrainConfig& cfg) {
  MarginSpec m = cfg.margin;
  m.mode = cfg.loss_mode == LossMode::scoreq_adaptive ? MarginMode::adaptive : MarginMode::fixed;
  return m;
}

/// Step 1 of NR training: encoder g and projection f trained end-to-end with
/// the batch-all loss on random mini-batches. Validation is |SC| between NMR
/// distances and labels at cfg.validation_layer.
inline TrainResult train_scoreq(const EncoderConfig& enc, std::span<const LabeledSample> train,
                                std::span<const LabeledSample> val, std::span<const LabeledSample> refs,
                                const TrainConfig& cfg) {
  cfg.validate();
  if (cfg.loss_mode != LossMode::scoreq_fixed && cfg.loss_mode != LossMode::scoreq_adaptive) {
    throw ConfigError("train_scoreq: loss mode must be scoreq_fixed or scoreq_adaptive");
  }
  if (train.size() < cfg.batch_size) throw ConfigError("train_scoreq: dataset smaller than batch_size");
  if (val.size() < 2 || refs.empty()) throw ConfigError("train_scoreq: need validation samples and references");

  EncoderConfig ec = enc;
  ec.mos_head = false;
  Model model(ec, derive_seed(cfg.seed, 1));
  Adam opt(model.parameters());
  const MarginSpec margin = effective_margin(cfg);
  TrainStats stats;
  const auto feats = detail::training_features(train, cfg.max_train_frames, stats);
  const auto val_ptrs = detail::eval_features(val, stats);
  const auto ref_ptrs = detail::eval_features(refs, stats);
  const auto val_mos = mos_labels(val);

  std::mt19937_64 rng(derive_seed(cfg.seed, 2));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batches = train.size() / cfg.batch_size;

  auto run_epoch = [&](const LearningRates& lr) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t used = 0, active = 0, valid = 0;
    for (std::size_t b = 0; b < batches; ++b) {
      std::span<const std::size_t> idx(order.data() + b * cfg.batch_size, cfg.batch_size);
      std::vector<double> labels;
      std::vector<const FeatureSequence*> xs;
      for (std::size_t i : idx) {
        labels.push_back(train[i].mos);
        xs.push_back(&feats[i]);
      }
      const TripletMask mask = build_mask(labels);
      if (mask.valid_count() == 0) {
        ++stats.skipped_batches;
        continue;
      }
      Tape tape;
      Var h = model.encode_graph(tape, xs, true);
      Var z = model.project_graph(tape, h, true);
      LossStats ls;
      Var loss = ad::scoreq_triplet_loss(ad::pairwise_dist(z, false), mask, labels, margin, cfg.reduction, &ls);
      detail::check_finite_loss(loss.value()[0], train, idx);
      opt.zero_grad();
      tape.backward(loss);
      opt.step(lr);
      ++stats.steps;
      loss_sum += loss.value()[0];
      active += ls.active_triplets;
      valid += ls.valid_triplets;
      ++used;
    }
    return detail::EpochOutcome{used ? loss_sum / static_cast<double>(used) : 0.0,
                                valid ? static_cast<double>(active) / static_cast<double>(valid) : 0.0};
  };
  auto validate = [&] {
    return detail::nmr_validation_sc(model, val_ptrs, val_mos, ref_ptrs, cfg.validation_layer);
  };
  TrainResult res =
      detail::run_schedule(model, cfg, EarlyStopState::Kind::validation_sc_nmr, run_epoch, validate, "encoder");
  res.stats = stats;
  return res;
}

/// Offline-triplet baseline: a hard-triplet list is built once from the
/// training labels; every step draws batch_size / 3 stored triplets, embeds the
/// samples they touch and applies the fixed-margin hinge per triplet. An epoch
/// has as many steps as a batch-all epoch over the same data.
inline TrainResult train_offline(const EncoderConfig& enc, std::span<const LabeledSample> train,
                                 std::span<const LabeledSample> val, std::span<const LabeledSample> refs,
                                 const TrainConfig& cfg) {
  cfg.validate();
  if (cfg.loss_mode != LossMode::offline_triplet) throw ConfigError("train_offline: loss mode must be offline_triplet");
  if (train.size() < cfg.batch_size) throw ConfigError("train_offline: dataset smaller than batch_size");
  if (val.size() < 2 || refs.empty()) throw ConfigError("train_offline: need validation samples and references");

  EncoderConfig ec = enc;
  ec.mos_head = false;
  Model model(ec, derive_seed(cfg.seed, 1));
  Adam opt(model.parameters());
  const MarginSpec margin = effective_margin(cfg);
  TrainStats stats;
  const auto feats = detail::training_features(train, cfg.max_train_frames, stats);
  const auto val_ptrs = detail::eval_features(val, stats);
  const auto ref_ptrs = detail::eval_features(refs, stats);
  const auto val_mos = mos_labels(val);
  const auto train_mos = mos_labels(train);

  const std::size_t anchors = cfg.offline_anchors == 0 ? train.size() : cfg.offline_anchors;
  OfflineTriplets list = offline_hard_triplets(train_mos, anchors, cfg.offline_per_anchor, derive_seed(cfg.seed, 3));
  ++stats.triplet_list_builds;
  stats.offline_triplets = list.triplets.size();
  if (list.triplets.empty()) throw ConfigError("train_offline: no valid triplets in training data");

  std::mt19937_64 rng(derive_seed(cfg.seed, 2));
  std::vector<std::size_t> order(list.triplets.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();
  const std::size_t per_step = std::max<std::size_t>(1, cfg.batch_size / 3);
  const std::size_t steps_per_epoch = train.size() / cfg.batch_size;

  auto run_epoch = [&](const LearningRates& lr) {
    double loss_sum = 0.0;
    std::size_t active_total = 0, seen = 0;
    for (std::size_t step = 0; step < steps_per_epoch; ++step) {
      std::vector<Triplet> local;
      std::vector<std::size_t> members;
      std::vector<std::size_t> slot(train.size(), static_cast<std::size_t>(-1));
      auto local_index = [&](std::size_t g) {
        if (slot[g] == static_cast<std::size_t>(-1)) {
          slot[g] = members.size();
          members.push_back(g);
        }
        return slot[g];
      };
      for (std::size_t q = 0; q < per_step; ++q) {
        if (cursor >= order.size()) {
          std::shuffle(order.begin(), order.end(), rng);
          cursor = 0;
        }
        const Triplet& t = list.triplets[order[cursor++]];
        local.push_back({local_index(t.anchor), local_index(t.positive), local_index(t.negative)});
      }
      std::vector<const FeatureSequence*> xs;
      for (std::size_t g : members) xs.push_back(&feats[g]);
      std::vector<double> margins(local.size());
      for (std::size_t q = 0; q < local.size(); ++q) {
        margins[q] = margin.margin(train_mos[members[local[q].anchor]], train_mos[members[local[q].positive]],
                                   train_mos[members[local[q].negative]]);
      }
      Tape tape;
      Var h = model.encode_graph(tape, xs, true);
      Var z = model.project_graph(tape, h, true);
      std::size_t active = 0;
      Var loss = ad::triplet_list_loss(ad::pairwise_dist(z, false), local, margins, &active);
      detail::check_finite_loss(loss.value()[0], train, members);
      opt.zero_grad();
      tape.backward(loss);
      opt.step(lr);
      ++stats.steps;
      loss_sum += loss.value()[0];
      active_total += active;
      seen += local.size();
    }
    return detail::EpochOutcome{steps_per_epoch ? loss_sum / static_cast<double>(steps_per_epoch) : 0.0,
                                seen ? static_cast<double>(active_total) / static_cast<double>(seen) : 0.0};
  };
  auto validate = [&] {
    return detail::nmr_validation_sc(model, val_ptrs, val_mos, ref_ptrs, cfg.validation_layer);
  };
  TrainResult res =
      detail::run_schedule(model, cfg, EarlyStopState::Kind::validation_sc_nmr, run_epoch, validate, "encoder");
  res.stats = stats;
  return res;
}

/// Step 2 of NR training: the encoder of `encoder_ckpt` is frozen and a linear
/// MOS head on h = g(x) is fitted with the L2 loss. The projection head is not
/// used. Encoder gradients are checked to be exactly zero after every step.
inline TrainResult train_nr_head(const Checkpoint& encoder_ckpt, std::span<const LabeledSample> train,
                                 std::span<const LabeledSample> val, const TrainConfig& cfg) {
  cfg.validate();
  if (train.empty() || val.empty()) throw ConfigError("train_nr_head: empty train or validation set");
  Model model = encoder_ckpt.model;
  model.attach_mos_head(derive_seed(cfg.seed, 4));
  model.mos_head().bias.value(0, 0) = detail::mean_label(train);
  model.zero_grad();
  Linear& head = model.mos_head();
  Adam opt({&head.weight, &head.bias});
  TrainStats stats;
  const auto feats = detail::training_features(train, cfg.max_train_frames, stats);
  std::vector<const FeatureSequence*> train_ptrs;
  for (const auto& f : feats) train_ptrs.push_back(&f);
  const auto val_ptrs = detail::eval_features(val, stats);
  // Frozen encoder: representations never change, so compute them once.
  const Matrix h_train = model.encode_many(train_ptrs);
  const Matrix h_val = model.encode_many(val_ptrs);
  const auto train_mos = mos_labels(train);
  const auto val_mos = mos_labels(val);
  const auto encoder_params = model.encoder_parameters();

  std::mt19937_64 rng(derive_seed(cfg.seed, 2));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t bs = std::min(cfg.batch_size, train.size());
  const std::size_t batches = train.size() / bs;

  auto run_epoch = [&](const LearningRates& lr) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      std::span<const std::size_t> idx(order.data() + b * bs, bs);
      Matrix hb(bs, h_train.cols());
      Matrix target(bs, 1);
      for (std::size_t q = 0; q < bs; ++q) {
        std::copy(h_train.row(idx[q]).begin(), h_train.row(idx[q]).end(), hb.row(q).begin());
        target(q, 0) = train_mos[idx[q]];
      }
      Tape tape;
      Var pred = model.predict_graph(tape, tape.constant(std::move(hb)), true);
      Var loss = ad::mean_squared_error(pred, target);
      detail::check_finite_loss(loss.value()[0], train, idx);
      opt.zero_grad();
      tape.backward(loss);
      for (Parameter* p : encoder_params) {
        for (double g : p->grad.data()) {
          if (g != 0.0) throw std::logic_error("train_nr_head: gradient reached frozen encoder " + p->name);
        }
      }
      opt.step(lr);
      ++stats.steps;
      loss_sum += loss.value()[0];
    }
    return detail::EpochOutcome{batches ? loss_sum / static_cast<double>(batches) : 0.0, 0.0};
  };
  auto validate = [&] { return detail::mse_of(model.predict_many(h_val), val_mos); };
  TrainConfig head_cfg = cfg;
  TrainResult res =
      detail::run_schedule(model, head_cfg, EarlyStopState::Kind::validation_l2, run_epoch, validate, "nr_head");
  res.best.metadata.loss_mode = encoder_ckpt.metadata.loss_mode;
  res.final.metadata.loss_mode = encoder_ckpt.metadata.loss_mode;
  res.stats = stats;
  return res;
}

/// L2 baseline: encoder and a linear MOS head on h trained jointly on the
/// mean squared error; validation criterion is the validation L2 loss.
inline TrainResult train_l2_baseline(const EncoderConfig& enc, std::span<const LabeledSample> train,
                                     std::span<const LabeledSample> val, const TrainConfig& cfg) {
  cfg.validate();
  if (cfg.loss_mode != LossMode::l2) throw ConfigError("train_l2_baseline: loss mode must be l2");
  if (train.empty() || val.empty()) throw ConfigError("train_l2_baseline: empty train or validation set");
  EncoderConfig ec = enc;
  ec.mos_head = true;
  Model model(ec, derive_seed(cfg.seed, 1));
  model.mos_head().bias.value(0, 0) = detail::mean_label(train);
  Adam opt(detail::with(model.encoder_parameters(), {&model.mos_head().weight, &model.mos_head().bias}));
  TrainStats stats;
  const auto feats = detail::training_features(train, cfg.max_train_frames, stats);
  const auto val_ptrs = detail::eval_features(val, stats);
  const auto val_mos = mos_labels(val);
  const auto encoder_params = model.encoder_parameters();

  std::mt19937_64 rng(derive_seed(cfg.seed, 2));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t bs = std::min(cfg.batch_size, train.size());
  const std::size_t batches = train.size() / bs;

  auto run_epoch = [&](const LearningRates& lr) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      std::span<const std::size_t> idx(order.data() + b * bs, bs);
      std::vector<const FeatureSequence*> xs;
      Matrix target(bs, 1);
      for (std::size_t q = 0; q < bs; ++q) {
        xs.push_back(&feats[idx[q]]);
        target(q, 0) = train[idx[q]].mos;
      }
      Tape tape;
      Var h = model.encode_graph(tape, xs, true);
      Var loss = ad::mean_squared_error(model.predict_graph(tape, h, true), target);
      detail::check_finite_loss(loss.value()[0], train, idx);
      opt.zero_grad();
      tape.backward(loss);
      for (Parameter* p : encoder_params)
        for (double g : p->grad.data()) stats.max_encoder_grad = std::max(stats.max_encoder_grad, std::abs(g));
      opt.step(lr);
      ++stats.steps;
      loss_sum += loss.value()[0];
    }
    return detail::EpochOutcome{batches ? loss_sum / static_cast<double>(batches) : 0.0, 0.0};
  };
  auto validate = [&] {
    return detail::mse_of(model.predict_many(model.encode_many(val_ptrs)), val_mos);
  };
  TrainResult res =
      detail::run_schedule(model, cfg, EarlyStopState::Kind::validation_l2, run_epoch, validate, "end_to_end");
  res.stats = stats;
  return res;
}

struct GridCell {
  std::size_t batch_size = 0;
  double learning_rate = 0.0;
  double val_loss = 0.0;
};

struct GridSearchResult {
  std::vector<GridCell> cells;
  std::size_t best = 0;
};

/// One L2 baseline per (batch size, learning rate) cell, the rate applied to
/// both parameter groups; rows are ordered learning-rate-major as given.
inline GridSearchResult grid_search_l2(const EncoderConfig& enc, std::span<const LabeledSample> train,
                                       std::span<const LabeledSample> val, const TrainConfig& base,
                                       std::span<const std::size_t> batch_sizes, std::span<const double> rates) {
  if (batch_sizes.empty() || rates.empty()) throw ConfigError("grid_search_l2: empty grid");
  GridSearchResult out;
  for (double rate : rates) {
    for (std::size_t bs : batch_sizes) {
      TrainConfig cfg = base;
      cfg.loss_mode = LossMode::l2;
      cfg.batch_size = bs;
      cfg.lr = {rate, rate};
      const TrainResult r = train_l2_baseline(enc, train, val, cfg);
      out.cells.push_back({bs, rate, r.best.metadata.criterion});
    }
  }
  for (std::size_t i = 1; i < out.cells.size(); ++i)
    if (out.cells[i].val_loss < out.cells[out.best].val_loss) out.best = i;
  return out;
}

}  // namespace scoreq

#endif  // SCOREQ_TRAINING_TRAINER_HPP_
