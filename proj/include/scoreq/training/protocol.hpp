#ifndef SCOREQ_TRAINING_PROTOCOL_HPP_
#define SCOREQ_TRAINING_PROTOCOL_HPP_

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "scoreq/data/corpus.hpp"
#include "scoreq/eval/bootstrap.hpp"
#include "scoreq/eval/diagnostics.hpp"
#include "scoreq/eval/stats.hpp"
#include "scoreq/training/trainer.hpp"

namespace scoreq {

/// Desk-scale experiment settings shared by the held-out-family protocol, the
/// in-domain diagnostics and the step benchmark.
struct ProtocolConfig {
  EncoderConfig encoder{16, {64, 32}, 32, false};
  std::size_t max_epochs = 40;
  std::size_t early_stop_patience = 20;
  double learning_rate = 1e-3;
  double head_learning_rate = 1e-2;
  std::size_t l2_batch = 64;
  std::size_t scoreq_batch = 128;
  std::size_t references = 50;
  std::size_t bootstrap_iterations = 15000;

  TrainConfig l2_config(std::uint64_t seed) const {
    TrainConfig c;
    c.loss_mode = LossMode::l2;
    c.batch_size = l2_batch;
    c.lr = {learning_rate, learning_rate};
    c.max_epochs = max_epochs;
    c.early_stop_patience = early_stop_patience;
    c.seed = seed;
    return c;
  }
  TrainConfig scoreq_config(std::uint64_t seed, LossMode mode = LossMode::scoreq_adaptive) const {
    TrainConfig c = l2_config(seed);
    c.loss_mode = mode;
    c.batch_size = scoreq_batch;
    return c;
  }
  TrainConfig head_config(std::uint64_t seed) const {
    TrainConfig c = l2_config(seed);
    c.lr = {learning_rate, head_learning_rate};
    return c;
  }
};

struct HoldoutRun {
  std::string holdout;
  std::uint64_t corpus_seed = 0;
  std::uint64_t train_seed = 0;
  std::size_t n_heldout = 0;
  double pc_l2 = 0.0;
  double pc_scoreq = 0.0;
  double pc_offline = 0.0;
  bool has_offline = false;
  /// Model A is NR-SCOREQ, model B the L2 baseline.
  BootstrapReport bootstrap;
};

inline std::vector<double> nr_predictions(const Model& model, std::span<const LabeledSample> samples) {
  return model.predict_many(model.encode_many(feature_ptrs(samples)));
}

/// One fold: a single family is removed from training and every NR model is
/// scored by PC on that family alone.
inline HoldoutRun run_holdout(const ProtocolConfig& pc, std::uint64_t corpus_seed, const std::string& holdout,
                              std::uint64_t train_seed, bool with_offline) {
  SyntheticSpec spec;
  spec.seed = corpus_seed;
  spec.holdout_families = {holdout};
  const auto corpus = generate_corpus(spec);
  const auto refs = generate_references(spec, pc.references);
  const auto train = select_split(corpus, Split::train);
  const auto val = select_split(corpus, Split::val);
  std::vector<LabeledSample> held;
  for (const auto& s : corpus)
    if (s.degradation == holdout) held.push_back(s);
  const auto mos = mos_labels(held);

  HoldoutRun run;
  run.holdout = holdout;
  run.corpus_seed = corpus_seed;
  run.train_seed = train_seed;
  run.n_heldout = held.size();

  const TrainResult l2 = train_l2_baseline(pc.encoder, train, val, pc.l2_config(train_seed));
  const auto pred_l2 = nr_predictions(l2.best.model, held);
  run.pc_l2 = pearson(pred_l2, mos);

  const TrainResult sq = train_scoreq(pc.encoder, train, val, refs, pc.scoreq_config(train_seed));
  const TrainResult sq_head = train_nr_head(sq.best, train, val, pc.head_config(train_seed));
  const auto pred_sq = nr_predictions(sq_head.best.model, held);
  run.pc_scoreq = pearson(pred_sq, mos);

  if (with_offline) {
    const TrainResult off =
        train_offline(pc.encoder, train, val, refs, pc.scoreq_config(train_seed, LossMode::offline_triplet));
    const TrainResult off_head = train_nr_head(off.best, train, val, pc.head_config(train_seed));
    run.pc_offline = pearson(nr_predictions(off_head.best.model, held), mos);
    run.has_offline = true;
  }
  run.bootstrap = bootstrap_compare(mos, pred_sq, pred_l2, pc.bootstrap_iterations, derive_seed(train_seed, 7));
  return run;
}

struct InDomainRun {
  std::uint64_t seed = 0;
  /// L2 baseline probed at the encoder output h.
  DiagnosticsReport l2;
  /// Fixed-margin SCOREQ probed at the projection output z.
  DiagnosticsReport scoreq;
  /// |Spearman| between nmr_score of the adaptive SCOREQ model and true severity.
  double nmr_severity_sc = 0.0;
};

/// In-domain comparison on the synthetic test split. The L2 model is probed at
/// h, the layer its MOS head reads; the fixed-margin SCOREQ model at z, the
/// space its loss shapes. The NMR check uses the adaptive model.
inline InDomainRun run_in_domain(const ProtocolConfig& pc, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.seed = seed;
  const auto corpus = generate_corpus(spec);
  const auto refs = generate_references(spec, pc.references);
  const auto train = select_split(corpus, Split::train);
  const auto val = select_split(corpus, Split::val);
  const auto test = select_split(corpus, Split::test);

  InDomainRun run;
  run.seed = seed;
  const TrainResult l2 = train_l2_baseline(pc.encoder, train, val, pc.l2_config(seed));
  const TrainResult sq_fixed =
      train_scoreq(pc.encoder, train, val, refs, pc.scoreq_config(seed, LossMode::scoreq_fixed));
  const TrainResult sq = train_scoreq(pc.encoder, train, val, refs, pc.scoreq_config(seed));
  run.l2 = diagnose_embeddings(l2.best.model, test, refs, Layer::encoder, seed);
  run.scoreq = diagnose_embeddings(sq_fixed.best.model, test, refs, Layer::projection, seed);

  const ReferenceSet rs = make_reference_set(sq.best.model, feature_ptrs(refs), Layer::projection);
  const auto scores = nmr_scores(sq.best.model, feature_ptrs(test), rs);
  std::vector<double> severity;
  for (const auto& s : test) severity.push_back(s.severity.value_or(0.0));
  run.nmr_severity_sc = std::abs(spearman(scores, severity));
  return run;
}

struct StepBenchmark {
  std::size_t batch_size = 0;
  std::size_t reps = 0;
  double l2_seconds = 0.0;
  double scoreq_seconds = 0.0;
  std::size_t valid_triplets = 0;
  std::size_t active_triplets = 0;
  double ratio() const { return scoreq_seconds / l2_seconds; }
};

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Median wall time of one full training step (forward, loss, backward, Adam
/// update) for the L2 baseline and the adaptive batch-all loss on the same batch.
inline StepBenchmark bench_training_step(const EncoderConfig& enc, std::size_t batch_size, std::size_t reps,
                                         std::size_t warmup, std::uint64_t seed) {
  if (batch_size < 3 || reps < 1) throw ConfigError("bench_training_step: need batch_size >= 3 and reps >= 1");
  SyntheticSpec spec;
  spec.seed = seed;
  spec.input_dim = enc.input_dim;
  spec.samples_per_family = (batch_size + spec.n_families - 1) / spec.n_families;
  const auto corpus = generate_corpus(spec);
  std::vector<const FeatureSequence*> xs;
  std::vector<double> labels;
  for (std::size_t i = 0; i < batch_size; ++i) {
    xs.push_back(&corpus[i].features);
    labels.push_back(corpus[i].mos);
  }
  const Matrix target = Matrix::column_vector(labels);

  EncoderConfig l2_enc = enc;
  l2_enc.mos_head = true;
  Model l2_model(l2_enc, seed);
  Adam l2_opt(detail::with(l2_model.encoder_parameters(), {&l2_model.mos_head().weight, &l2_model.mos_head().bias}));
  EncoderConfig sq_enc = enc;
  sq_enc.mos_head = false;
  Model sq_model(sq_enc, seed);
  Adam sq_opt(sq_model.parameters());
  const MarginSpec margin = MarginSpec::adaptive();
  const LearningRates lr{1e-5, 1e-3};

  StepBenchmark out;
  out.batch_size = batch_size;
  out.reps = reps;
  auto l2_step = [&] {
    Tape tape;
    Var h = l2_model.encode_graph(tape, xs, true);
    Var loss = ad::mean_squared_error(l2_model.predict_graph(tape, h, true), target);
    l2_opt.zero_grad();
    tape.backward(loss);
    l2_opt.step(lr);
  };
  auto sq_step = [&] {
    Tape tape;
    Var h = sq_model.encode_graph(tape, xs, true);
    Var z = sq_model.project_graph(tape, h, true);
    const TripletMask mask = build_mask(labels);
    LossStats ls;
    Var loss = ad::scoreq_triplet_loss(ad::pairwise_dist(z, false), mask, labels, margin, Reduction::mean_active, &ls);
    sq_opt.zero_grad();
    tape.backward(loss);
    sq_opt.step(lr);
    out.valid_triplets = ls.valid_triplets;
    out.active_triplets = ls.active_triplets;
  };
  auto time_of = [](auto&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  for (std::size_t w = 0; w < warmup; ++w) {
    l2_step();
    sq_step();
  }
  std::vector<double> tl2, tsq;
  for (std::size_t r = 0; r < reps; ++r) {
    tl2.push_back(time_of(l2_step));
    tsq.push_back(time_of(sq_step));
  }
  out.l2_seconds = median(tl2);
  out.scoreq_seconds = median(tsq);
  return out;
}

}  // namespace scoreq

#endif  // SCOREQ_TRAINING_PROTOCOL_HPP_
