// scoreq: command-line front end for data generation, training, evaluation,
// bootstrap comparison, embedding diagnostics and step benchmarks.

#include <CLI11.hpp>
#include <json.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "scoreq/scoreq.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace scoreq;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::uint64_t seed = 0;
  std::string out;
  bool force = false;
};

void add_common(CLI::App* sub, Common& c, bool out_required = true) {
  sub->add_option("--seed", c.seed, "Root seed")->capture_default_str();
  auto* out = sub->add_option("--out", c.out, "Output directory");
  if (out_required) out->required();
  sub->add_flag("--force", c.force, "Overwrite an existing non-empty output directory");
}

void prepare_out(const Common& c) {
  const fs::path dir(c.out);
  if (fs::exists(dir) && !fs::is_directory(dir)) throw UsageError("--out " + c.out + " exists and is not a directory");
  if (fs::exists(dir) && !fs::is_empty(dir) && !c.force) {
    throw UsageError("output directory " + c.out + " is not empty; pass --force to overwrite");
  }
  fs::create_directories(dir);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  os << text;
  if (!os) throw IoError("write failed for " + path.string());
}

void snapshot_config(const CLI::App* sub, const Common& c) {
  write_text(fs::path(c.out) / "config.toml", "[" + sub->get_name() + "]\n" + sub->config_to_str(true, false));
}

ordered_json metrics_json(const MetricsReport& m) {
  ordered_json j;
  j["n"] = m.n;
  j["pc"] = m.pc;
  j["sc"] = m.sc;
  if (m.has_rmse) {
    j["rmse"] = m.rmse_mapped;
    j["mapping_slope"] = m.slope;
    j["mapping_intercept"] = m.intercept;
  }
  return j;
}

std::string fixed(double v, int prec = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

ordered_json try_metrics(std::span<const double> pred, std::span<const double> mos, bool nr) {
  try {
    if (nr) return metrics_json(evaluate_predictions(pred, mos));
    ordered_json j = metrics_json(evaluate_scores(pred, mos));
    j["pc_abs"] = std::abs(j["pc"].get<double>());
    j["sc_abs"] = std::abs(j["sc"].get<double>());
    return j;
  } catch (const std::exception& e) {
    ordered_json j;
    j["n"] = pred.size();
    j["undefined"] = e.what();
    return j;
  }
}

std::vector<LabeledSample> load_refs(const std::string& path) {
  if (path.empty()) throw UsageError("--refs is required");
  return load_manifest(path, LabelRange{});
}

// ---------------------------------------------------------------- gen-data

struct GenArgs {
  SyntheticSpec spec;
  std::size_t references = 50;
};

int cmd_gen_data(const CLI::App* sub, const Common& c, GenArgs& a) {
  a.spec.seed = c.seed;
  a.spec.validate();
  prepare_out(c);
  const fs::path out(c.out);
  const auto corpus = generate_corpus(a.spec);
  write_manifest(out, corpus);
  const auto refs = generate_references(a.spec, a.references);
  write_manifest(out / "references", refs);

  std::ostringstream sev;
  sev << "id,degradation,severity\n";
  for (const auto& s : corpus) sev << s.id << ',' << s.degradation << ',' << format_double(*s.severity) << '\n';
  write_text(out / "severity.csv", sev.str());
  snapshot_config(sub, c);

  std::map<std::string, std::array<std::size_t, 3>> counts;
  for (const auto& s : corpus) ++counts[s.degradation][static_cast<int>(s.split)];
  std::cout << "family  corruption        train    val   test\n";
  for (const auto& [fam, n] : counts) {
    const std::size_t f = static_cast<std::size_t>(fam[0] - 'A');
    std::printf("%-7s %-16s %6zu %6zu %6zu\n", fam.c_str(), to_string(family_corruption(f)), n[0], n[1], n[2]);
  }
  std::printf("samples %zu, references %zu, written to %s\n", corpus.size(), refs.size(), c.out.c_str());
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string manifest, refs, loss = "scoreq_adaptive", sign = "intuitive", reduction = "mean_active";
  std::string validation_layer = "projection";
  bool nr = false;
  std::size_t batch_size = 0, epochs = 1000, patience = 100, decay_patience = 10, max_frames = 0;
  std::size_t offline_per_anchor = 10, offline_anchors = 0;
  double lr_encoder = 1e-5, lr_head = 1e-3, decay = 0.99, margin = 0.2, kappa = 4.0;
  std::vector<std::size_t> hidden{64, 32};
  std::size_t embed_dim = 32;
};

void write_run(const fs::path& dir, const std::string& prefix, const TrainResult& r) {
  std::ostringstream log;
  write_epoch_log_csv(log, r.log);
  write_text(dir / (prefix + "metrics.csv"), log.str());
  save_checkpoint(r.best, dir / (prefix + "best.json"));
  save_checkpoint(r.final, dir / (prefix + "final.json"));
  std::printf("%-10s best epoch %zu criterion %s (%zu epochs run)\n", r.best.metadata.stage.c_str(),
              r.best.metadata.epoch, fixed(r.best.metadata.criterion, 6).c_str(), r.log.size());
}

int cmd_train(const CLI::App* sub, const Common& c, const TrainArgs& a) {
  TrainConfig cfg;
  cfg.loss_mode = loss_mode_from_string(a.loss);
  cfg.batch_size = a.batch_size ? a.batch_size : (cfg.loss_mode == LossMode::l2 ? 64 : 128);
  cfg.lr = {a.lr_encoder, a.lr_head};
  cfg.decay_factor = a.decay;
  cfg.decay_patience_epochs = a.decay_patience;
  cfg.early_stop_patience = a.patience;
  cfg.max_epochs = a.epochs;
  cfg.seed = c.seed;
  if (a.sign != "intuitive" && a.sign != "literal") throw UsageError("--sign must be intuitive|literal");
  const SignMode sign = a.sign == "literal" ? SignMode::literal : SignMode::intuitive;
  cfg.margin = cfg.loss_mode == LossMode::scoreq_adaptive ? MarginSpec::adaptive(a.kappa, sign) : MarginSpec::fixed(a.margin);
  if (a.reduction != "mean_active" && a.reduction != "sum") throw UsageError("--reduction must be mean_active|sum");
  cfg.reduction = a.reduction == "sum" ? Reduction::sum : Reduction::mean_active;
  cfg.max_train_frames = a.max_frames;
  cfg.validation_layer = layer_from_string(a.validation_layer);
  cfg.offline_per_anchor = a.offline_per_anchor;
  cfg.offline_anchors = a.offline_anchors;
  cfg.validate();
  if (a.nr && cfg.loss_mode == LossMode::l2) throw UsageError("--nr applies to triplet losses only");

  const auto samples = load_manifest(a.manifest);
  std::vector<LabeledSample> refs;
  if (is_triplet_mode(cfg.loss_mode)) refs = load_refs(a.refs);
  const auto train = select_split(samples, Split::train);
  const auto val = select_split(samples, Split::val);
  if (train.empty() || val.empty()) throw ManifestError({a.manifest + ": need train and val rows"});
  EncoderConfig enc{train.front().features.cols(), a.hidden, a.embed_dim, false};
  enc.validate();
  prepare_out(c);
  snapshot_config(sub, c);
  const fs::path out(c.out);

  switch (cfg.loss_mode) {
    case LossMode::l2:
      write_run(out, "", train_l2_baseline(enc, train, val, cfg));
      break;
    case LossMode::scoreq_fixed:
    case LossMode::scoreq_adaptive:
    case LossMode::offline_triplet: {
      const TrainResult r = cfg.loss_mode == LossMode::offline_triplet ? train_offline(enc, train, val, refs, cfg)
                                                                       : train_scoreq(enc, train, val, refs, cfg);
      write_run(out, "", r);
      if (a.nr) write_run(out, "nr_", train_nr_head(r.best, train, val, cfg));
      break;
    }
  }
  return 0;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string checkpoint, manifest, refs, mode = "nr", layer = "projection";
};

int cmd_eval(const CLI::App* sub, const Common& c, const EvalArgs& a) {
  const bool nr = a.mode == "nr";
  if (!nr && a.mode != "nmr") throw UsageError("--mode must be nr|nmr");
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  if (nr && !ckpt.model.has_mos_head()) throw ConfigError("NR evaluation needs a checkpoint with a MOS head");
  const auto samples = load_manifest(a.manifest);
  for (const auto& s : samples) {
    if (s.features.cols() != ckpt.model.config().input_dim) {
      throw ConfigError(s.id + ": feature dim " + std::to_string(s.features.cols()) + " does not match checkpoint input_dim " +
                        std::to_string(ckpt.model.config().input_dim));
    }
  }
  std::vector<double> pred;
  if (nr) {
    pred = nr_predictions(ckpt.model, samples);
  } else {
    const auto refs = load_refs(a.refs);
    const ReferenceSet rs = make_reference_set(ckpt.model, feature_ptrs(refs), layer_from_string(a.layer));
    pred = nmr_scores(ckpt.model, feature_ptrs(samples), rs);
  }
  prepare_out(c);
  snapshot_config(sub, c);

  std::ostringstream pcsv;
  pcsv << "id,split,degradation,mos,prediction\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    pcsv << samples[i].id << ',' << to_string(samples[i].split) << ',' << samples[i].degradation << ','
         << format_double(samples[i].mos) << ',' << format_double(pred[i]) << '\n';
  }
  write_text(fs::path(c.out) / "predictions.csv", pcsv.str());

  ordered_json rep;
  rep["mode"] = a.mode;
  rep["checkpoint"] = ckpt.metadata.loss_mode + "/" + ckpt.metadata.stage;
  if (!nr) rep["layer"] = a.layer;
  ordered_json splits;
  std::printf("%-6s %-8s %6s %8s %8s%s\n", "split", "family", "n", "PC", "SC", nr ? "     RMSE" : "");
  for (Split sp : {Split::train, Split::val, Split::test}) {
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_family;
    std::vector<double> p, y;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (samples[i].split != sp) continue;
      p.push_back(pred[i]);
      y.push_back(samples[i].mos);
      by_family[samples[i].degradation].first.push_back(pred[i]);
      by_family[samples[i].degradation].second.push_back(samples[i].mos);
    }
    if (p.empty()) continue;
    ordered_json sj = try_metrics(p, y, nr);
    ordered_json fams;
    auto row = [&](const std::string& fam, const ordered_json& m) {
      std::printf("%-6s %-8s %6zu", to_string(sp), fam.c_str(), m["n"].get<std::size_t>());
      if (m.contains("pc")) {
        std::printf(" %8s %8s", fixed(m["pc"]).c_str(), fixed(m["sc"]).c_str());
        if (nr) std::printf(" %8s", fixed(m["rmse"]).c_str());
      } else {
        std::printf("  undefined");
      }
      std::printf("\n");
    };
    row("all", sj);
    for (const auto& [fam, v] : by_family) {
      fams[fam] = try_metrics(v.first, v.second, nr);
      row(fam, fams[fam]);
    }
    sj["families"] = std::move(fams);
    splits[to_string(sp)] = std::move(sj);
  }
  rep["splits"] = std::move(splits);
  write_text(fs::path(c.out) / "report.json", rep.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------- bootstrap

struct BootArgs {
  std::string mos, pred_a, pred_b, mos_column = "mos", pred_column = "prediction", name = "test";
  std::size_t iterations = 15000;
};

std::vector<std::pair<std::string, double>> read_column(const std::string& path, const std::string& column) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(is, line)) throw ManifestError({path + ":1: missing header"});
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  std::size_t id_col = header.size(), val_col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "id") id_col = i;
    if (header[i] == column) val_col = i;
  }
  if (id_col == header.size() || val_col == header.size()) {
    throw ManifestError({path + ":1: header needs columns 'id' and '" + column + "'"});
  }
  std::vector<std::pair<std::string, double>> out;
  std::vector<std::string> errors;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    double v = 0.0;
    if (f.size() != header.size()) {
      errors.push_back(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) + " columns");
    } else if (!parse_double(f[val_col], v)) {
      errors.push_back(path + ":" + std::to_string(lineno) + ": malformed float '" + std::string(f[val_col]) + "'");
    } else {
      out.emplace_back(std::string(f[id_col]), v);
    }
  }
  if (!errors.empty()) throw ManifestError(std::move(errors));
  return out;
}

int cmd_bootstrap(const CLI::App* sub, const Common& c, const BootArgs& a) {
  const auto mos = read_column(a.mos, a.mos_column);
  const auto pa = read_column(a.pred_a, a.pred_column);
  const auto pb = read_column(a.pred_b, a.pred_column);
  std::map<std::string, double> ma(pa.begin(), pa.end()), mb(pb.begin(), pb.end());
  std::vector<std::string> errors;
  std::vector<double> y, xa, xb;
  std::set<std::string> seen;
  for (const auto& [id, v] : mos) {
    seen.insert(id);
    const auto ia = ma.find(id), ib = mb.find(id);
    if (ia == ma.end()) errors.push_back(a.pred_a + ": missing id " + id);
    if (ib == mb.end()) errors.push_back(a.pred_b + ": missing id " + id);
    if (ia != ma.end() && ib != mb.end()) {
      y.push_back(v);
      xa.push_back(ia->second);
      xb.push_back(ib->second);
    }
  }
  for (const auto& [id, v] : pa)
    if (!seen.count(id)) errors.push_back(a.pred_a + ": id " + id + " not in " + a.mos);
  for (const auto& [id, v] : pb)
    if (!seen.count(id)) errors.push_back(a.pred_b + ": id " + id + " not in " + a.mos);
  if (!errors.empty()) throw ManifestError(std::move(errors));

  const BootstrapReport r = bootstrap_compare(y, xa, xb, a.iterations, c.seed);
  prepare_out(c);
  snapshot_config(sub, c);
  ordered_json j;
  j["test_set"] = a.name;
  j["n"] = r.n;
  j["pc_model_a"] = r.rho_model_a;
  j["pc_model_b"] = r.rho_model_b;
  j["p_value"] = r.p_value;
  j["ci_low"] = r.ci_low;
  j["ci_high"] = r.ci_high;
  j["outcome"] = r.outcome();
  j["iterations"] = r.iterations;
  j["seed"] = r.seed;
  j["degenerate_redraws"] = r.degenerate_redraws;
  write_text(fs::path(c.out) / "report.json", j.dump(2) + "\n");

  std::printf("| Test set | n | PC model A | PC model B | p-value | 95%% CI | Outcome |\n");
  std::printf("|---|---|---|---|---|---|---|\n");
  std::printf("| %s | %zu | %s | %s | %s | [%s, %s] | %s |\n", a.name.c_str(), r.n, fixed(r.rho_model_a).c_str(),
              fixed(r.rho_model_b).c_str(), fixed(r.p_value).c_str(), fixed(r.ci_low).c_str(),
              fixed(r.ci_high).c_str(), r.outcome().c_str());
  std::printf("iterations %zu, seed %llu\n", r.iterations, static_cast<unsigned long long>(r.seed));
  return 0;
}

// ---------------------------------------------------------------- diagnose

struct DiagArgs {
  std::string checkpoint, manifest, refs, layer = "projection", split = "test";
  std::size_t clusters = 0;
};

int cmd_diagnose(const CLI::App* sub, const Common& c, const DiagArgs& a) {
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  auto samples = load_manifest(a.manifest);
  if (a.split != "all") {
    const auto sp = split_from_string(a.split);
    if (!sp) throw UsageError("--split must be train|val|test|all");
    samples = select_split(samples, *sp);
  }
  const auto refs = load_refs(a.refs);
  const Layer layer = layer_from_string(a.layer);
  const DiagnosticsReport r = diagnose_embeddings(ckpt.model, samples, refs, layer, c.seed, a.clusters);
  prepare_out(c);
  snapshot_config(sub, c);
  ordered_json j;
  j["layer"] = to_string(r.layer);
  j["n"] = samples.size();
  j["clusters"] = r.clusters;
  j["nmi"] = r.nmi;
  j["pc_dist_mos"] = r.pc_dist_mos;
  j["explained_variance"] = {r.explained_variance[0], r.explained_variance[1]};
  write_text(fs::path(c.out) / "report.json", j.dump(2) + "\n");
  std::ostringstream csv;
  write_embeddings_csv(csv, samples, r);
  write_text(fs::path(c.out) / "embeddings_2d.csv", csv.str());
  std::printf("layer %s  n %zu  clusters %zu  NMI %s  PC(dist, MOS) %s\n", to_string(r.layer), samples.size(), r.clusters,
              fixed(r.nmi).c_str(), fixed(r.pc_dist_mos).c_str());
  return 0;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  std::vector<std::size_t> batch_sizes{128};
  std::size_t reps = 20, warmup = 3, input_dim = 16, embed_dim = 32;
  std::vector<std::size_t> hidden{64, 32};
};

int cmd_bench(const CLI::App* sub, const Common& c, const BenchArgs& a) {
  if (a.reps < 20) throw UsageError("--reps must be >= 20");
  EncoderConfig enc{a.input_dim, a.hidden, a.embed_dim, false};
  enc.validate();
  ordered_json rows = ordered_json::array();
  std::printf("%6s %10s %10s %14s %14s %8s\n", "batch", "valid", "active", "l2_step_s", "scoreq_step_s", "ratio");
  for (std::size_t n : a.batch_sizes) {
    const StepBenchmark b = bench_training_step(enc, n, a.reps, a.warmup, c.seed);
    std::printf("%6zu %10zu %10zu %14.6e %14.6e %8.3f\n", n, b.valid_triplets, b.active_triplets, b.l2_seconds,
                b.scoreq_seconds, b.ratio());
    ordered_json r;
    r["batch_size"] = n;
    r["reps"] = b.reps;
    r["valid_triplets"] = b.valid_triplets;
    r["active_triplets"] = b.active_triplets;
    r["l2_step_seconds"] = b.l2_seconds;
    r["scoreq_step_seconds"] = b.scoreq_seconds;
    r["ratio"] = b.ratio();
    rows.push_back(std::move(r));
  }
  if (!c.out.empty()) {
    prepare_out(c);
    snapshot_config(sub, c);
    write_text(fs::path(c.out) / "bench.json", rows.dump(2) + "\n");
  }
  return 0;
}

void report_error(const char* kind, const std::string& msg) {
  ordered_json j;
  j["error"] = kind;
  j["message"] = msg;
  std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SCOREQ contrastive-regression toolkit"};
  app.set_config("--config", "", "TOML/INI config file; flags override its values");
  app.require_subcommand(1);

  Common common;
  GenArgs gen;
  auto* g = app.add_subcommand("gen-data", "Write a synthetic corpus as a manifest plus feature files");
  add_common(g, common);
  g->add_option("--families", gen.spec.n_families)->capture_default_str();
  g->add_option("--samples-per-family", gen.spec.samples_per_family)->capture_default_str();
  g->add_option("--frames", gen.spec.frames)->capture_default_str();
  g->add_option("--input-dim", gen.spec.input_dim)->capture_default_str();
  g->add_option("--holdout", gen.spec.holdout_families, "Families routed entirely to test")->delimiter(',');
  g->add_option("--mos-noise", gen.spec.mos_noise_sd)->capture_default_str();
  g->add_option("--val-fraction", gen.spec.val_fraction)->capture_default_str();
  g->add_option("--test-fraction", gen.spec.test_fraction)->capture_default_str();
  g->add_option("--references", gen.references, "Clean reference samples")->capture_default_str();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a model and write a run directory");
  add_common(t, common);
  t->add_option("--manifest", tr.manifest)->required();
  t->add_option("--refs", tr.refs, "Reference manifest (triplet losses)");
  t->add_option("--loss", tr.loss)->check(CLI::IsMember({"l2", "scoreq_fixed", "scoreq_adaptive", "offline_triplet"}))
      ->capture_default_str();
  t->add_flag("--nr", tr.nr, "Chain a frozen-encoder MOS head after triplet training");
  t->add_option("--batch-size", tr.batch_size, "0 picks 64 for l2 and 128 otherwise")->capture_default_str();
  t->add_option("--epochs", tr.epochs)->capture_default_str();
  t->add_option("--patience", tr.patience)->capture_default_str();
  t->add_option("--decay", tr.decay)->capture_default_str();
  t->add_option("--decay-patience", tr.decay_patience)->capture_default_str();
  t->add_option("--lr-encoder", tr.lr_encoder)->capture_default_str();
  t->add_option("--lr-head", tr.lr_head)->capture_default_str();
  t->add_option("--margin", tr.margin)->capture_default_str();
  t->add_option("--kappa", tr.kappa)->capture_default_str();
  t->add_option("--sign", tr.sign)->capture_default_str();
  t->add_option("--reduction", tr.reduction)->capture_default_str();
  t->add_option("--max-frames", tr.max_frames)->capture_default_str();
  t->add_option("--validation-layer", tr.validation_layer)->capture_default_str();
  t->add_option("--offline-per-anchor", tr.offline_per_anchor)->capture_default_str();
  t->add_option("--offline-anchors", tr.offline_anchors)->capture_default_str();
  t->add_option("--hidden", tr.hidden)->delimiter(',')->capture_default_str();
  t->add_option("--embed-dim", tr.embed_dim)->capture_default_str();

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score a manifest with a checkpoint (NR or NMR)");
  add_common(e, common);
  e->add_option("--checkpoint", ev.checkpoint)->required();
  e->add_option("--manifest", ev.manifest)->required();
  e->add_option("--mode", ev.mode)->capture_default_str();
  e->add_option("--refs", ev.refs);
  e->add_option("--layer", ev.layer)->capture_default_str();

  BootArgs bo;
  auto* b = app.add_subcommand("bootstrap", "Paired bootstrap of the PC difference between two prediction files");
  add_common(b, common);
  b->add_option("--mos", bo.mos)->required();
  b->add_option("--pred-a", bo.pred_a)->required();
  b->add_option("--pred-b", bo.pred_b)->required();
  b->add_option("--mos-column", bo.mos_column)->capture_default_str();
  b->add_option("--pred-column", bo.pred_column)->capture_default_str();
  b->add_option("--iterations", bo.iterations)->capture_default_str();
  b->add_option("--name", bo.name)->capture_default_str();

  DiagArgs di;
  auto* d = app.add_subcommand("diagnose", "PCA, k-means/NMI and NMR-distance diagnostics of embeddings");
  add_common(d, common);
  d->add_option("--checkpoint", di.checkpoint)->required();
  d->add_option("--manifest", di.manifest)->required();
  d->add_option("--refs", di.refs)->required();
  d->add_option("--layer", di.layer)->capture_default_str();
  d->add_option("--split", di.split)->capture_default_str();
  d->add_option("--clusters", di.clusters, "0 uses the number of families")->capture_default_str();

  BenchArgs be;
  auto* bn = app.add_subcommand("bench", "Median training-step time, L2 vs SCOREQ");
  add_common(bn, common, false);
  bn->add_option("--batch-sizes", be.batch_sizes)->delimiter(',')->capture_default_str();
  bn->add_option("--reps", be.reps)->capture_default_str();
  bn->add_option("--warmup", be.warmup)->capture_default_str();
  bn->add_option("--input-dim", be.input_dim)->capture_default_str();
  bn->add_option("--hidden", be.hidden)->delimiter(',')->capture_default_str();
  bn->add_option("--embed-dim", be.embed_dim)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    if (err.get_exit_code() == 0) return app.exit(err);
    report_error("usage", err.what());
    return 2;
  }

  try {
    if (*g) return cmd_gen_data(g, common, gen);
    if (*t) return cmd_train(t, common, tr);
    if (*e) return cmd_eval(e, common, ev);
    if (*b) return cmd_bootstrap(b, common, bo);
    if (*d) return cmd_diagnose(d, common, di);
    if (*bn) return cmd_bench(bn, common, be);
  } catch (const UsageError& err) {
    report_error("usage", err.what());
    return 2;
  } catch (const ConfigError& err) {
    report_error("config", err.what());
    return 2;
  } catch (const ManifestError& err) {
    report_error("manifest", err.what());
    return 1;
  } catch (const IoError& err) {
    report_error("io", err.what());
    return 1;
  } catch (const CheckpointError& err) {
    report_error("checkpoint", err.what());
    return 1;
  } catch (const std::exception& err) {
    report_error("runtime", err.what());
    return 1;
  }
  return 0;
}
