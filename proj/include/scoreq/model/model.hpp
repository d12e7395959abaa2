#ifndef SCOREQ_MODEL_MODEL_HPP_
#define SCOREQ_MODEL_MODEL_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scoreq/core/autodiff.hpp"
#include "scoreq/core/matrix.hpp"

namespace scoreq {

/// T x input_dim frame matrix.
using FeatureSequence = Matrix;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct EncoderConfig {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_dims;
  std::size_t embed_dim = 256;
  bool mos_head = false;

  void validate() const {
    if (input_dim < 1) throw ConfigError("EncoderConfig: input_dim must be >= 1");
    if (hidden_dims.empty()) throw ConfigError("EncoderConfig: hidden_dims must be non-empty");
    for (std::size_t h : hidden_dims)
      if (h < 1) throw ConfigError("EncoderConfig: hidden dims must be >= 1");
    if (embed_dim < 1) throw ConfigError("EncoderConfig: embed_dim must be >= 1");
  }

  std::size_t representation_dim() const { return hidden_dims.back(); }

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

/// Which representation an embedding-space operation reads.
enum class Layer { projection, encoder };

inline const char* to_string(Layer l) { return l == Layer::projection ? "projection" : "encoder"; }
inline Layer layer_from_string(const std::string& s) {
  if (s == "projection") return Layer::projection;
  if (s == "encoder") return Layer::encoder;
  throw ConfigError("unknown layer '" + s + "' (expected projection|encoder)");
}

/// Fully connected layer y = x W + b with W stored as fan_in x fan_out.
struct Linear {
  Parameter weight;
  Parameter bias;

  Var apply(Tape& tape, const Var& x, bool trainable) {
    Var w = trainable ? tape.parameter(weight) : tape.constant(weight.value);
    Var b = trainable ? tape.parameter(bias) : tape.constant(bias.value);
    return ad::add_bias(ad::matmul(x, w), b);
  }
};

/// Encoder g (per-frame MLP then temporal mean pool), projection head f
/// (ReLU then linear) and an optional linear MOS head on top of g.
///
/// Hidden layers are linear+ReLU except the last, which is linear so that the
/// pooled representation h can take either sign.
class Model {
 public:
  Model() = default;

  Model(EncoderConfig config, std::uint64_t seed) : config_(std::move(config)) {
    config_.validate();
    std::mt19937_64 rng(seed);
    std::size_t fan_in = config_.input_dim;
    for (std::size_t l = 0; l < config_.hidden_dims.size(); ++l) {
      encoder_.push_back(make_linear("encoder." + std::to_string(l), fan_in, config_.hidden_dims[l],
                                     ParamGroup::encoder, rng));
      fan_in = config_.hidden_dims[l];
    }
    projection_ = make_linear("projection", fan_in, config_.embed_dim, ParamGroup::head, rng);
    if (config_.mos_head) mos_head_ = make_linear("mos_head", fan_in, 1, ParamGroup::head, rng);
  }

  const EncoderConfig& config() const { return config_; }
  bool has_mos_head() const { return mos_head_.has_value(); }

  /// Adds a freshly initialized MOS head (used when NR fitting starts from an
  /// encoder-only checkpoint).
  void attach_mos_head(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    mos_head_ = make_linear("mos_head", config_.representation_dim(), 1, ParamGroup::head, rng);
    config_.mos_head = true;
  }

  Linear& mos_head() {
    if (!mos_head_) throw ConfigError("model has no MOS head");
    return *mos_head_;
  }
  Linear& projection() { return projection_; }
  std::vector<Linear>& encoder_layers() { return encoder_; }

  /// All parameters in a fixed order (encoder layers, projection, MOS head).
  std::vector<Parameter*> parameters() {
    std::vector<Parameter*> out = encoder_parameters();
    out.push_back(&projection_.weight);
    out.push_back(&projection_.bias);
    if (mos_head_) {
      out.push_back(&mos_head_->weight);
      out.push_back(&mos_head_->bias);
    }
    return out;
  }
  std::vector<const Parameter*> parameters() const {
    std::vector<const Parameter*> out;
    for (Parameter* p : const_cast<Model*>(this)->parameters()) out.push_back(p);
    return out;
  }
  std::vector<Parameter*> encoder_parameters() {
    std::vector<Parameter*> out;
    for (Linear& l : encoder_) {
      out.push_back(&l.weight);
      out.push_back(&l.bias);
    }
    return out;
  }

  void zero_grad() {
    for (Parameter* p : parameters()) p->zero_grad();
  }

  /// Records g over a batch of sequences; returns N x representation_dim.
  Var encode_graph(Tape& tape, std::span<const FeatureSequence* const> batch, bool trainable) {
    if (batch.empty()) throw DimensionError("encode: empty batch");
    std::size_t total = 0;
    std::vector<std::size_t> offsets{0};
    for (const FeatureSequence* x : batch) {
      if (x->cols() != config_.input_dim) {
        throw DimensionError("encode: feature dim " + std::to_string(x->cols()) + " != input_dim " +
                             std::to_string(config_.input_dim));
      }
      if (x->rows() == 0) throw EmptySequenceError("encode: sequence with zero frames");
      total += x->rows();
      offsets.push_back(total);
    }
    Matrix frames(total, config_.input_dim);
    std::size_t r = 0;
    for (const FeatureSequence* x : batch) {
      std::copy(x->data().begin(), x->data().end(), frames.data().begin() + r * config_.input_dim);
      r += x->rows();
    }
    Var a = tape.constant(std::move(frames));
    for (std::size_t l = 0; l < encoder_.size(); ++l) {
      a = encoder_[l].apply(tape, a, trainable);
      if (l + 1 < encoder_.size()) a = ad::relu(a);
    }
    return ad::segment_mean(a, std::move(offsets));
  }

  Var project_graph(Tape& tape, const Var& h, bool trainable) {
    return projection_.apply(tape, ad::relu(h), trainable);
  }

  Var predict_graph(Tape& tape, const Var& h, bool trainable) {
    return mos_head().apply(tape, h, trainable);
  }

  /// Representations h for many sequences (N x representation_dim).
  Matrix encode_many(std::span<const FeatureSequence* const> batch) const {
    Tape tape;
    return self().encode_graph(tape, batch, false).value();
  }

  Matrix project_many(const Matrix& h) const {
    Tape tape;
    return self().project_graph(tape, tape.constant(h), false).value();
  }

  std::vector<double> predict_many(const Matrix& h) const {
    Tape tape;
    const Matrix p = self().predict_graph(tape, tape.constant(h), false).value();
    return p.data();
  }

  /// Embeddings at the chosen layer for many sequences.
  Matrix embed_many(std::span<const FeatureSequence* const> batch, Layer layer) const {
    Matrix h = encode_many(batch);
    return layer == Layer::encoder ? h : project_many(h);
  }

 private:
  Model& self() const { return const_cast<Model&>(*this); }

  static Linear make_linear(const std::string& name, std::size_t fan_in, std::size_t fan_out, ParamGroup group,
                            std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Matrix w(fan_in, fan_out);
    for (double& v : w.data()) v = dist(rng);
    return Linear{Parameter(name + ".weight", std::move(w), group),
                  Parameter(name + ".bias", Matrix(1, fan_out), group)};
  }

  EncoderConfig config_;
  std::vector<Linear> encoder_;
  Linear projection_;
  std::optional<Linear> mos_head_;
};

/// g(x): per-frame MLP then mean over frames.
inline std::vector<double> encode(const Model& model, const FeatureSequence& x) {
  const FeatureSequence* batch[] = {&x};
  return model.encode_many(batch).data();
}

/// f(h) = W relu(h) + b.
inline std::vector<double> project(const Model& model, std::span<const double> h) {
  return model.project_many(Matrix::row_vector(h)).data();
}

/// Raw affine MOS prediction from h = g(x); no clamping.
inline double predict_mos(const Model& model, const FeatureSequence& x) {
  if (!model.has_mos_head()) throw ConfigError("predict_mos: model has no MOS head");
  const FeatureSequence* batch[] = {&x};
  return model.predict_many(model.encode_many(batch))[0];
}

/// Embeddings of unpaired clean samples taken from one model snapshot.
struct ReferenceSet {
  Layer layer = Layer::projection;
  Matrix embeddings;

  std::size_t size() const { return embeddings.rows(); }
};

inline ReferenceSet make_reference_set(const Model& model, std::span<const FeatureSequence* const> clean,
                                       Layer layer) {
  if (clean.empty()) throw std::invalid_argument("make_reference_set: no clean samples");
  return ReferenceSet{layer, model.embed_many(clean, layer)};
}

/// Mean Euclidean distance from one embedding to every reference embedding.
inline double nmr_distance(std::span<const double> embedding, const ReferenceSet& refs) {
  if (refs.size() == 0) throw std::invalid_argument("nmr_score: empty reference set");
  double total = 0.0;
  for (std::size_t r = 0; r < refs.size(); ++r) total += euclidean_distance(embedding, refs.embeddings.row(r));
  return total / static_cast<double>(refs.size());
}

/// NMR scores for many test sequences; lower means closer to clean.
inline std::vector<double> nmr_scores(const Model& model, std::span<const FeatureSequence* const> tests,
                                      const ReferenceSet& refs) {
  if (refs.size() == 0) throw std::invalid_argument("nmr_score: empty reference set");
  const Matrix e = model.embed_many(tests, refs.layer);
  std::vector<double> out(e.rows());
  for (std::size_t i = 0; i < e.rows(); ++i) out[i] = nmr_distance(e.row(i), refs);
  return out;
}

inline double nmr_score(const Model& model, const FeatureSequence& x_test, const ReferenceSet& refs) {
  const FeatureSequence* batch[] = {&x_test};
  return nmr_scores(model, batch, refs)[0];
}

}  // namespace scoreq

#endif  // SCOREQ_MODEL_MODEL_HPP_
