#ifndef SCOREQ_DATA_CORPUS_HPP_
#define SCOREQ_DATA_CORPUS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "scoreq/data/sample.hpp"

namespace scoreq {

/// Parametric corruption applied by a degradation family.
enum class CorruptionKind { additive_noise, frame_dropout, clipping, smoothing, channel_scaling };

/// Strictly increasing map from severity [0,1] to quality loss [0,1].
enum class ResponseShape { linear, convex, concave, sigmoid, stepped };

inline constexpr std::size_t kMaxFamilies = 5;

inline std::string family_tag(std::size_t f) { return std::string(1, static_cast<char>('A' + f)); }

inline CorruptionKind family_corruption(std::size_t f) { return static_cast<CorruptionKind>(f % kMaxFamilies); }
inline ResponseShape family_response(std::size_t f) { return static_cast<ResponseShape>(f % kMaxFamilies); }

inline const char* to_string(CorruptionKind k) {
  switch (k) {
    case CorruptionKind::additive_noise: return "additive_noise";
    case CorruptionKind::frame_dropout: return "frame_dropout";
    case CorruptionKind::clipping: return "clipping";
    case CorruptionKind::smoothing: return "smoothing";
    case CorruptionKind::channel_scaling: return "channel_scaling";
  }
  return "?";
}

inline double response(ResponseShape shape, double s) {
  switch (shape) {
    case ResponseShape::linear: return s;
    case ResponseShape::convex: return s * s;
    case ResponseShape::concave: return std::sqrt(s);
    case ResponseShape::sigmoid: {
      auto f = [](double v) { return 1.0 / (1.0 + std::exp(-10.0 * (v - 0.5))); };
      return (f(s) - f(0.0)) / (f(1.0) - f(0.0));
    }
    case ResponseShape::stepped: {
      const double step = std::min(std::floor(4.0 * s), 3.0) / 3.0;
      return 0.8 * step + 0.2 * s;
    }
  }
  return s;
}

/// Label before listening noise: 1 + 4 (1 - response(s)).
inline double noiseless_mos(std::size_t family, double severity) {
  return 1.0 + 4.0 * (1.0 - response(family_response(family), severity));
}

struct SyntheticSpec {
  std::size_t n_families = 5;
  std::size_t samples_per_family = 400;
  std::size_t frames = 20;
  std::size_t input_dim = 16;
  std::uint64_t seed = 0;
  std::vector<std::string> holdout_families;
  double mos_noise_sd = 0.15;
  /// Number of clean content prototypes in the Gaussian mixture.
  std::size_t n_prototypes = 8;
  /// In-domain fractions routed to val and test by id hash.
  double val_fraction = 0.15;
  double test_fraction = 0.15;

  void validate() const {
    if (n_families < 2 || n_families > kMaxFamilies) {
      throw ConfigError("SyntheticSpec: n_families must be in [2, 5]");
    }
    if (samples_per_family < 1 || frames < 1 || input_dim < 2 || n_prototypes < 1) {
      throw ConfigError("SyntheticSpec: sizes must be positive (input_dim >= 2)");
    }
    if (!(mos_noise_sd >= 0.0)) throw ConfigError("SyntheticSpec: mos_noise_sd must be >= 0");
    if (val_fraction < 0.0 || test_fraction < 0.0 || val_fraction + test_fraction >= 1.0) {
      throw ConfigError("SyntheticSpec: val/test fractions must be >= 0 and sum below 1");
    }
    std::set<std::string> tags;
    for (std::size_t f = 0; f < n_families; ++f) tags.insert(family_tag(f));
    for (const auto& h : holdout_families) {
      if (!tags.count(h)) throw ConfigError("SyntheticSpec: unknown holdout family '" + h + "'");
    }
    if (holdout_families.size() >= n_families) {
      throw ConfigError("SyntheticSpec: holdout covers every family");
    }
  }
};

/// Stable 64-bit hash of an id mapped to [0,1).
inline double id_unit_hash(const std::string& id) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : id) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  // splitmix64 finalizer
  h += 0x9e3779b97f4a7c15ULL;
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
  h ^= h >> 31;
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

/// Split for an in-domain sample: u < test_fraction -> test, then val_fraction -> val, else train.
inline Split route_by_hash(const std::string& id, double val_fraction, double test_fraction) {
  const double u = id_unit_hash(id);
  if (u < test_fraction) return Split::test;
  return u < test_fraction + val_fraction ? Split::val : Split::train;
}

struct SplitSet {
  std::vector<LabeledSample> train;
  std::vector<LabeledSample> val;
  std::vector<LabeledSample> test;
};

/// Holdout families go entirely to test; every other sample is routed by route_by_hash.
inline SplitSet split_by_family(std::span<const LabeledSample> samples, std::span<const std::string> holdout,
                                double val_fraction = 0.2, double test_fraction = 0.0) {
  if (holdout.empty()) throw ConfigError("split_by_family: holdout must be non-empty");
  const std::set<std::string> held(holdout.begin(), holdout.end());
  bool any_training_family = false;
  for (const auto& s : samples) any_training_family |= !held.count(s.degradation);
  if (!samples.empty() && !any_training_family) {
    throw ConfigError("split_by_family: holdout covers all families, no training data");
  }
  SplitSet out;
  for (LabeledSample s : samples) {
    s.split = held.count(s.degradation) ? Split::test : route_by_hash(s.id, val_fraction, test_fraction);
    (s.split == Split::train ? out.train : s.split == Split::val ? out.val : out.test).push_back(std::move(s));
  }
  return out;
}

namespace detail {

struct Prototypes {
  std::vector<std::vector<double>> means;
  std::vector<std::vector<double>> directions;
};

inline Prototypes draw_prototypes(const SyntheticSpec& spec, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Prototypes p;
  for (std::size_t c = 0; c < spec.n_prototypes; ++c) {
    std::vector<double> mu(spec.input_dim), dir(spec.input_dim);
    double norm = 0.0;
    for (std::size_t d = 0; d < spec.input_dim; ++d) {
      mu[d] = normal(rng);
      dir[d] = normal(rng);
      norm += dir[d] * dir[d];
    }
    norm = std::sqrt(norm);
    for (double& v : dir) v /= norm;
    p.means.push_back(std::move(mu));
    p.directions.push_back(std::move(dir));
  }
  return p;
}

inline constexpr double kHarmonicLevel = 1.5;

/// Trailing quarter of the channels carries a harmonic signature that every
/// family attenuates with severity.
inline std::size_t harmonic_begin(std::size_t input_dim) { return input_dim - std::max<std::size_t>(1, input_dim / 4); }

/// Clean frames: prototype mean plus a per-sample offset, a sinusoidal
/// trajectory along the prototype direction and small frame jitter.
inline FeatureSequence clean_sequence(const SyntheticSpec& spec, const Prototypes& protos, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, protos.means.size() - 1);
  std::uniform_real_distribution<double> phase(0.0, 6.283185307179586);
  std::uniform_real_distribution<double> freq(0.4, 1.2);
  const std::size_t c = pick(rng);
  std::vector<double> offset(spec.input_dim);
  for (double& v : offset) v = 0.3 * normal(rng);
  const double ph = phase(rng);
  const double w = freq(rng);
  FeatureSequence x(spec.frames, spec.input_dim);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    const double a = 1.5 * std::sin(w * static_cast<double>(t) + ph);
    for (std::size_t d = 0; d < spec.input_dim; ++d) {
      x(t, d) = protos.means[c][d] + offset[d] + a * protos.directions[c][d] + 0.2 * normal(rng);
      if (d >= harmonic_begin(spec.input_dim)) x(t, d) += kHarmonicLevel;
    }
  }
  return x;
}

inline void corrupt(FeatureSequence& x, CorruptionKind kind, double s, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t T = x.rows(), D = x.cols();
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t d = harmonic_begin(D); d < D; ++d) x(t, d) -= kHarmonicLevel * 0.8 * s;
  switch (kind) {
    case CorruptionKind::additive_noise:
      for (double& v : x.data()) v += 1.5 * s * normal(rng);
      break;
    case CorruptionKind::frame_dropout:
      for (std::size_t t = 0; t < T; ++t) {
        if (unit(rng) < 0.7 * s) std::fill(x.row(t).begin(), x.row(t).end(), 0.0);
      }
      break;
    case CorruptionKind::clipping: {
      double peak = 0.0;
      for (double v : x.data()) peak = std::max(peak, std::abs(v));
      const double level = (1.0 - 0.8 * s) * peak;
      for (double& v : x.data()) v = std::clamp(v, -level, level);
      break;
    }
    case CorruptionKind::smoothing: {
      const std::size_t half = static_cast<std::size_t>(std::floor(s * 5.0));
      FeatureSequence out(T, D);
      for (std::size_t t = 0; t < T; ++t) {
        const std::size_t lo = t >= half ? t - half : 0;
        const std::size_t hi = std::min(T - 1, t + half);
        for (std::size_t u = lo; u <= hi; ++u)
          for (std::size_t d = 0; d < D; ++d) out(t, d) += x(u, d);
        const double inv = 1.0 / static_cast<double>(hi - lo + 1);
        for (std::size_t d = 0; d < D; ++d) out(t, d) *= inv;
      }
      x = std::move(out);
      break;
    }
    case CorruptionKind::channel_scaling:
      for (std::size_t t = 0; t < T; ++t)
        for (std::size_t d = 0; d < D; ++d)
          x(t, d) *= 1.0 - 0.9 * s * static_cast<double>(d) / static_cast<double>(D - 1);
      break;
  }
}

}  // namespace detail

/// Seeded synthetic corpus: clean sequences from a Gaussian mixture, each
/// family applying its own corruption at severity s ~ U[0,1] with label
/// clamp(1 + 4 (1 - response_f(s)) + N(0, mos_noise_sd), 1, 5).
inline std::vector<LabeledSample> generate_corpus(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const detail::Prototypes protos = detail::draw_prototypes(spec, rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<LabeledSample> samples;
  samples.reserve(spec.n_families * spec.samples_per_family);
  for (std::size_t f = 0; f < spec.n_families; ++f) {
    for (std::size_t i = 0; i < spec.samples_per_family; ++i) {
      LabeledSample s;
      char buf[32];
      std::snprintf(buf, sizeof buf, "%s_%05zu", family_tag(f).c_str(), i);
      s.id = buf;
      s.degradation = family_tag(f);
      const double severity = unit(rng);
      s.severity = severity;
      s.features = detail::clean_sequence(spec, protos, rng);
      detail::corrupt(s.features, family_corruption(f), severity, rng);
      s.mos = std::clamp(noiseless_mos(f, severity) + spec.mos_noise_sd * normal(rng), 1.0, 5.0);
      samples.push_back(std::move(s));
    }
  }

  const std::set<std::string> held(spec.holdout_families.begin(), spec.holdout_families.end());
  for (LabeledSample& s : samples) {
    s.split = held.count(s.degradation) ? Split::test : route_by_hash(s.id, spec.val_fraction, spec.test_fraction);
  }
  return samples;
}

/// Unpaired clean samples from the same prototype mixture, drawn from an
/// independent stream so they never coincide with corpus content.
inline std::vector<LabeledSample> generate_references(const SyntheticSpec& spec, std::size_t count) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const detail::Prototypes protos = detail::draw_prototypes(spec, rng);
  std::mt19937_64 ref_rng(spec.seed ^ 0x5851f42d4c957f2dULL);
  std::vector<LabeledSample> refs;
  for (std::size_t i = 0; i < count; ++i) {
    LabeledSample s;
    char buf[32];
    std::snprintf(buf, sizeof buf, "ref_%05zu", i);
    s.id = buf;
    s.degradation = "clean";
    s.severity = 0.0;
    s.mos = 5.0;
    s.split = Split::test;
    s.features = detail::clean_sequence(spec, protos, ref_rng);
    refs.push_back(std::move(s));
  }
  return refs;
}

}  // namespace scoreq

#endif  // SCOREQ_DATA_CORPUS_HPP_
