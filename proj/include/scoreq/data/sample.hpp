#ifndef SCOREQ_DATA_SAMPLE_HPP_
#define SCOREQ_DATA_SAMPLE_HPP_

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "scoreq/model/model.hpp"

namespace scoreq {

enum class Split { train, val, test };

inline const char* to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

inline std::optional<Split> split_from_string(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  return std::nullopt;
}

struct LabelRange {
  double min = 1.0;
  double max = 5.0;
  bool contains(double y) const { return y >= min && y <= max; }
  double span() const { return max - min; }
};

struct LabeledSample {
  std::string id;
  FeatureSequence features;
  double mos = 0.0;
  std::string degradation;
  /// Known only for generated samples.
  std::optional<double> severity;
  Split split = Split::train;
};

inline std::vector<const FeatureSequence*> feature_ptrs(std::span<const LabeledSample> samples) {
  std::vector<const FeatureSequence*> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(&s.features);
  return out;
}

inline std::vector<double> mos_labels(std::span<const LabeledSample> samples) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.mos);
  return out;
}

/// Distinct degradation tags in sorted order.
inline std::vector<std::string> families_of(std::span<const LabeledSample> samples) {
  std::set<std::string> fams;
  for (const auto& s : samples) fams.insert(s.degradation);
  return {fams.begin(), fams.end()};
}

inline std::vector<LabeledSample> select_split(std::span<const LabeledSample> samples, Split split) {
  std::vector<LabeledSample> out;
  std::copy_if(samples.begin(), samples.end(), std::back_inserter(out),
               [split](const LabeledSample& s) { return s.split == split; });
  return out;
}

/// First max_frames frames of x; unchanged when x is already short enough.
inline FeatureSequence trim_frames(const FeatureSequence& x, std::size_t max_frames) {
  if (max_frames < 1) throw std::invalid_argument("trim_frames: max_frames must be >= 1");
  if (x.rows() <= max_frames) return x;
  std::vector<double> data(x.data().begin(), x.data().begin() + static_cast<std::ptrdiff_t>(max_frames * x.cols()));
  return FeatureSequence(max_frames, x.cols(), std::move(data));
}

}  // namespace scoreq

#endif  // SCOREQ_DATA_SAMPLE_HPP_
