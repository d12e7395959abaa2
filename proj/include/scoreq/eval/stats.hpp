#ifndef SCOREQ_EVAL_STATS_HPP_
#define SCOREQ_EVAL_STATS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace scoreq {

class UndefinedCorrelationError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Sample Pearson correlation.
inline double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("pearson: length mismatch");
  if (a.size() < 2) throw std::invalid_argument("pearson: need at least 2 points");
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) throw UndefinedCorrelationError("pearson: zero variance");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

/// 1-based ranks; tied values share the average of their positions.
inline std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t q = i; q <= j; ++q) ranks[idx[q]] = r;
    i = j + 1;
  }
  return ranks;
}

/// Pearson correlation of average ranks.
inline double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("spearman: length mismatch");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  return pearson(ra, rb);
}

struct MappedRmse {
  double rmse = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  /// Predictions were constant; the mapping is intercept-only.
  bool degenerate = false;
};

/// Least-squares first-order mapping mos ~ slope * pred + intercept, then the
/// RMSE of the mapped predictions against mos.
inline MappedRmse rmse_mapped(std::span<const double> pred, std::span<const double> mos) {
  if (pred.size() != mos.size()) throw std::invalid_argument("rmse_mapped: length mismatch");
  if (pred.size() < 2) throw std::invalid_argument("rmse_mapped: need at least 2 points");
  const double mp = mean(pred), mm = mean(mos);
  double spp = 0.0, spm = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    spp += (pred[i] - mp) * (pred[i] - mp);
    spm += (pred[i] - mp) * (mos[i] - mm);
  }
  MappedRmse out;
  if (spp == 0.0) {
    out.degenerate = true;
    out.slope = 0.0;
  } else {
    out.slope = spm / spp;
  }
  out.intercept = mm - out.slope * mp;
  double sse = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double r = mos[i] - (out.slope * pred[i] + out.intercept);
    sse += r * r;
  }
  out.rmse = std::sqrt(sse / static_cast<double>(pred.size()));
  return out;
}

inline double rmse(std::span<const double> pred, std::span<const double> mos) {
  if (pred.size() != mos.size() || pred.empty()) throw std::invalid_argument("rmse: length mismatch");
  double sse = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sse += (pred[i] - mos[i]) * (pred[i] - mos[i]);
  return std::sqrt(sse / static_cast<double>(pred.size()));
}

struct MetricsReport {
  double pc = 0.0;
  double sc = 0.0;
  /// Present for NR predictions only.
  bool has_rmse = false;
  double rmse_mapped = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t n = 0;
};

/// PC/SC/RMSE-after-mapping of predictions against MOS.
inline MetricsReport evaluate_predictions(std::span<const double> pred, std::span<const double> mos) {
  MetricsReport r;
  r.n = pred.size();
  r.pc = pearson(pred, mos);
  r.sc = spearman(pred, mos);
  const auto m = rmse_mapped(pred, mos);
  r.has_rmse = true;
  r.rmse_mapped = m.rmse;
  r.slope = m.slope;
  r.intercept = m.intercept;
  return r;
}

/// PC/SC of a distance-like score against MOS; no RMSE.
inline MetricsReport evaluate_scores(std::span<const double> score, std::span<const double> mos) {
  MetricsReport r;
  r.n = score.size();
  r.pc = pearson(score, mos);
  r.sc = spearman(score, mos);
  return r;
}

}  // namespace scoreq

#endif  // SCOREQ_EVAL_STATS_HPP_
