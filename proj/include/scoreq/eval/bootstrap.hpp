#ifndef SCOREQ_EVAL_BOOTSTRAP_HPP_
#define SCOREQ_EVAL_BOOTSTRAP_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scoreq/eval/stats.hpp"

namespace scoreq {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for stream `index` under a root seed.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
  return splitmix64(root ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

struct BootstrapReport {
  double rho_model_a = 0.0;
  double rho_model_b = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double p_value = 1.0;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  std::size_t degenerate_redraws = 0;
  std::size_t n = 0;

  bool significant() const { return ci_low > 0.0 || ci_high < 0.0; }
  /// "model A", "model B" or "No Diff."
  std::string outcome() const {
    if (!significant()) return "No Diff.";
    return ci_low > 0.0 ? "model A" : "model B";
  }
};

class BootstrapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Linear-interpolated empirical quantile of sorted data.
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile_sorted: empty");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

/// Paired bootstrap of rho_d = PC(mos, pred_a) - PC(mos, pred_b).
///
/// Each iteration draws n indices with replacement from its own stream
/// derive_seed(seed, iteration), so results do not depend on evaluation order.
/// Resamples with zero variance are redrawn; more than 1% of iterations
/// needing a redraw aborts. The 95% CI is the 2.5/97.5 percentile interval;
/// p = 2 min((#{rho_d <= 0} + 1)/(B + 1), (#{rho_d >= 0} + 1)/(B + 1)), capped at 1.
inline BootstrapReport bootstrap_compare(std::span<const double> mos, std::span<const double> pred_a,
                                         std::span<const double> pred_b, std::size_t iterations = 15000,
                                         std::uint64_t seed = 0) {
  const std::size_t n = mos.size();
  if (pred_a.size() != n || pred_b.size() != n) throw std::invalid_argument("bootstrap_compare: length mismatch");
  if (n < 10) throw std::invalid_argument("bootstrap_compare: need at least 10 samples");
  if (iterations < 1) throw std::invalid_argument("bootstrap_compare: iterations must be >= 1");

  BootstrapReport rep;
  rep.iterations = iterations;
  rep.seed = seed;
  rep.n = n;
  rep.rho_model_a = pearson(mos, pred_a);
  rep.rho_model_b = pearson(mos, pred_b);

  const std::size_t max_degenerate = iterations / 100;
  std::vector<double> diffs(iterations);
  std::vector<double> rm(n), ra(n), rb(n);
  for (std::size_t it = 0; it < iterations; ++it) {
    std::mt19937_64 rng(derive_seed(seed, it));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    while (true) {
      for (std::size_t q = 0; q < n; ++q) {
        const std::size_t i = pick(rng);
        rm[q] = mos[i];
        ra[q] = pred_a[i];
        rb[q] = pred_b[i];
      }
      try {
        diffs[it] = pearson(rm, ra) - pearson(rm, rb);
        break;
      } catch (const UndefinedCorrelationError&) {
        if (++rep.degenerate_redraws > max_degenerate) {
          throw BootstrapError("bootstrap_compare: more than 1% of resamples were degenerate");
        }
      }
    }
  }

  std::size_t le = 0, ge = 0;
  for (double d : diffs) {
    le += d <= 0.0;
    ge += d >= 0.0;
  }
  std::sort(diffs.begin(), diffs.end());
  rep.ci_low = quantile_sorted(diffs, 0.025);
  rep.ci_high = quantile_sorted(diffs, 0.975);
  const double denom = static_cast<double>(iterations + 1);
  const double tail = std::min(static_cast<double>(le + 1), static_cast<double>(ge + 1)) / denom;
  rep.p_value = std::clamp(2.0 * tail, 0.0, 1.0);
  return rep;
}

}  // namespace scoreq

#endif  // SCOREQ_EVAL_BOOTSTRAP_HPP_
