#ifndef SCOREQ_TESTS_TEST_SUPPORT_HPP_
#define SCOREQ_TESTS_TEST_SUPPORT_HPP_

// Random generators and brute-force oracles shared by the unit tests and the
// acceptance runner. Oracles are written from the definitions, independently
// of the library's vectorised code paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "scoreq/scoreq.hpp"

namespace scoreq::testing {

inline Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> normal(0.0, sd);
  Matrix m(r, c);
  for (double& v : m.data()) v = normal(rng);
  return m;
}

/// Labels on a coarse half-point grid in [1, 5], so ties are common.
inline std::vector<double> tied_labels(std::size_t n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> step(0, 8);
  std::vector<double> y(n);
  for (double& v : y) v = 1.0 + 0.5 * step(rng);
  return y;
}

inline std::vector<double> uniform_labels(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(1.0, 5.0);
  std::vector<double> y(n);
  for (double& v : y) v = u(rng);
  return y;
}

inline bool oracle_valid(std::span<const double> y, std::size_t i, std::size_t j, std::size_t k) {
  if (i == j || i == k || j == k) return false;
  return std::fabs(y[i] - y[j]) < std::fabs(y[i] - y[k]);
}

inline double oracle_dist(const Matrix& z, std::size_t a, std::size_t b) {
  double s = 0.0;
  for (std::size_t c = 0; c < z.cols(); ++c) s += (z(a, c) - z(b, c)) * (z(a, c) - z(b, c));
  return std::sqrt(s);
}

inline double oracle_margin(const MarginSpec& spec, double yi, double yj, double yk) {
  if (spec.mode == MarginMode::fixed) return spec.m;
  const double rij = std::fabs(yi - yj), rik = std::fabs(yi - yk);
  return (spec.sign == SignMode::intuitive ? rik - rij : rij - rik) / spec.kappa;
}

struct OracleLoss {
  double value = 0.0;
  std::size_t active = 0;
  std::size_t valid = 0;
};

/// Triple loop over every ordered (i, j, k).
inline OracleLoss oracle_scoreq(const Matrix& z, std::span<const double> y, const MarginSpec& spec,
                                Reduction red) {
  OracleLoss out;
  double total = 0.0;
  const std::size_t n = y.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        if (!oracle_valid(y, i, j, k)) continue;
        ++out.valid;
        const double term = oracle_dist(z, i, j) - oracle_dist(z, i, k) + oracle_margin(spec, y[i], y[j], y[k]);
        if (term > 0.0) {
          total += term;
          ++out.active;
        }
      }
  out.value = red == Reduction::sum ? total : (out.active ? total / static_cast<double>(out.active) : 0.0);
  return out;
}

/// Loss as a function of a Parameter, for finite-difference checks.
inline ScalarGraphFn embedding_loss_fn(Parameter& z, std::vector<double> y, MarginSpec spec, Reduction red) {
  return [&z, y = std::move(y), spec, red](Tape& t) {
    const TripletMask mask = build_mask(y);
    return ad::scoreq_triplet_loss(ad::pairwise_dist(t.parameter(z), false), mask, y, spec, red);
  };
}

/// Synthetic samples with random features, for model-level tests.
inline std::vector<LabeledSample> random_samples(std::size_t n, std::size_t frames, std::size_t dim,
                                                 std::mt19937_64& rng, bool vary_length = false) {
  std::uniform_int_distribution<std::size_t> len(1, frames);
  auto y = uniform_labels(n, rng);
  std::vector<LabeledSample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].id = "s" + std::to_string(i);
    out[i].features = random_matrix(vary_length ? len(rng) : frames, dim, rng);
    out[i].mos = y[i];
    out[i].degradation = std::string(1, static_cast<char>('A' + i % 3));
  }
  return out;
}

}  // namespace scoreq::testing

#endif  // SCOREQ_TESTS_TEST_SUPPORT_HPP_
