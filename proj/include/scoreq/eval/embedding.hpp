#ifndef SCOREQ_EVAL_EMBEDDING_HPP_
#define SCOREQ_EVAL_EMBEDDING_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "scoreq/core/matrix.hpp"

namespace scoreq {

struct PcaResult {
  Matrix coords;      // N x 2
  Matrix components;  // 2 x d, orthonormal rows
  double explained_variance[2] = {0.0, 0.0};
  /// Data has rank < 2; the second component is zero.
  bool rank_deficient = false;
};

/// Top-2 principal directions of the mean-centred rows of z. Each component is
/// signed so its largest-magnitude coordinate is positive.
inline PcaResult pca2(const Matrix& z) {
  const std::size_t n = z.rows(), d = z.cols();
  if (n < 3 || d < 2) throw DimensionError("pca2: need N >= 3 and d >= 2");
  Eigen::MatrixXd x(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) x(i, j) = z(i, j);
  const Eigen::RowVectorXd mu = x.colwise().mean();
  x.rowwise() -= mu;
  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  const Eigen::VectorXd& evals = solver.eigenvalues();  // ascending
  const Eigen::MatrixXd& evecs = solver.eigenvectors();

  PcaResult out;
  out.components = Matrix(2, d);
  const double scale = std::max(1.0, std::abs(evals(d - 1)));
  const double tol = 1e-10 * scale;
  for (std::size_t c = 0; c < 2; ++c) {
    const Eigen::Index col = static_cast<Eigen::Index>(d - 1 - c);
    double ev = std::max(0.0, evals(col));
    if (ev <= tol) {
      out.rank_deficient = true;
      if (c == 1) {
        out.explained_variance[c] = 0.0;
        continue;
      }
    }
    Eigen::VectorXd v = evecs.col(col);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    for (std::size_t j = 0; j < d; ++j) out.components(c, j) = v(static_cast<Eigen::Index>(j));
    out.explained_variance[c] = ev;
  }
  out.coords = Matrix(n, 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < 2; ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += x(i, j) * out.components(c, j);
      out.coords(i, c) = s;
    }
  return out;
}

struct KMeansResult {
  std::vector<int> assignments;
  Matrix centroids;
  double inertia = 0.0;
  /// Inertia after each Lloyd iteration of the kept restart.
  std::vector<double> inertia_history;
};

struct KMeansOptions {
  std::size_t k = 5;
  std::uint64_t seed = 0;
  std::size_t max_iter = 300;
  std::size_t restarts = 10;
};

namespace detail {

inline double assign_points(const Matrix& z, const Matrix& centroids, std::vector<int>& assign) {
  double inertia = 0.0;
  for (std::size_t i = 0; i < z.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (std::size_t c = 0; c < centroids.rows(); ++c) {
      const double dist = squared_distance(z.row(i), centroids.row(c));
      if (dist < best) {
        best = dist;
        arg = static_cast<int>(c);
      }
    }
    assign[i] = arg;
    inertia += best;
  }
  return inertia;
}

inline Matrix kmeans_plus_plus(const Matrix& z, std::size_t k, std::mt19937_64& rng) {
  const std::size_t n = z.rows();
  Matrix centroids(k, z.cols());
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  const std::size_t f = first(rng);
  std::copy(z.row(f).begin(), z.row(f).end(), centroids.row(0).begin());
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(z.row(i), centroids.row(0));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick = 0;
    if (total > 0.0) {
      double target = unit(rng) * total;
      for (pick = 0; pick + 1 < n; ++pick) {
        target -= d2[pick];
        if (target < 0.0) break;
      }
    } else {
      pick = first(rng);
    }
    std::copy(z.row(pick).begin(), z.row(pick).end(), centroids.row(c).begin());
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(z.row(i), centroids.row(c)));
  }
  return centroids;
}

}  // namespace detail

/// Lloyd's algorithm with k-means++ seeding; the restart with the lowest
/// inertia is kept. Empty clusters are re-seeded from the point farthest from
/// its current centroid.
inline KMeansResult kmeans(const Matrix& z, const KMeansOptions& opt = {}) {
  const std::size_t n = z.rows(), k = opt.k;
  if (k < 1 || n < k) throw std::invalid_argument("kmeans: need 1 <= k <= N");
  std::mt19937_64 rng(opt.seed);
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < std::max<std::size_t>(1, opt.restarts); ++r) {
    KMeansResult run;
    run.centroids = detail::kmeans_plus_plus(z, k, rng);
    run.assignments.assign(n, -1);
    std::vector<int> assign(n);
    for (std::size_t it = 0; it < opt.max_iter; ++it) {
      const double inertia = detail::assign_points(z, run.centroids, assign);
      run.inertia_history.push_back(inertia);
      const bool changed = assign != run.assignments;
      run.assignments = assign;
      run.inertia = inertia;
      if (!changed) break;
      Matrix sums(k, z.cols());
      std::vector<std::size_t> counts(k, 0);
      for (std::size_t i = 0; i < n; ++i) {
        auto row = sums.row(static_cast<std::size_t>(assign[i]));
        for (std::size_t j = 0; j < z.cols(); ++j) row[j] += z(i, j);
        ++counts[static_cast<std::size_t>(assign[i])];
      }
      for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) {
          std::size_t far = 0;
          double far_d = -1.0;
          for (std::size_t i = 0; i < n; ++i) {
            const double dist =
                squared_distance(z.row(i), run.centroids.row(static_cast<std::size_t>(assign[i])));
            if (dist > far_d) {
              far_d = dist;
              far = i;
            }
          }
          std::copy(z.row(far).begin(), z.row(far).end(), run.centroids.row(c).begin());
          continue;
        }
        for (std::size_t j = 0; j < z.cols(); ++j) run.centroids(c, j) = sums(c, j) / static_cast<double>(counts[c]);
      }
    }
    if (run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

/// Normalised mutual information with arithmetic-mean normalisation,
/// 2 I(A;B) / (H(A) + H(B)), natural log. Zero when either partition has a
/// single class.
template <typename LabelA, typename LabelB>
double nmi(const std::vector<LabelA>& a, const std::vector<LabelB>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("nmi: length mismatch");
  if (a.empty()) return 0.0;
  const double n = static_cast<double>(a.size());
  std::map<LabelA, double> ca;
  std::map<LabelB, double> cb;
  std::map<std::pair<LabelA, LabelB>, double> joint;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca[a[i]] += 1.0;
    cb[b[i]] += 1.0;
    joint[{a[i], b[i]}] += 1.0;
  }
  auto entropy = [n](const auto& counts) {
    double h = 0.0;
    for (const auto& [_, c] : counts) h -= (c / n) * std::log(c / n);
    return h;
  };
  const double ha = entropy(ca), hb = entropy(cb);
  if (ca.size() < 2 || cb.size() < 2) return 0.0;
  double mi = 0.0;
  for (const auto& [key, c] : joint) {
    const double pxy = c / n;
    mi += pxy * std::log(pxy / ((ca[key.first] / n) * (cb[key.second] / n)));
  }
  return std::clamp(2.0 * mi / (ha + hb), 0.0, 1.0);
}

}  // namespace scoreq

#endif  // SCOREQ_EVAL_EMBEDDING_HPP_
