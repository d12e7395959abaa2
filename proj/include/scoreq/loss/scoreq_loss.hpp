#ifndef SCOREQ_LOSS_SCOREQ_LOSS_HPP_
#define SCOREQ_LOSS_SCOREQ_LOSS_HPP_

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scoreq/core/autodiff.hpp"
#include "scoreq/loss/mask.hpp"

namespace scoreq {

enum class MarginMode { fixed, adaptive };

/// intuitive: adaptive margin (|y_i-y_k| - |y_i-y_j|) / kappa, positive on valid
/// triplets. literal: (|y_i-y_j| - |y_i-y_k|) / kappa, the printed sign.
enum class SignMode { intuitive, literal };

enum class Reduction { mean_active, sum };

struct MarginSpec {
  MarginMode mode = MarginMode::fixed;
  double m = 0.2;
  double kappa = 4.0;
  SignMode sign = SignMode::intuitive;

  static MarginSpec fixed(double margin) { return {MarginMode::fixed, margin, 4.0, SignMode::intuitive}; }
  static MarginSpec adaptive(double kappa = 4.0, SignMode sign = SignMode::intuitive) {
    return {MarginMode::adaptive, 0.2, kappa, sign};
  }

  void validate() const {
    if (mode == MarginMode::fixed && !(m >= 0.0)) throw std::invalid_argument("MarginSpec: m must be >= 0");
    if (mode == MarginMode::adaptive && !(kappa > 0.0)) {
      throw std::invalid_argument("MarginSpec: kappa must be > 0");
    }
  }

  double margin(double yi, double yj, double yk) const {
    if (mode == MarginMode::fixed) return m;
    const double rij = label_distance(yi, yj);
    const double rik = label_distance(yi, yk);
    return sign == SignMode::intuitive ? (rik - rij) / kappa : (rij - rik) / kappa;
  }
};

struct LossStats {
  std::size_t active_triplets = 0;
  std::size_t valid_triplets = 0;
  bool no_valid_triplets = false;
};

struct LossOutput {
  double value = 0.0;
  std::size_t active_triplets = 0;
  std::size_t valid_triplets = 0;
  Reduction reduction = Reduction::mean_active;
  bool no_valid_triplets = false;
  /// dL/dz, same shape as the embeddings.
  Matrix grad;
};

namespace ad {

/// Batch-all triplet hinge over a precomputed distance matrix. Each valid
/// triplet contributes max(0, D_ij - D_ik + margin_ijk).
inline Var scoreq_triplet_loss(const Var& dist, const TripletMask& mask, std::span<const double> labels,
                               const MarginSpec& spec, Reduction reduction, LossStats* stats = nullptr) {
  spec.validate();
  Tape& t = dist.tape();
  const Matrix& d = dist.value();
  const std::size_t n = mask.n();
  if (d.rows() != n || d.cols() != n || labels.size() != n) {
    throw DimensionError("scoreq_triplet_loss: distance/labels/mask size mismatch");
  }

  // Per (i, j) and (i, k) accumulation counts of active terms.
  auto coeff = std::make_shared<Matrix>(n, n);
  double total = 0.0;
  std::size_t active = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double yi = labels[i];
    for (std::size_t j = 0; j < n; ++j) {
      auto flags = mask.negatives(i, j);
      const double dij = d(i, j);
      const double yj = labels[j];
      for (std::size_t k = 0; k < n; ++k) {
        if (!flags[k]) continue;
        const double term = dij - d(i, k) + spec.margin(yi, yj, labels[k]);
        if (term > 0.0) {
          total += term;
          ++active;
          (*coeff)(i, j) += 1.0;
          (*coeff)(i, k) -= 1.0;
        }
      }
    }
  }
  const double scale =
      reduction == Reduction::sum ? 1.0 : (active > 0 ? 1.0 / static_cast<double>(active) : 0.0);
  if (stats != nullptr) {
    stats->active_triplets = active;
    stats->valid_triplets = mask.valid_count();
    stats->no_valid_triplets = mask.valid_count() == 0;
  }
  const std::size_t id = dist.id();
  return t.record(Matrix(1, 1, total * scale), t.needs_grad(id) && active > 0,
                  [id, coeff, scale](Tape& tp, std::size_t self) {
                    const double g = tp.grad(self)[0] * scale;
                    Matrix& gd = tp.grad(id);
                    for (std::size_t i = 0; i < coeff->size(); ++i) gd[i] += g * (*coeff)[i];
                  });
}

/// Hinge over an explicit triplet list with one margin per triplet, averaged over
/// the list (not over active terms).
inline Var triplet_list_loss(const Var& dist, std::span<const Triplet> triplets,
                             std::span<const double> margins, std::size_t* active_out = nullptr) {
  Tape& t = dist.tape();
  const Matrix& d = dist.value();
  if (triplets.size() != margins.size()) throw DimensionError("triplet_list_loss: margins size");
  auto coeff = std::make_shared<Matrix>(d.rows(), d.cols());
  double total = 0.0;
  std::size_t active = 0;
  for (std::size_t q = 0; q < triplets.size(); ++q) {
    const auto& tr = triplets[q];
    const double term = d(tr.anchor, tr.positive) - d(tr.anchor, tr.negative) + margins[q];
    if (term > 0.0) {
      total += term;
      ++active;
      (*coeff)(tr.anchor, tr.positive) += 1.0;
      (*coeff)(tr.anchor, tr.negative) -= 1.0;
    }
  }
  if (active_out != nullptr) *active_out = active;
  const double scale = triplets.empty() ? 0.0 : 1.0 / static_cast<double>(triplets.size());
  const std::size_t id = dist.id();
  return t.record(Matrix(1, 1, total * scale), t.needs_grad(id) && active > 0,
                  [id, coeff, scale](Tape& tp, std::size_t self) {
                    const double g = tp.grad(self)[0] * scale;
                    Matrix& gd = tp.grad(id);
                    for (std::size_t i = 0; i < coeff->size(); ++i) gd[i] += g * (*coeff)[i];
                  });
}

}  // namespace ad

namespace detail {

inline LossOutput scoreq_on_embeddings(const Matrix& z, std::span<const double> labels,
                                       const MarginSpec& spec, Reduction reduction) {
  if (z.rows() != labels.size()) throw DimensionError("scoreq loss: embeddings/labels mismatch");
  const TripletMask mask = build_mask(labels);
  Parameter zp("z", z);
  Tape tape;
  Var zv = tape.parameter(zp);
  LossStats stats;
  Var loss = ad::scoreq_triplet_loss(ad::pairwise_dist(zv, false), mask, labels, spec, reduction, &stats);
  tape.backward(loss);
  LossOutput out;
  out.value = loss.value()[0];
  out.active_triplets = stats.active_triplets;
  out.valid_triplets = stats.valid_triplets;
  out.no_valid_triplets = stats.no_valid_triplets;
  out.reduction = reduction;
  out.grad = std::move(zp.grad);
  return out;
}

}  // namespace detail

/// Fixed-margin batch-all loss on an N x d embedding matrix.
inline LossOutput scoreq_fixed(const Matrix& z, std::span<const double> labels, const MarginSpec& spec,
                               Reduction reduction = Reduction::mean_active) {
  if (spec.mode != MarginMode::fixed) throw std::invalid_argument("scoreq_fixed: spec is not fixed-mode");
  return detail::scoreq_on_embeddings(z, labels, spec, reduction);
}

/// Adaptive-margin batch-all loss on an N x d embedding matrix.
inline LossOutput scoreq_adaptive(const Matrix& z, std::span<const double> labels, const MarginSpec& spec,
                                  Reduction reduction = Reduction::mean_active) {
  if (spec.mode != MarginMode::adaptive) {
    throw std::invalid_argument("scoreq_adaptive: spec is not adaptive-mode");
  }
  return detail::scoreq_on_embeddings(z, labels, spec, reduction);
}

/// True iff the (anchor i, positive j, negative k) term is inside the hinge,
/// i.e. ||z_i - z_j|| + margin > ||z_i - z_k||, which is exactly when the
/// triplet sends a nonzero gradient to the anchor.
inline bool adaptive_grad_condition(std::span<const double> zi, std::span<const double> zj,
                                    std::span<const double> zk, double yi, double yj, double yk,
                                    const MarginSpec& spec) {
  return euclidean_distance(zi, zj) + spec.margin(yi, yj, yk) > euclidean_distance(zi, zk);
}

/// Classification triplet loss with squared norms, summed over the batch.
inline double triplet_loss_classification(const Matrix& za, const Matrix& zp, const Matrix& zn, double m) {
  if (!za.same_shape(zp) || !za.same_shape(zn)) {
    throw DimensionError("triplet_loss_classification: shape mismatch");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < za.rows(); ++i) {
    const double term = squared_distance(za.row(i), zp.row(i)) - squared_distance(za.row(i), zn.row(i)) + m;
    if (term > 0.0) total += term;
  }
  return total;
}

}  // namespace scoreq

#endif  // SCOREQ_LOSS_SCOREQ_LOSS_HPP_
