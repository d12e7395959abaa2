#ifndef SCOREQ_LOSS_MASK_HPP_
#define SCOREQ_LOSS_MASK_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace scoreq {

class BatchTooSmallError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Label distance r(y_j, y_k) = |y_j - y_k|.
inline double label_distance(double yj, double yk) { return std::abs(yj - yk); }

/// Ordered index triple (anchor, positive, negative), 0-based.
struct Triplet {
  std::size_t anchor;
  std::size_t positive;
  std::size_t negative;
  friend bool operator==(const Triplet&, const Triplet&) = default;
  friend auto operator<=>(const Triplet&, const Triplet&) = default;
};

/// Validity structure over all ordered triples of a batch: (i, j, k) is valid
/// iff the three indices are pairwise distinct and |y_i - y_j| < |y_i - y_k|.
class TripletMask {
 public:
  explicit TripletMask(std::span<const double> labels) : n_(labels.size()) {
    if (n_ < 3) throw BatchTooSmallError("build_mask: batch needs at least 3 samples");
    std::vector<double> r(n_ * n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) r[i * n_ + j] = label_distance(labels[i], labels[j]);
    valid_.assign(n_ * n_ * n_, 0);
    for (std::size_t i = 0; i < n_; ++i) {
      const double* ri = &r[i * n_];
      for (std::size_t j = 0; j < n_; ++j) {
        if (j == i) continue;
        std::uint8_t* row = &valid_[(i * n_ + j) * n_];
        for (std::size_t k = 0; k < n_; ++k) {
          if (k == i || k == j) continue;
          if (ri[j] < ri[k]) {
            row[k] = 1;
            ++count_;
          }
        }
      }
    }
  }

  std::size_t n() const { return n_; }
  std::size_t valid_count() const { return count_; }

  bool operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return valid_[(i * n_ + j) * n_ + k] != 0;
  }

  /// Contiguous flags for fixed (i, j) over all k.
  std::span<const std::uint8_t> negatives(std::size_t i, std::size_t j) const {
    return {valid_.data() + (i * n_ + j) * n_, n_};
  }

  std::vector<Triplet> triplets() const {
    std::vector<Triplet> out;
    out.reserve(count_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        for (std::size_t k = 0; k < n_; ++k)
          if ((*this)(i, j, k)) out.push_back({i, j, k});
    return out;
  }

 private:
  std::size_t n_;
  std::size_t count_ = 0;
  std::vector<std::uint8_t> valid_;
};

inline TripletMask build_mask(std::span<const double> labels) { return TripletMask(labels); }

}  // namespace scoreq

#endif  // SCOREQ_LOSS_MASK_HPP_
