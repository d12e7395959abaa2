#ifndef SCOREQ_LOSS_OFFLINE_HPP_
#define SCOREQ_LOSS_OFFLINE_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <queue>
#include <random>
#include <span>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "scoreq/loss/mask.hpp"

namespace scoreq {

struct OfflineTriplets {
  std::vector<Triplet> triplets;
  /// Anchors that had no valid (positive, negative) pair.
  std::vector<std::size_t> skipped_anchors;
};

/// Hard-triplet sampler: for each sampled anchor, keep the per_anchor valid
/// (positive, negative) pairs with the smallest label-distance gap
/// |y_a - y_n| - |y_a - y_p|, ties broken by ascending (positive, negative).
///
/// Anchors are a seeded random subset of size anchors_per_epoch (all samples
/// when anchors_per_epoch >= labels.size()), visited in ascending index order.
inline OfflineTriplets offline_hard_triplets(std::span<const double> labels, std::size_t anchors_per_epoch,
                                             std::size_t per_anchor, std::uint64_t seed) {
  const std::size_t n = labels.size();
  if (n < 3) throw BatchTooSmallError("offline_hard_triplets: need at least 3 samples");
  if (per_anchor < 1) throw std::invalid_argument("offline_hard_triplets: per_anchor must be >= 1");

  std::vector<std::size_t> anchors(n);
  std::iota(anchors.begin(), anchors.end(), 0);
  if (anchors_per_epoch < n) {
    std::mt19937_64 rng(seed);
    std::shuffle(anchors.begin(), anchors.end(), rng);
    anchors.resize(anchors_per_epoch);
    std::sort(anchors.begin(), anchors.end());
  }

  OfflineTriplets out;
  std::vector<std::size_t> order;
  std::vector<double> r(n);
  for (std::size_t a : anchors) {
    // Candidates sorted by (label distance to anchor, index).
    order.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (i == a) continue;
      r[i] = label_distance(labels[a], labels[i]);
      order.push_back(i);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      return r[x] != r[y] ? r[x] < r[y] : x < y;
    });

    // k-way merge: list for positive order[p] holds negatives order[q], q >= first
    // position with strictly larger distance, in (gap, index) order.
    using Entry = std::tuple<double, std::size_t, std::size_t, std::size_t>;  // gap, pos, neg, q
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    std::size_t first_greater = 0;
    for (std::size_t p = 0; p < order.size(); ++p) {
      first_greater = std::max(first_greater, p + 1);
      while (first_greater < order.size() && !(r[order[first_greater]] > r[order[p]])) ++first_greater;
      if (first_greater < order.size()) {
        const std::size_t neg = order[first_greater];
        heap.emplace(r[neg] - r[order[p]], order[p], neg, first_greater);
      }
    }
    if (heap.empty()) {
      out.skipped_anchors.push_back(a);
      continue;
    }
    for (std::size_t taken = 0; taken < per_anchor && !heap.empty(); ++taken) {
      auto [gap, pos, neg, q] = heap.top();
      heap.pop();
      out.triplets.push_back({a, pos, neg});
      if (q + 1 < order.size()) {
        const std::size_t next = order[q + 1];
        heap.emplace(r[next] - r[pos], pos, next, q + 1);
      }
    }
  }
  return out;
}

}  // namespace scoreq

#endif  // SCOREQ_LOSS_OFFLINE_HPP_
