#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <tuple>

#include "scoreq/core/gradcheck.hpp"
#include "scoreq/loss/mask.hpp"
#include "scoreq/loss/offline.hpp"
#include "scoreq/loss/scoreq_loss.hpp"
#include "test_support.hpp"

using namespace scoreq;
namespace st = scoreq::testing;

namespace {

std::set<std::tuple<std::size_t, std::size_t, std::size_t>> as_set(const std::vector<Triplet>& ts) {
  std::set<std::tuple<std::size_t, std::size_t, std::size_t>> s;
  for (const auto& t : ts) s.emplace(t.anchor, t.positive, t.negative);
  return s;
}

const std::vector<double> kFig2{4.5, 2.0, 1.5};

}  // namespace

TEST(LabelDistance, Examples) {
  EXPECT_EQ(label_distance(2.0, 2.0), 0.0);
  EXPECT_EQ(label_distance(4.5, 1.5), 3.0);
  std::mt19937_64 rng(0);
  const auto y = st::uniform_labels(50, rng);
  for (std::size_t i = 0; i + 1 < y.size(); ++i) EXPECT_EQ(label_distance(y[i], y[i + 1]), label_distance(y[i + 1], y[i]));
}

TEST(Mask, WorkedExampleFromThreeLabels) {
  const TripletMask mask = build_mask(kFig2);
  EXPECT_EQ(mask.valid_count(), 3u);
  const std::set<std::tuple<std::size_t, std::size_t, std::size_t>> expected{{0, 1, 2}, {1, 2, 0}, {2, 1, 0}};
  EXPECT_EQ(as_set(mask.triplets()), expected);
}

TEST(Mask, AllTiedLabelsHaveNoValidTriplets) {
  EXPECT_EQ(build_mask(std::vector<double>{3.0, 3.0, 3.0}).valid_count(), 0u);
}

TEST(Mask, BatchTooSmall) {
  EXPECT_THROW(build_mask(std::vector<double>{1.0, 2.0}), BatchTooSmallError);
}

TEST(Mask, EqualsTripleLoopOracle) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> size(3, 12);
  for (int trial = 0; trial < 100; ++trial) {
    const auto y = trial % 2 ? st::tied_labels(size(rng), rng) : st::uniform_labels(size(rng), rng);
    const TripletMask mask = build_mask(y);
    std::size_t count = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
      for (std::size_t j = 0; j < y.size(); ++j)
        for (std::size_t k = 0; k < y.size(); ++k) {
          const bool v = st::oracle_valid(y, i, j, k);
          ASSERT_EQ(mask(i, j, k), v);
          count += v;
        }
    EXPECT_EQ(mask.valid_count(), count);
  }
}

TEST(Mask, AntisymmetricAndBounded) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const auto y = st::tied_labels(9, rng);
    const TripletMask mask = build_mask(y);
    EXPECT_LE(mask.valid_count(), 9u * 8u * 7u);
    for (std::size_t i = 0; i < 9; ++i)
      for (std::size_t j = 0; j < 9; ++j)
        for (std::size_t k = 0; k < 9; ++k)
          if (mask(i, j, k)) {
            EXPECT_FALSE(mask(i, k, j));
            EXPECT_TRUE(i != j && j != k && i != k);
          }
  }
}

TEST(Mask, CountInvariantUnderPermutation) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    auto y = st::tied_labels(10, rng);
    const auto before = build_mask(y).valid_count();
    std::shuffle(y.begin(), y.end(), rng);
    EXPECT_EQ(build_mask(y).valid_count(), before);
  }
}

TEST(Margin, AdaptiveWorkedExample) {
  const MarginSpec spec = MarginSpec::adaptive(4.0, SignMode::intuitive);
  EXPECT_DOUBLE_EQ(spec.margin(kFig2[0], kFig2[1], kFig2[2]), 0.125);
  const MarginSpec literal = MarginSpec::adaptive(4.0, SignMode::literal);
  EXPECT_DOUBLE_EQ(literal.margin(kFig2[0], kFig2[1], kFig2[2]), -0.125);
}

TEST(Margin, FixedIgnoresKappaAndAdaptiveIgnoresM) {
  MarginSpec f = MarginSpec::fixed(0.3);
  f.kappa = 100.0;
  EXPECT_EQ(f.margin(1, 2, 5), 0.3);
  MarginSpec a = MarginSpec::adaptive(2.0);
  a.m = 9.0;
  EXPECT_EQ(a.margin(1, 2, 5), 1.5);
}

TEST(Margin, ValidationRejectsBadValues) {
  EXPECT_THROW(MarginSpec::fixed(-0.1).validate(), std::invalid_argument);
  EXPECT_THROW(MarginSpec::adaptive(0.0).validate(), std::invalid_argument);
}

TEST(ScoreqFixed, IdenticalEmbeddingsGiveMargin) {
  const Matrix z(5, 3, 0.7);
  const std::vector<double> y{1.0, 2.0, 3.5, 4.0, 5.0};
  const LossOutput out = scoreq_fixed(z, y, MarginSpec::fixed(0.5));
  EXPECT_DOUBLE_EQ(out.value, 0.5);
  EXPECT_EQ(out.active_triplets, out.valid_triplets);
}

TEST(ScoreqFixed, AllEasyGivesZero) {
  // Embeddings on a line ordered by label, scaled so every negative is far.
  const std::vector<double> y{1.0, 2.0, 4.0, 8.0};
  Matrix z(4, 1);
  for (std::size_t i = 0; i < 4; ++i) z(i, 0) = 100.0 * y[i];
  const LossOutput out = scoreq_fixed(z, y, MarginSpec::fixed(0.5));
  EXPECT_EQ(out.value, 0.0);
  EXPECT_EQ(out.active_triplets, 0u);
  EXPECT_GT(out.valid_triplets, 0u);
  for (double g : out.grad.data()) EXPECT_EQ(g, 0.0);
}

TEST(ScoreqFixed, NoValidTripletsIsFlaggedNotThrown) {
  const LossOutput out = scoreq_fixed(Matrix(3, 2, 1.0), std::vector<double>{2.0, 2.0, 2.0}, MarginSpec::fixed(0.2));
  EXPECT_TRUE(out.no_valid_triplets);
  EXPECT_EQ(out.value, 0.0);
  EXPECT_EQ(out.active_triplets, 0u);
}

TEST(ScoreqFixed, MatchesTripleLoopOracle) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix z = st::random_matrix(6, 4, rng);
    const auto y = st::tied_labels(6, rng);
    for (Reduction red : {Reduction::mean_active, Reduction::sum}) {
      const MarginSpec spec = MarginSpec::fixed(0.3);
      const auto o = st::oracle_scoreq(z, y, spec, red);
      const LossOutput out = scoreq_fixed(z, y, spec, red);
      EXPECT_NEAR(out.value, o.value, 1e-10);
      EXPECT_EQ(out.active_triplets, o.active);
      EXPECT_EQ(out.valid_triplets, o.valid);
    }
  }
}

TEST(ScoreqFixed, ZeroMarginSumMatchesOracleUpToTwelve) {
  std::mt19937_64 rng(22);
  for (std::size_t n = 3; n <= 12; ++n) {
    const Matrix z = st::random_matrix(n, 3, rng);
    const auto y = st::uniform_labels(n, rng);
    const auto o = st::oracle_scoreq(z, y, MarginSpec::fixed(0.0), Reduction::sum);
    EXPECT_NEAR(scoreq_fixed(z, y, MarginSpec::fixed(0.0), Reduction::sum).value, o.value, 1e-10);
  }
}

TEST(ScoreqAdaptive, IdenticalEmbeddingsGiveMeanMargin) {
  const std::vector<double> y{1.0, 1.5, 3.0, 4.5, 5.0};
  const MarginSpec spec = MarginSpec::adaptive(4.0);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      for (std::size_t k = 0; k < 5; ++k)
        if (st::oracle_valid(y, i, j, k)) {
          sum += st::oracle_margin(spec, y[i], y[j], y[k]);
          ++count;
        }
  EXPECT_NEAR(scoreq_adaptive(Matrix(5, 2, -1.0), y, spec).value, sum / static_cast<double>(count), 1e-14);
}

TEST(ScoreqAdaptive, MatchesTripleLoopOracleBothSigns) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix z = st::random_matrix(6, 4, rng, 0.3);
    const auto y = st::uniform_labels(6, rng);
    for (SignMode sign : {SignMode::intuitive, SignMode::literal})
      for (Reduction red : {Reduction::mean_active, Reduction::sum}) {
        const MarginSpec spec = MarginSpec::adaptive(4.0, sign);
        const auto o = st::oracle_scoreq(z, y, spec, red);
        const LossOutput out = scoreq_adaptive(z, y, spec, red);
        EXPECT_NEAR(out.value, o.value, 1e-10);
        EXPECT_EQ(out.active_triplets, o.active);
      }
  }
}

TEST(ScoreqLoss, ModeMismatchThrows) {
  const std::vector<double> y{1, 2, 3};
  EXPECT_THROW(scoreq_fixed(Matrix(3, 2), y, MarginSpec::adaptive()), std::invalid_argument);
  EXPECT_THROW(scoreq_adaptive(Matrix(3, 2), y, MarginSpec::fixed(0.1)), std::invalid_argument);
  EXPECT_THROW(scoreq_fixed(Matrix(4, 2), y, MarginSpec::fixed(0.1)), DimensionError);
}

// Properties over random batches.

TEST(ScoreqLoss, PermutationInvariantWithMeanActive) {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix z = st::random_matrix(7, 3, rng);
    const auto y = st::uniform_labels(7, rng);
    std::vector<std::size_t> perm(7);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix zp(7, 3);
    std::vector<double> yp(7);
    for (std::size_t i = 0; i < 7; ++i) {
      yp[i] = y[perm[i]];
      std::copy(z.row(perm[i]).begin(), z.row(perm[i]).end(), zp.row(i).begin());
    }
    const MarginSpec spec = MarginSpec::adaptive();
    EXPECT_NEAR(scoreq_adaptive(z, y, spec).value, scoreq_adaptive(zp, yp, spec).value, 1e-12);
  }
}

TEST(ScoreqLoss, LabelShiftIsBitIdentical) {
  std::mt19937_64 rng(25);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix z = st::random_matrix(8, 3, rng);
    // Half-point labels keep label differences exact under the shift.
    const auto y = st::tied_labels(8, rng);
    std::vector<double> shifted(y);
    for (double& v : shifted) v += 16.0;
    EXPECT_EQ(build_mask(y).triplets(), build_mask(shifted).triplets());
    for (const MarginSpec& spec : {MarginSpec::fixed(0.2), MarginSpec::adaptive()}) {
      const LossOutput a = spec.mode == MarginMode::fixed ? scoreq_fixed(z, y, spec) : scoreq_adaptive(z, y, spec);
      const LossOutput b =
          spec.mode == MarginMode::fixed ? scoreq_fixed(z, shifted, spec) : scoreq_adaptive(z, shifted, spec);
      EXPECT_EQ(a.value, b.value);
      EXPECT_EQ(a.grad, b.grad);
    }
  }
}

TEST(ScoreqLoss, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    Parameter z("z", st::random_matrix(6, 3, rng));
    const auto y = st::uniform_labels(6, rng);
    for (const MarginSpec& spec : {MarginSpec::fixed(0.3), MarginSpec::adaptive(4.0, SignMode::intuitive),
                                   MarginSpec::adaptive(4.0, SignMode::literal)}) {
      for (Reduction red : {Reduction::mean_active, Reduction::sum}) {
        const auto r = finite_diff_check(st::embedding_loss_fn(z, y, spec, red), {&z});
        EXPECT_LT(r.max_relative_error, 1e-4) << "seed " << seed;
      }
    }
  }
}

TEST(GradCondition, ExamplesAndAutodiffAgreement) {
  const MarginSpec spec = MarginSpec::adaptive();
  const std::vector<double> o{0.0, 0.0}, far{100.0, 0.0};
  EXPECT_TRUE(adaptive_grad_condition(o, o, o, 4.5, 2.0, 1.5, spec));
  EXPECT_FALSE(adaptive_grad_condition(o, o, far, 4.5, 2.0, 1.5, spec));

  std::mt19937_64 rng(31);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto y = st::uniform_labels(3, rng);
    if (!(std::fabs(y[0] - y[1]) < std::fabs(y[0] - y[2]))) std::swap(y[1], y[2]);
    Parameter z("z", st::random_matrix(3, 2, rng, 0.3));
    Tape t;
    const Triplet tr{0, 1, 2};
    const double margin = spec.margin(y[0], y[1], y[2]);
    t.backward(ad::triplet_list_loss(ad::pairwise_dist(t.parameter(z), false), std::span(&tr, 1), std::span(&margin, 1)));
    const bool nonzero = z.grad(0, 0) != 0.0 || z.grad(0, 1) != 0.0;
    mismatches += nonzero != adaptive_grad_condition(z.value.row(0), z.value.row(1), z.value.row(2), y[0], y[1], y[2], spec);
  }
  EXPECT_EQ(mismatches, 0u);
}

TEST(ClassificationTriplet, Examples) {
  const Matrix a{{0.0, 0.0}, {1.0, 1.0}};
  const Matrix n{{2.0, 0.0}, {1.0, 3.0}};
  EXPECT_EQ(triplet_loss_classification(a, a, n, 1.0), 0.0);
  EXPECT_EQ(triplet_loss_classification(a, a, a, 1.0), 2.0);
  std::mt19937_64 rng(41);
  const Matrix za = st::random_matrix(5, 3, rng), zp = st::random_matrix(5, 3, rng), zn = st::random_matrix(5, 3, rng);
  double expected = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    double dp = 0.0, dn = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      dp += (za(i, c) - zp(i, c)) * (za(i, c) - zp(i, c));
      dn += (za(i, c) - zn(i, c)) * (za(i, c) - zn(i, c));
    }
    expected += std::max(0.0, dp - dn + 0.4);
  }
  EXPECT_NEAR(triplet_loss_classification(za, zp, zn, 0.4), expected, 1e-12);
}

namespace {

// Exhaustive: every valid (p, n) pair sorted by (gap, p, n), first k kept.
std::vector<Triplet> exhaustive_hard(std::span<const double> y, std::size_t a, std::size_t k) {
  std::vector<std::tuple<double, std::size_t, std::size_t>> c;
  for (std::size_t p = 0; p < y.size(); ++p)
    for (std::size_t n = 0; n < y.size(); ++n)
      if (st::oracle_valid(y, a, p, n)) c.emplace_back(std::fabs(y[a] - y[n]) - std::fabs(y[a] - y[p]), p, n);
  std::sort(c.begin(), c.end());
  std::vector<Triplet> out;
  for (std::size_t q = 0; q < std::min(k, c.size()); ++q) out.push_back({a, std::get<1>(c[q]), std::get<2>(c[q])});
  return out;
}

}  // namespace

TEST(OfflineHard, MatchesExhaustiveEnumeration) {
  const std::vector<double> y{1, 2, 3, 4, 5};
  const auto all = offline_hard_triplets(y, 5, 10, 0);
  std::vector<Triplet> anchor2;
  for (const auto& t : all.triplets)
    if (t.anchor == 2) anchor2.push_back(t);
  EXPECT_EQ(anchor2, exhaustive_hard(y, 2, 10));

  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 30; ++trial) {
    const auto labels = trial % 2 ? st::tied_labels(15, rng) : st::uniform_labels(15, rng);
    const auto got = offline_hard_triplets(labels, 15, 10, 0);
    std::vector<Triplet> expected;
    for (std::size_t a = 0; a < labels.size(); ++a) {
      const auto e = exhaustive_hard(labels, a, 10);
      expected.insert(expected.end(), e.begin(), e.end());
    }
    EXPECT_EQ(got.triplets, expected);
  }
}

TEST(OfflineHard, CappedAndDeterministic) {
  const std::vector<double> y{1.0, 2.0, 4.0};
  const auto r = offline_hard_triplets(y, 3, 10, 0);
  EXPECT_EQ(r.triplets.size(), build_mask(y).valid_count());
  EXPECT_EQ(as_set(r.triplets).size(), r.triplets.size());

  std::mt19937_64 rng(52);
  const auto labels = st::uniform_labels(40, rng);
  const auto a = offline_hard_triplets(labels, 12, 10, 99);
  const auto b = offline_hard_triplets(labels, 12, 10, 99);
  EXPECT_EQ(a.triplets, b.triplets);
  std::set<std::size_t> anchors;
  for (const auto& t : a.triplets) anchors.insert(t.anchor);
  EXPECT_EQ(anchors.size(), 12u);
}

TEST(OfflineHard, AnchorWithoutPairsIsSkipped) {
  const auto r = offline_hard_triplets(std::vector<double>{2.0, 2.0, 2.0}, 3, 10, 0);
  EXPECT_TRUE(r.triplets.empty());
  EXPECT_EQ(r.skipped_anchors.size(), 3u);
}

// Ordering objective: plain gradient descent on free embeddings of a small
// batch drives almost every valid triplet to the correct order.
TEST(ScoreqLoss, ConvergedEmbeddingsRespectLabelOrder) {
  std::mt19937_64 rng(61);
  const auto y = st::uniform_labels(12, rng);
  Parameter z("z", st::random_matrix(12, 4, rng, 0.1));
  const MarginSpec spec = MarginSpec::adaptive();
  for (int step = 0; step < 3000; ++step) {
    z.zero_grad();
    Tape t;
    const TripletMask mask = build_mask(y);
    t.backward(ad::scoreq_triplet_loss(ad::pairwise_dist(t.parameter(z), false), mask, y, spec, Reduction::mean_active));
    for (std::size_t i = 0; i < z.value.size(); ++i) z.value[i] -= 0.05 * z.grad[i];
  }
  const TripletMask mask = build_mask(y);
  std::size_t ok = 0;
  for (const auto& t : mask.triplets()) ok += st::oracle_dist(z.value, t.anchor, t.positive) < st::oracle_dist(z.value, t.anchor, t.negative);
  EXPECT_GE(static_cast<double>(ok) / static_cast<double>(mask.valid_count()), 0.95);
}
