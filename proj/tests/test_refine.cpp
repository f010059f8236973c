#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mmvad/kernels.hpp"
#include "mmvad/refine.hpp"
#include "oracles.hpp"

using namespace mmvad;
using namespace mmvad::refine;

namespace {

std::vector<double> naive_mean(const EmbeddingMatrix& m) {
  std::vector<double> mu(m.dim(), 0.0);
  for (std::size_t r = 0; r < m.count(); ++r)
    for (std::size_t i = 0; i < m.dim(); ++i) mu[i] += m.row(r)[i];
  for (auto& x : mu) x /= double(m.count());
  return mu;
}

std::vector<double> naive_covariance(const EmbeddingMatrix& m) {
  const auto mu = naive_mean(m);
  const std::size_t d = m.dim();
  std::vector<double> c(d * d, 0.0);
  for (std::size_t r = 0; r < m.count(); ++r)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) c[i * d + j] += (m.row(r)[i] - mu[i]) * (m.row(r)[j] - mu[j]);
  for (auto& x : c) x /= double(m.count() - 1);
  return c;
}

VisualStats identity_stats(std::size_t d, std::vector<double> mean) {
  VisualStats s;
  s.mean = std::move(mean);
  s.precision.assign(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) s.precision[i * d + i] = 1.0;
  s.sample_count = 2;
  return s;
}

// Random text rows with some exact duplicates, so neighbour ranking hits ties.
EmbeddingMatrix text_with_duplicates(std::mt19937_64& rng, std::size_t n, std::size_t d) {
  auto m = oracle::random_matrix(rng, Modality::kText, n, d);
  for (std::size_t j = 1; j < n; ++j)
    if (rng() % 5 == 0) {
      const std::size_t src = rng() % j;
      std::copy(m.row(src).begin(), m.row(src).end(), m.row(j).begin());
    }
  return m;
}

std::vector<double> uniform_scores(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> a(n);
  for (auto& x : a) x = u(rng);
  return a;
}

}  // namespace

TEST(FitVisualStats, FullShrinkageIsScaledIdentity) {
  const EmbeddingMatrix basis(Modality::kVisual, 3, std::vector<double>{1, 0, 0, 0, 1, 0, 0, 0, 1});
  const auto stats = fit_visual_stats(basis, 1.0);
  const auto s = naive_covariance(basis);
  const double trace = s[0] + s[4] + s[8];
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      EXPECT_NEAR(stats.precision_at(i, j), i == j ? 3.0 / trace : 0.0, 1e-12);
}

TEST(FitVisualStats, IdenticalRowsWithoutShrinkageAreSingular) {
  const EmbeddingMatrix rows(Modality::kVisual, 2, std::vector<double>{0.3, -0.7, 0.3, -0.7});
  try {
    fit_visual_stats(rows, 0.0);
    FAIL() << "expected FactorizationError";
  } catch (const FactorizationError& e) {
    EXPECT_LE(e.smallest_eigenvalue, 1e-12);
  }
}

TEST(FitVisualStats, RankDeficientWithoutShrinkageIsSingular) {
  // Collinear rows: the covariance has rank one.
  const EmbeddingMatrix rows(Modality::kVisual, 2, std::vector<double>{1, 2, 2, 4, -1, -2, 3, 6});
  EXPECT_THROW(fit_visual_stats(rows, 0.0), FactorizationError);
  EXPECT_NO_THROW(fit_visual_stats(rows, 0.1));
}

TEST(FitVisualStats, TwoByTwoMatchesClosedFormInverse) {
  const EmbeddingMatrix rows(Modality::kVisual, 2, std::vector<double>{1.0, 2.0, 3.0, 1.0, 0.0, 0.5, 2.0, 5.0});
  const auto stats = fit_visual_stats(rows, 0.0);
  const auto c = naive_covariance(rows);
  const auto inv = oracle::inverse2x2(c[0], c[1], c[2], c[3]);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(stats.precision[i], inv[i], 1e-12);
  EXPECT_EQ(stats.mean, (std::vector<double>{1.5, 2.125}));
  EXPECT_EQ(stats.sample_count, 4u);
}

TEST(FitVisualStats, RejectsBadArguments) {
  EXPECT_THROW(fit_visual_stats(EmbeddingMatrix(Modality::kVisual, 2, 1), 0.1), DomainError);
  EXPECT_THROW(fit_visual_stats(EmbeddingMatrix(Modality::kVisual, 2, 3), 1.5), DomainError);
}

TEST(FitVisualStats, PrecisionSymmetricAndInvertsShrunkCovariance) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 1 + rng() % 12, n = d + 2 + rng() % 30;
    const auto rows = oracle::random_matrix(rng, Modality::kVisual, n, d);
    const double s = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const auto stats = fit_visual_stats(rows, s);
    auto c = naive_covariance(rows);
    double trace = 0.0;
    for (std::size_t i = 0; i < d; ++i) trace += c[i * d + i];
    for (auto& x : c) x *= 1.0 - s;
    for (std::size_t i = 0; i < d; ++i) c[i * d + i] += s * trace / double(d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        EXPECT_NEAR(stats.precision_at(i, j), stats.precision_at(j, i), 1e-10);
        double prod = 0.0;
        for (std::size_t k = 0; k < d; ++k) prod += stats.precision_at(i, k) * c[k * d + j];
        EXPECT_NEAR(prod, i == j ? 1.0 : 0.0, 1e-9);
      }
  }
}

TEST(SampleCovariance, MatchesTextbookUnbiasedEstimator) {
  std::mt19937_64 rng(62);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 1 + rng() % 10, n = 2 + rng() % 50;
    const auto rows = oracle::random_matrix(rng, Modality::kVisual, n, d);
    const auto mu = naive_mean(rows);
    const auto got = sample_covariance(rows, mu);
    const auto expected = naive_covariance(rows);
    for (std::size_t i = 0; i < d * d; ++i) EXPECT_NEAR(got[i], expected[i], 1e-12);
  }
}

TEST(Mahalanobis, ZeroAtMean) {
  const auto s = identity_stats(3, {0.1, 0.2, 0.3});
  EXPECT_EQ(mahalanobis(s.mean, s), 0.0);
}

TEST(Mahalanobis, DiagonalClosedForm) {
  VisualStats s;
  s.mean = {0.0, 0.0};
  s.precision = {0.25, 0.0, 0.0, 1.0};
  EXPECT_NEAR(mahalanobis(std::vector<double>{2.0, 1.0}, s), 1.4142135623730951, 1e-15);
}

TEST(Mahalanobis, IdentityPrecisionIsEuclidean) {
  std::mt19937_64 rng(63);
  for (int i = 0; i < 100; ++i) {
    const std::size_t d = 1 + rng() % 40;
    const auto s = identity_stats(d, oracle::random_vector(rng, d));
    const auto x = oracle::random_vector(rng, d);
    EXPECT_NEAR(mahalanobis(x, s), std::sqrt(kernels::squared_distance(x, s.mean)), 1e-12);
  }
}

TEST(Mahalanobis, RejectsDimMismatch) {
  const auto s = identity_stats(3, {0, 0, 0});
  EXPECT_THROW(mahalanobis(std::vector<double>{1.0, 2.0}, s), DimensionError);
}

TEST(NeighborSets, SelfFirstThenNearest) {
  const EmbeddingMatrix text(Modality::kText, 2, std::vector<double>{1, 0, 0, 1, 1, 0.1, 1, 1});
  const auto sets = neighbor_sets(text, 3);
  EXPECT_EQ(sets[0], (std::vector<std::size_t>{0, 2, 3}));
  EXPECT_EQ(sets[1], (std::vector<std::size_t>{1, 3, 2}));
}

TEST(NeighborSets, TiesGoToLowerIndex) {
  const EmbeddingMatrix text(Modality::kText, 2, std::vector<double>(10, 1.0));
  const auto sets = neighbor_sets(text, 3);
  EXPECT_EQ(sets[0], (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(sets[3], (std::vector<std::size_t>{3, 0, 1}));
  EXPECT_THROW(neighbor_sets(text, 6), DomainError);
  EXPECT_THROW(neighbor_sets(text, 0), DomainError);
}

TEST(RefineScores, KOneIsIdentity) {
  std::mt19937_64 rng(64);
  const auto text = oracle::random_matrix(rng, Modality::kText, 30, 5);
  const auto stats = fit_visual_stats(oracle::random_matrix(rng, Modality::kVisual, 40, 5), 0.1);
  const auto a = uniform_scores(rng, 30);
  EXPECT_EQ(refine_scores(a, text, stats, 1).scores, a);
}

TEST(RefineScores, IdenticalEmbeddingsAverageTieBrokenSets) {
  const EmbeddingMatrix text(Modality::kText, 3, std::vector<double>(15, 0.4));
  const auto stats = identity_stats(3, {0, 0, 0});
  const std::vector<double> a = {0.1, 0.5, 0.9, 0.3, 0.2};
  const auto r = refine_scores(a, text, stats, 3);
  EXPECT_NEAR(r.scores[0], (0.1 + 0.5 + 0.9) / 3, 1e-15);  // {0, 1, 2}
  EXPECT_NEAR(r.scores[4], (0.2 + 0.1 + 0.5) / 3, 1e-15);  // {4, 0, 1}
}

TEST(RefineScores, SmallInstanceMatchesOracle) {
  std::mt19937_64 rng(65);
  const auto text = oracle::random_matrix(rng, Modality::kText, 6, 3);
  const auto stats = fit_visual_stats(oracle::random_matrix(rng, Modality::kVisual, 10, 3), 0.1);
  const auto a = uniform_scores(rng, 6);
  std::vector<double> dm;
  for (std::size_t j = 0; j < 6; ++j) {
    // Independent quadratic form from the precision matrix entries.
    double q = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t k = 0; k < 3; ++k)
        q += (text.row(j)[i] - stats.mean[i]) * stats.precision_at(i, k) * (text.row(j)[k] - stats.mean[k]);
    dm.push_back(std::sqrt(q));
  }
  const auto r = refine_scores(a, text, stats, 3);
  for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(r.mahalanobis[j], dm[j], 1e-12);
  const auto sets = oracle::knn_sets(text, 3);
  EXPECT_EQ(r.neighbors, sets);
  const auto expected = oracle::knn_refine(a, sets, dm);
  for (std::size_t t = 0; t < 6; ++t) EXPECT_NEAR(r.scores[t], expected[t], 1e-12);
}

TEST(RefineScores, MatchesBruteForceExactly) {
  std::mt19937_64 rng(66);
  for (std::size_t n : {2u, 5u, 33u, 128u, 256u}) {
    for (int trial = 0; trial < 3; ++trial) {
      const std::size_t d = 1 + rng() % 16;
      const auto text = text_with_duplicates(rng, n, d);
      const auto stats = fit_visual_stats(oracle::random_matrix(rng, Modality::kVisual, n + 4, d), 0.1);
      const auto a = uniform_scores(rng, n);
      const std::size_t k = 1 + rng() % std::min<std::size_t>(n, 8);
      const auto r = refine_scores(a, text, stats, k);
      const auto sets = oracle::knn_sets(text, k);
      ASSERT_EQ(r.neighbors, sets) << "n=" << n;
      EXPECT_EQ(r.scores, oracle::knn_refine(a, sets, r.mahalanobis)) << "n=" << n;
    }
  }
}

TEST(RefineScores, StaysWithinNeighbourRange) {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 20; ++trial) {
    const auto text = oracle::random_matrix(rng, Modality::kText, 50, 6);
    const auto stats = fit_visual_stats(oracle::random_matrix(rng, Modality::kVisual, 50, 6), 0.1);
    const auto a = uniform_scores(rng, 50);
    const auto r = refine_scores(a, text, stats, 5);
    for (std::size_t t = 0; t < 50; ++t) {
      double lo = 1.0, hi = 0.0;
      for (std::size_t j : r.neighbors[t]) {
        lo = std::min(lo, a[j]);
        hi = std::max(hi, a[j]);
      }
      EXPECT_GE(r.scores[t], lo);
      EXPECT_LE(r.scores[t], hi);
    }
  }
}

TEST(RefineScores, FartherNeighbourNeverGainsInfluence) {
  // Scaling row j keeps every cosine (hence every neighbour set) fixed while
  // raising its distance from a zero mean under identity precision. With
  // a = indicator of j, a'_t is exactly j's normalized weight in K_t.
  std::mt19937_64 rng(68);
  for (int trial = 0; trial < 20; ++trial) {
    auto text = oracle::random_matrix(rng, Modality::kText, 12, 4);
    const auto stats = identity_stats(4, {0, 0, 0, 0});
    const std::size_t j = rng() % 12;
    std::vector<double> a(12, 0.0);
    a[j] = 1.0;
    const auto before = refine_scores(a, text, stats, 4);
    for (auto& x : text.row(j)) x *= 1.7;
    const auto after = refine_scores(a, text, stats, 4);
    ASSERT_EQ(before.neighbors, after.neighbors);
    EXPECT_GT(after.mahalanobis[j], before.mahalanobis[j]);
    for (std::size_t t = 0; t < 12; ++t) EXPECT_LE(after.scores[t], before.scores[t]);
  }
}

TEST(RefineScores, LargeDistancesDoNotUnderflow) {
  const EmbeddingMatrix text(Modality::kText, 1, std::vector<double>{1e4, 1.2e4, 1.5e4});
  const auto stats = identity_stats(1, {0.0});
  const std::vector<double> a = {0.2, 0.4, 0.6};
  const auto r = refine_scores(a, text, stats, 3);
  EXPECT_TRUE(r.fallback_rows.empty());
  // Every other weight is exp(-2000) or smaller; the nearest row dominates.
  for (double s : r.scores) EXPECT_DOUBLE_EQ(s, 0.2);
}
