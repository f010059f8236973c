#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mmvad/core.hpp"
#include "mmvad/hyperbolic.hpp"
#include "oracles.hpp"

using namespace mmvad;
using namespace mmvad::hyperbolic;

namespace {

// Random point strictly inside the c-ball, radius fraction in [0, max_frac).
PoincarePoint random_point(std::mt19937_64& rng, std::size_t dim, double c, double max_frac = 0.95) {
  auto v = oracle::random_vector(rng, dim);
  const double n = std::sqrt(oracle::dot(v, v));
  std::uniform_real_distribution<double> r(0.0, max_frac);
  const double target = r(rng) / std::sqrt(c);
  for (auto& x : v) x *= target / n;
  return PoincarePoint(std::move(v), c);
}

std::vector<double> neg(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  for (auto& x : out) x = -x;
  return out;
}

}  // namespace

TEST(ExpMapOrigin, ZeroMapsToOrigin) {
  const std::vector<double> zero(3, 0.0);
  EXPECT_EQ(exp_map_origin(zero, 1.0), PoincarePoint::origin(3, 1.0));
}

TEST(ExpMapOrigin, ClosedFormAtHalf) {
  const std::vector<double> v = {0.5, 0.0};
  const auto p = exp_map_origin(v, 1.0);
  EXPECT_NEAR(p.coords()[0], 0.462117157260009758502, 1e-15);  // tanh(0.5)
  EXPECT_EQ(p.coords()[1], 0.0);
}

TEST(ExpMapOrigin, FlatLimitIsIdentity) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    auto v = oracle::random_vector(rng, 8);
    const double n = std::sqrt(oracle::dot(v, v));
    for (auto& x : v) x /= std::max(n, 1.0);
    const auto p = exp_map_origin(v, 1e-8);
    for (std::size_t k = 0; k < v.size(); ++k) EXPECT_NEAR(p.coords()[k], v[k], 1e-6);
  }
}

TEST(ExpMapOrigin, RejectsNonFinite) {
  const std::vector<double> v = {1.0, std::nan("")};
  EXPECT_THROW(exp_map_origin(v, 1.0), DomainError);
}

TEST(LogMapOrigin, OriginAndClosedForm) {
  EXPECT_EQ(log_map_origin(PoincarePoint::origin(4, 1.0)), std::vector<double>(4, 0.0));
  const auto v = log_map_origin(PoincarePoint({0.46212, 0.0}, 1.0));
  EXPECT_NEAR(v[0], 0.500003614664547434927, 1e-12);  // artanh(0.46212)
  EXPECT_EQ(v[1], 0.0);
}

TEST(LogMapOrigin, RejectsBoundaryAndOutside) {
  EXPECT_THROW(log_map_origin(PoincarePoint({1.0, 0.0}, 1.0)), DomainError);
  EXPECT_THROW(log_map_origin(PoincarePoint({0.0, 0.8}, 4.0)), DomainError);
}

TEST(LogMapOrigin, RoundTrip) {
  const std::vector<double> v = {0.3, -0.2};
  const auto back = log_map_origin(exp_map_origin(v, 1.0));
  EXPECT_NEAR(back[0], 0.3, 1e-9);
  EXPECT_NEAR(back[1], -0.2, 1e-9);
}

TEST(LogMapOrigin, RoundTripPropertyUpToNormFive) {
  std::mt19937_64 rng(2);
  for (std::size_t dim : {1u, 2u, 7u, 64u, 512u}) {
    for (int i = 0; i < 40; ++i) {
      auto v = oracle::random_vector(rng, dim);
      const double n = std::sqrt(oracle::dot(v, v));
      const double target = std::uniform_real_distribution<double>(0.0, 5.0)(rng);
      for (auto& x : v) x *= target / n;
      const auto back = log_map_origin(exp_map_origin(v, 1.0));
      for (std::size_t k = 0; k < dim; ++k) ASSERT_NEAR(back[k], v[k], 1e-9) << "dim " << dim;
    }
  }
}

TEST(MobiusAdd, IdentitiesAndInverse) {
  std::mt19937_64 rng(3);
  for (double c : {1.0, 0.3, 2.5}) {
    for (int i = 0; i < 200; ++i) {
      const auto x = random_point(rng, 5, c);
      const auto zero = PoincarePoint::origin(5, c);
      const auto r = mobius_add(x, zero);
      const auto l = mobius_add(zero, x);
      const auto inv = mobius_add(PoincarePoint(neg(x.coords()), c), x);
      for (std::size_t k = 0; k < 5; ++k) {
        EXPECT_NEAR(r.coords()[k], x.coords()[k], 1e-12);
        EXPECT_NEAR(l.coords()[k], x.coords()[k], 1e-12);
        EXPECT_NEAR(inv.coords()[k], 0.0, 1e-12);
      }
    }
  }
}

TEST(MobiusAdd, RejectsMismatchedSpaces) {
  EXPECT_THROW(mobius_add(PoincarePoint({0.1}, 1.0), PoincarePoint({0.1}, 2.0)), DimensionError);
  EXPECT_THROW(mobius_add(PoincarePoint({0.1}, 1.0), PoincarePoint({0.1, 0.0}, 1.0)), DimensionError);
}

TEST(Distance, ScalarClosedForm) {
  EXPECT_NEAR(distance(PoincarePoint({0.0}, 1.0), PoincarePoint({0.5}, 1.0)), 1.09861228866810969139, 1e-14);
}

TEST(Distance, MatchesMobiusDefinition) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 500; ++i) {
    const double c = std::uniform_real_distribution<double>(0.1, 3.0)(rng);
    const auto x = random_point(rng, 6, c, 0.9), y = random_point(rng, 6, c, 0.9);
    const auto u = mobius_add(PoincarePoint(neg(x.coords()), c), y);
    const double expected = 2.0 / std::sqrt(c) * std::atanh(u.scaled_norm());
    EXPECT_NEAR(distance(x, y), expected, 1e-10 * (1.0 + expected));
  }
}

TEST(Distance, ZeroSymmetricAndTriangle) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 2000; ++i) {
    const auto x = random_point(rng, 4, 1.0), y = random_point(rng, 4, 1.0), z = random_point(rng, 4, 1.0);
    EXPECT_EQ(distance(x, x), 0.0);
    EXPECT_NEAR(distance(x, y), distance(y, x), 1e-12);
    EXPECT_LE(distance(x, z), distance(x, y) + distance(y, z) + 1e-9);
    EXPECT_GT(distance(x, y), 0.0);
  }
}

TEST(Distance, FlatLimit) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 200; ++i) {
    auto a = oracle::random_vector(rng, 5, 0.04), b = oracle::random_vector(rng, 5, 0.04);
    const PoincarePoint x(a, 1e-8), y(b, 1e-8);
    std::vector<double> d(5);
    for (int k = 0; k < 5; ++k) d[k] = a[k] - b[k];
    const double flat = 2.0 * std::sqrt(oracle::dot(d, d));
    EXPECT_LT(std::abs(distance(x, y) - flat) / flat, 1e-4);
  }
}

TEST(BallContainment, OutputsStayInsideMargin) {
  std::mt19937_64 rng(7);
  const double eps = 1e-5;
  for (int i = 0; i < 500; ++i) {
    auto v = oracle::random_vector(rng, 3, 20.0);
    const auto p = exp_map_origin(v, 1.0, eps);
    EXPECT_LE(p.scaled_norm(), 1.0 - eps + 1e-15);
    const auto q = random_point(rng, 3, 1.0, 0.99999);
    EXPECT_LE(mobius_add(p, q, eps).scaled_norm(), 1.0 - eps + 1e-15);
    EXPECT_LE(exp_map(q, oracle::random_vector(rng, 3, 5.0), eps).scaled_norm(), 1.0 - eps + 1e-15);
  }
}

TEST(BaseMaps, LogInvertsExpAtArbitraryBase) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 200; ++i) {
    const auto m = random_point(rng, 4, 1.0, 0.7);
    const auto v = oracle::random_vector(rng, 4, 0.3);
    const auto back = log_map(m, exp_map(m, v));
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(back[k], v[k], 1e-9);
  }
}

TEST(BaseMaps, OriginCaseAgreesWithOriginMaps) {
  const std::vector<double> v = {0.2, -0.4, 0.1};
  const auto origin = PoincarePoint::origin(3, 1.0);
  const auto a = exp_map(origin, v), b = exp_map_origin(v, 1.0);
  // exp_0 at the origin has conformal factor 2, so exp_map(0, v) = exp_0(v).
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(a.coords()[k], b.coords()[k], 1e-15);
}

TEST(GeodesicMeanTest, SinglePointIsFixed) {
  const PoincarePoint p({0.3, -0.1, 0.2}, 1.0);
  const double w[] = {2.5};
  const auto m = weighted_geodesic_mean(std::span(&p, 1), w);
  EXPECT_TRUE(m.converged);
  EXPECT_EQ(m.point, p);
}

TEST(GeodesicMeanTest, IdenticalPointsAnyWeights) {
  const PoincarePoint p({0.3, -0.1, 0.2}, 1.0);
  const std::vector<PoincarePoint> pts(4, p);
  const double w[] = {0.1, 3.0, 0.0, 1.7};
  const auto m = weighted_geodesic_mean(pts, w);
  EXPECT_TRUE(m.converged);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(m.point.coords()[k], p.coords()[k], 1e-10);
}

TEST(GeodesicMeanTest, SymmetricPairMeetsAtOrigin) {
  const std::vector<PoincarePoint> pts = {PoincarePoint({0.6, 0.0}, 1.0), PoincarePoint({-0.6, 0.0}, 1.0)};
  const double w[] = {1.0, 1.0};
  const auto m = weighted_geodesic_mean(pts, w);
  EXPECT_TRUE(m.converged);
  EXPECT_NEAR(m.point.coords()[0], 0.0, 1e-9);
  EXPECT_NEAR(m.point.coords()[1], 0.0, 1e-9);
  EXPECT_NEAR(distance(m.point, pts[0]), distance(m.point, pts[1]), 1e-9);
}

TEST(GeodesicMeanTest, AsymmetricPairLiesOnGeodesicAtWeightedFraction) {
  // For two points the weighted mean sits at fraction w_y of the geodesic
  // from x to y, so d(m, x) = w_y d(x, y).
  const std::vector<PoincarePoint> pts = {PoincarePoint({0.5, 0.1}, 1.0), PoincarePoint({-0.2, 0.6}, 1.0)};
  const double w[] = {0.3, 0.7};
  const auto m = weighted_geodesic_mean(pts, w);
  ASSERT_TRUE(m.converged);
  const double dxy = distance(pts[0], pts[1]);
  EXPECT_NEAR(distance(m.point, pts[0]), 0.7 * dxy, 1e-9);
  EXPECT_NEAR(distance(m.point, pts[1]), 0.3 * dxy, 1e-9);
}

TEST(GeodesicMeanTest, FlatLimitIsEuclideanAverage) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = 2 + rng() % 6;
    std::vector<PoincarePoint> pts;
    std::vector<double> w(n);
    std::vector<double> avg(3, 0.0);
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      pts.emplace_back(oracle::random_vector(rng, 3, 0.5), 1e-8);
      w[k] = std::uniform_real_distribution<double>(0.1, 2.0)(rng);
      total += w[k];
    }
    for (std::size_t k = 0; k < n; ++k)
      for (int j = 0; j < 3; ++j) avg[j] += w[k] / total * pts[k].coords()[j];
    const auto m = weighted_geodesic_mean(pts, w);
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(m.point.coords()[j], avg[j], 1e-5);
  }
}

TEST(GeodesicMeanTest, IsLocalMinimumOfObjective) {
  std::mt19937_64 rng(10);
  const KarcherOptions opts;
  for (int i = 0; i < 30; ++i) {
    const std::size_t dim = 1 + rng() % 16, n = 1 + rng() % 8;
    std::vector<PoincarePoint> pts;
    std::vector<double> w;
    for (std::size_t k = 0; k < n; ++k) {
      pts.push_back(random_point(rng, dim, 1.0, 0.9));
      w.push_back(std::uniform_real_distribution<double>(0.0, 1.0)(rng));
    }
    w[0] += 0.1;
    const auto m = weighted_geodesic_mean(pts, w, opts);
    ASSERT_TRUE(m.converged);
    const double f0 = frechet_objective(m.point, pts, w);
    for (int p = 0; p < 10; ++p) {
      auto noise = oracle::random_vector(rng, dim);
      const double nn = std::sqrt(oracle::dot(noise, noise));
      for (auto& x : noise) x *= 10.0 * opts.tol / nn;
      EXPECT_GE(frechet_objective(exp_map(m.point, noise), pts, w), f0 - 1e-9);
    }
  }
}

TEST(GeodesicMeanTest, ReportsNonConvergenceInsteadOfThrowing) {
  std::mt19937_64 rng(12);
  std::vector<PoincarePoint> pts;
  for (int k = 0; k < 5; ++k) pts.push_back(random_point(rng, 3, 1.0, 0.9));
  const std::vector<double> w(5, 1.0);
  KarcherOptions opts;
  opts.max_iter = 0;
  opts.tol = 1e-300;
  const auto m = weighted_geodesic_mean(pts, w, opts);
  EXPECT_FALSE(m.converged);
  EXPECT_GT(m.residual, 0.0);
}

TEST(GeodesicMeanTest, RejectsBadInputs) {
  const std::vector<PoincarePoint> pts = {PoincarePoint({0.1}, 1.0), PoincarePoint({0.2}, 1.0)};
  EXPECT_THROW(weighted_geodesic_mean({}, {}), DimensionError);
  const double zero[] = {0.0, 0.0};
  EXPECT_THROW(weighted_geodesic_mean(pts, zero), DomainError);
  const double negw[] = {1.0, -0.5};
  EXPECT_THROW(weighted_geodesic_mean(pts, negw), DomainError);
  const double one[] = {1.0};
  EXPECT_THROW(weighted_geodesic_mean(pts, one), DimensionError);
}

TEST(GeodesicMeanTest, ConvergesForWidelySpreadPoints) {
  // Points near the boundary make the objective strongly curved across
  // geodesics; unit steps would oscillate here.
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    const std::size_t dim = 1 + rng() % 32, n = 2 + rng() % 10;
    std::vector<PoincarePoint> pts;
    std::vector<double> w;
    for (std::size_t k = 0; k < n; ++k) {
      pts.push_back(random_point(rng, dim, 1.0, 0.95));
      w.push_back(std::uniform_real_distribution<double>(0.05, 1.0)(rng));
    }
    const auto m = weighted_geodesic_mean(pts, w);
    ASSERT_TRUE(m.converged) << "instance " << i << " residual " << m.residual;
    EXPECT_LT(m.iterations, 100);
  }
}
