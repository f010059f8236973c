#include "mmvad/refine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "mmvad/kernels.hpp"

namespace mmvad::refine {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::vector<double> sample_covariance(const EmbeddingMatrix& rows, std::span<const double> mean) {
  const std::size_t n = rows.count(), d = rows.dim();
  if (n < 2) throw DomainError("sample covariance needs at least 2 rows, got " + std::to_string(n));
  std::vector<double> cov(d * d, 0.0);
  std::vector<double> centered(d);
  for (std::size_t r = 0; r < n; ++r) {
    const auto x = rows.row(r);
    for (std::size_t i = 0; i < d; ++i) centered[i] = x[i] - mean[i];
    for (std::size_t i = 0; i < d; ++i)
      kernels::axpy(centered[i], std::span<const double>(centered).subspan(i), std::span<double>(cov).subspan(i * d + i, d - i));
  }
  const double inv = 1.0 / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      cov[i * d + j] *= inv;
      cov[j * d + i] = cov[i * d + j];
    }
  return cov;
}

VisualStats fit_visual_stats(const EmbeddingMatrix& visual, double shrinkage) {
  if (!(shrinkage >= 0.0 && shrinkage <= 1.0))
    throw DomainError("fit_visual_stats: shrinkage must lie in [0, 1]");
  const std::size_t n = visual.count(), d = visual.dim();
  if (n < 2) throw DomainError("fit_visual_stats: need at least 2 visual rows, got " + std::to_string(n));

  VisualStats stats;
  stats.shrinkage = shrinkage;
  stats.sample_count = n;
  stats.mean.assign(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) kernels::axpy(1.0, visual.row(r), stats.mean);
  for (auto& x : stats.mean) x /= static_cast<double>(n);

  const std::vector<double> sample = sample_covariance(visual, stats.mean);
  double trace = 0.0;
  for (std::size_t i = 0; i < d; ++i) trace += sample[i * d + i];
  RowMatrix cov = Eigen::Map<const RowMatrix>(sample.data(), d, d) * (1.0 - shrinkage);
  cov.diagonal().array() += shrinkage * trace / static_cast<double>(d);

  Eigen::LLT<RowMatrix> llt(cov);
  // LLT only flags non-positive pivots; a pivot at roundoff level is treated
  // as singular as well.
  bool ok = llt.info() == Eigen::Success;
  if (ok) {
    const Eigen::ArrayXd diag = llt.matrixLLT().diagonal().array().square();
    ok = diag.minCoeff() > 1e-12 * std::max(diag.maxCoeff(), std::numeric_limits<double>::min());
  }
  if (!ok) {
    Eigen::SelfAdjointEigenSolver<RowMatrix> eig(cov, Eigen::EigenvaluesOnly);
    const double smallest = eig.eigenvalues().minCoeff();
    throw FactorizationError("fit_visual_stats: covariance is not positive definite (smallest eigenvalue " +
                                 std::to_string(smallest) + ", shrinkage " + std::to_string(shrinkage) + ")",
                             smallest);
  }
  RowMatrix precision = llt.solve(RowMatrix::Identity(d, d));
  precision = 0.5 * (precision + precision.transpose()).eval();
  stats.precision.assign(precision.data(), precision.data() + d * d);
  return stats;
}

double mahalanobis(std::span<const double> x, const VisualStats& stats) {
  const std::size_t d = stats.dim();
  if (x.size() != d)
    throw DimensionError("mahalanobis: vector dim " + std::to_string(x.size()) + ", stats dim " +
                         std::to_string(d));
  std::vector<double> diff(d);
  for (std::size_t i = 0; i < d; ++i) diff[i] = x[i] - stats.mean[i];
  std::vector<double> pd(d);
  kernels::matvec(stats.precision, d, diff, pd);
  const double q = kernels::dot(diff, pd);
  return std::sqrt(std::max(q, 0.0));
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
  const double na = kernels::squared_norm(a), nb = kernels::squared_norm(b);
  if (na == 0.0 || nb == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 - kernels::dot(a, b) / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<std::vector<std::size_t>> neighbor_sets(const EmbeddingMatrix& text, std::size_t k) {
  const std::size_t n = text.count();
  if (k < 1 || k > std::max<std::size_t>(n, 1))
    throw DomainError("neighbor_sets: K = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  std::vector<double> norms(n);
  for (std::size_t j = 0; j < n; ++j) norms[j] = std::sqrt(kernels::squared_norm(text.row(j)));

  std::vector<std::vector<std::size_t>> sets(n);
  std::vector<double> dots(n), dist(n);
  std::vector<std::size_t> order;
  for (std::size_t t = 0; t < n; ++t) {
    kernels::matvec(text.data(), text.dim(), text.row(t), dots);
    order.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == t) continue;
      dist[j] = norms[t] == 0.0 || norms[j] == 0.0 ? std::numeric_limits<double>::infinity()
                                                   : 1.0 - dots[j] / (norms[t] * norms[j]);
      order.push_back(j);
    }
    const auto closer = [&](std::size_t a, std::size_t b) {
      return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
    };
    const std::size_t take = k - 1;
    std::partial_sort(order.begin(), order.begin() + take, order.end(), closer);
    sets[t].reserve(k);
    sets[t].push_back(t);
    sets[t].insert(sets[t].end(), order.begin(), order.begin() + take);
  }
  return sets;
}

RefineResult refine_scores(std::span<const double> scores, const EmbeddingMatrix& text,
                           const VisualStats& stats, std::size_t k) {
  const std::size_t n = text.count();
  if (scores.size() != n)
    throw DimensionError("refine_scores: " + std::to_string(scores.size()) + " scores for " +
                         std::to_string(n) + " text rows");
  RefineResult result;
  result.mahalanobis.reserve(n);
  for (std::size_t j = 0; j < n; ++j) result.mahalanobis.push_back(mahalanobis(text.row(j), stats));
  if (n == 0) return result;
  result.neighbors = neighbor_sets(text, k);
  result.scores.resize(n);

  for (std::size_t t = 0; t < n; ++t) {
    const auto& set = result.neighbors[t];
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t j : set) dmin = std::min(dmin, result.mahalanobis[j]);
    double num = 0.0, den = 0.0;
    for (std::size_t j : set) {
      const double w = std::exp(-(result.mahalanobis[j] - dmin));
      num += w * scores[j];
      den += w;
    }
    if (den > 0.0 && std::isfinite(den)) {
      result.scores[t] = num / den;
    } else {
      result.fallback_rows.push_back(t);
      double s = 0.0;
      for (std::size_t j : set) s += scores[j];
      result.scores[t] = s / static_cast<double>(set.size());
    }
    // Rounding can push a convex combination a hair outside its hull.
    double lo = scores[set.front()], hi = lo;
    for (std::size_t j : set) {
      lo = std::min(lo, scores[j]);
      hi = std::max(hi, scores[j]);
    }
    result.scores[t] = std::clamp(result.scores[t], lo, hi);
  }
  return result;
}

}  // namespace mmvad::refine
