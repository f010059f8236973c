#pragma once
// Covariance-aware score refinement.
//
// Each window score is replaced by a weighted mean over its K nearest
// textual neighbours, each neighbour j weighted by its visual plausibility
// exp(-D_M(text_j)), the Mahalanobis distance of its text embedding from the
// visual feature distribution of the video.

#include <cstddef>
#include <span>
#include <vector>

#include "mmvad/core.hpp"

namespace mmvad::refine {

/// Raised when the shrunk covariance is not positive definite.
class FactorizationError : public Error {
 public:
  FactorizationError(const std::string& what, double smallest_eigenvalue)
      : Error(what), smallest_eigenvalue(smallest_eigenvalue) {}
  double smallest_eigenvalue;
};

struct VisualStats {
  std::vector<double> mean;
  /// Row-major d x d precision (inverse covariance), symmetric.
  std::vector<double> precision;
  double shrinkage = 0.0;
  std::size_t sample_count = 0;

  std::size_t dim() const { return mean.size(); }
  double precision_at(std::size_t i, std::size_t j) const { return precision[i * dim() + j]; }
};

/// Unbiased sample covariance of the rows (d x d, row-major).
std::vector<double> sample_covariance(const EmbeddingMatrix& rows, std::span<const double> mean);

/// Column mean, shrunk covariance (1-s) S + s (tr S / d) I and its inverse by
/// Cholesky factorization. Throws DomainError for fewer than two rows or s
/// outside [0, 1], FactorizationError when the factorization fails.
VisualStats fit_visual_stats(const EmbeddingMatrix& visual, double shrinkage);

/// sqrt((x - mean)^T P (x - mean)). Throws DimensionError on a size mismatch.
double mahalanobis(std::span<const double> x, const VisualStats& stats);

/// 1 - cosine similarity; +inf when either vector has zero norm.
double cosine_distance(std::span<const double> a, std::span<const double> b);

/// K_t: t itself first, then the K-1 other rows with the smallest cosine
/// distance to row t, ties broken by lower index. Order is by rank.
std::vector<std::vector<std::size_t>> neighbor_sets(const EmbeddingMatrix& text, std::size_t k);

struct RefineResult {
  std::vector<double> scores;
  std::vector<double> mahalanobis;  // D_M of every text row
  std::vector<std::vector<std::size_t>> neighbors;
  /// Rows whose weights all vanished and that fell back to an unweighted mean.
  std::vector<std::size_t> fallback_rows;
};

/// a'_t = sum_{j in K_t} w_j a_j / sum_{j in K_t} w_j with w_j = exp(-D_M_j).
/// The weights are evaluated as exp(-(D_M_j - min_{K_t} D_M)), which leaves
/// the ratio unchanged and keeps the largest weight at 1. Sums run over K_t
/// in rank order.
RefineResult refine_scores(std::span<const double> scores, const EmbeddingMatrix& text,
                           const VisualStats& stats, std::size_t k);

}  // namespace mmvad::refine
