#pragma once
// Poincaré-ball geometry of curvature -c (c > 0): the open ball of radius
// 1/sqrt(c) with its conformal metric.
//
// Every point returned by an operation here is projected to radius at most
// (1 - eps)/sqrt(c). Inputs in the margin band [1 - eps, 1) are projected
// before use; inputs on or beyond the boundary are rejected.

#include <cstddef>
#include <span>
#include <vector>

namespace mmvad::hyperbolic {

inline constexpr double kDefaultBallEps = 1e-5;

class PoincarePoint {
 public:
  PoincarePoint() = default;
  /// Stores coords as given; no projection. Use project() or the maps below
  /// to obtain points with the containment guarantee.
  PoincarePoint(std::vector<double> coords, double curvature);

  static PoincarePoint origin(std::size_t dim, double curvature);

  std::span<const double> coords() const { return coords_; }
  const std::vector<double>& vec() const { return coords_; }
  double curvature() const { return curvature_; }
  std::size_t dim() const { return coords_.size(); }

  /// sqrt(c) * ||coords||
  double scaled_norm() const;

  friend bool operator==(const PoincarePoint&, const PoincarePoint&) = default;

 private:
  std::vector<double> coords_;
  double curvature_ = 1.0;
};

/// Radial projection onto the ball of radius (1 - eps)/sqrt(c) (no-op inside).
PoincarePoint project(PoincarePoint p, double eps = kDefaultBallEps);

/// exp_0(v) = tanh(sqrt(c)|v|) v / (sqrt(c)|v|); throws DomainError on a
/// non-finite v.
PoincarePoint exp_map_origin(std::span<const double> v, double c, double eps = kDefaultBallEps);

/// log_0(p) = artanh(sqrt(c)|p|) p / (sqrt(c)|p|); throws DomainError when p
/// is on or outside the boundary.
std::vector<double> log_map_origin(const PoincarePoint& p, double eps = kDefaultBallEps);

/// Möbius addition x (+) y on the c-ball.
PoincarePoint mobius_add(const PoincarePoint& x, const PoincarePoint& y,
                         double eps = kDefaultBallEps);

/// (2/sqrt(c)) artanh(sqrt(c) |(-x) (+) y|). The Möbius norm is evaluated as
/// |x - y| / sqrt(1 - 2c<x,y> + c^2|x|^2|y|^2), which is the same quantity
/// but exactly symmetric and exactly zero for x == y.
double distance(const PoincarePoint& x, const PoincarePoint& y);

/// Exponential and logarithmic maps at an arbitrary base point, obtained by
/// Möbius-translating the origin maps (conformal factor 2/(1 - c|m|^2)).
PoincarePoint exp_map(const PoincarePoint& base, std::span<const double> v,
                      double eps = kDefaultBallEps);
std::vector<double> log_map(const PoincarePoint& base, const PoincarePoint& y);

struct KarcherOptions {
  double tol = 1e-10;
  int max_iter = 200;
  double eps = kDefaultBallEps;
};

struct GeodesicMean {
  PoincarePoint point;
  double residual = 0.0;  // norm of the last tangent update
  int iterations = 0;
  bool converged = false;
};

/// Weighted Karcher mean: fixed point of m <- exp_m(t sum_i w_i log_m(x_i))
/// with normalized weights, started from the projected weighted Euclidean
/// average. The step length t <= 1 comes from the objective's curvature along
/// the step and is 1 for concentrated points. Non-convergence is reported through `converged`, never thrown.
/// Throws DimensionError/DomainError on empty input, mismatched shapes,
/// negative weights or a zero weight sum.
GeodesicMean weighted_geodesic_mean(std::span<const PoincarePoint> points,
                                    std::span<const double> weights,
                                    const KarcherOptions& options = {});

/// sum_i w_i d(m, x_i)^2, the objective the Karcher mean minimizes.
double frechet_objective(const PoincarePoint& m, std::span<const PoincarePoint> points,
                         std::span<const double> weights);

}  // namespace mmvad::hyperbolic
