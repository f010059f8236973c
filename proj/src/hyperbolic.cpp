#include "mmvad/hyperbolic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mmvad/core.hpp"
#include "mmvad/kernels.hpp"

namespace mmvad::hyperbolic {
namespace {

void require_same_space(const PoincarePoint& x, const PoincarePoint& y) {
  if (x.curvature() != y.curvature())
    throw DimensionError("curvature mismatch: " + std::to_string(x.curvature()) + " vs " +
                         std::to_string(y.curvature()));
  if (x.dim() != y.dim())
    throw DimensionError("dimension mismatch: " + std::to_string(x.dim()) + " vs " +
                         std::to_string(y.dim()));
}

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw DomainError(std::string(what) + ": non-finite input");
}

// Projects into the margin band, rejecting points on or outside the boundary.
PoincarePoint admit(const PoincarePoint& p, double eps, const char* what) {
  require_finite(p.coords(), what);
  if (p.scaled_norm() >= 1.0)
    throw DomainError(std::string(what) + ": point on or outside the ball boundary");
  return project(p, eps);
}

// tanh(x)/x and artanh(x)/x with their limits at 0.
double tanh_ratio(double x) { return x == 0.0 ? 1.0 : std::tanh(x) / x; }
double artanh_ratio(double x) { return x == 0.0 ? 1.0 : std::atanh(x) / x; }

std::vector<double> mobius_add_raw(std::span<const double> x, std::span<const double> y, double c) {
  const double xy = kernels::dot(x, y);
  const double x2 = kernels::squared_norm(x);
  const double y2 = kernels::squared_norm(y);
  const double denom = 1.0 + 2.0 * c * xy + c * c * x2 * y2;
  const double a = (1.0 + 2.0 * c * xy + c * y2) / denom;
  const double b = (1.0 - c * x2) / denom;
  std::vector<double> out(x.size(), 0.0);
  kernels::axpy(a, x, out);
  kernels::axpy(b, y, out);
  return out;
}

std::vector<double> negated(std::span<const double> v) {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](double x) { return -x; });
  return out;
}

}  // namespace

PoincarePoint::PoincarePoint(std::vector<double> coords, double curvature)
    : coords_(std::move(coords)), curvature_(curvature) {
  if (!(curvature > 0.0)) throw DomainError("curvature must be positive");
}

PoincarePoint PoincarePoint::origin(std::size_t dim, double curvature) {
  return PoincarePoint(std::vector<double>(dim, 0.0), curvature);
}

double PoincarePoint::scaled_norm() const {
  return std::sqrt(curvature_) * std::sqrt(kernels::squared_norm(coords_));
}

PoincarePoint project(PoincarePoint p, double eps) {
  const double limit = 1.0 - eps;
  const double r = p.scaled_norm();
  if (r <= limit) return p;
  std::vector<double> coords = p.vec();
  const double s = limit / r;
  for (auto& x : coords) x *= s;
  return PoincarePoint(std::move(coords), p.curvature());
}

PoincarePoint exp_map_origin(std::span<const double> v, double c, double eps) {
  require_finite(v, "exp_map_origin");
  const double sc = std::sqrt(c);
  const double arg = sc * std::sqrt(kernels::squared_norm(v));
  const double f = tanh_ratio(arg);
  std::vector<double> out(v.begin(), v.end());
  for (auto& x : out) x *= f;
  return project(PoincarePoint(std::move(out), c), eps);
}

std::vector<double> log_map_origin(const PoincarePoint& p, double eps) {
  const PoincarePoint q = admit(p, eps, "log_map_origin");
  const double arg = q.scaled_norm();
  const double f = artanh_ratio(arg);
  std::vector<double> out = q.vec();
  for (auto& x : out) x *= f;
  return out;
}

PoincarePoint mobius_add(const PoincarePoint& x, const PoincarePoint& y, double eps) {
  require_same_space(x, y);
  const PoincarePoint xa = admit(x, eps, "mobius_add");
  const PoincarePoint ya = admit(y, eps, "mobius_add");
  return project(PoincarePoint(mobius_add_raw(xa.coords(), ya.coords(), x.curvature()), x.curvature()),
                 eps);
}

double distance(const PoincarePoint& x, const PoincarePoint& y) {
  require_same_space(x, y);
  require_finite(x.coords(), "distance");
  require_finite(y.coords(), "distance");
  if (x.scaled_norm() >= 1.0 || y.scaled_norm() >= 1.0)
    throw DomainError("distance: point on or outside the ball boundary");
  const double c = x.curvature();
  const double diff2 = kernels::squared_distance(x.coords(), y.coords());
  if (diff2 == 0.0) return 0.0;
  const double xy = kernels::dot(x.coords(), y.coords());
  const double x2 = kernels::squared_norm(x.coords());
  const double y2 = kernels::squared_norm(y.coords());
  const double denom = 1.0 - 2.0 * c * xy + c * c * x2 * y2;
  const double sc = std::sqrt(c);
  const double arg = std::min(sc * std::sqrt(diff2 / denom), std::nextafter(1.0, 0.0));
  return 2.0 / sc * std::atanh(arg);
}

PoincarePoint exp_map(const PoincarePoint& base, std::span<const double> v, double eps) {
  require_finite(v, "exp_map");
  if (v.size() != base.dim()) throw DimensionError("exp_map: tangent dimension mismatch");
  const double c = base.curvature();
  const double sc = std::sqrt(c);
  const double vnorm = std::sqrt(kernels::squared_norm(v));
  if (vnorm == 0.0) return project(base, eps);
  const double lambda = 2.0 / (1.0 - c * kernels::squared_norm(base.coords()));
  const double f = std::tanh(sc * lambda * vnorm / 2.0) / (sc * vnorm);
  std::vector<double> step(v.begin(), v.end());
  for (auto& x : step) x *= f;
  // The step is clamped into the ball before translating; tanh saturates to 1.
  const PoincarePoint moved = project(PoincarePoint(std::move(step), c), eps);
  return project(PoincarePoint(mobius_add_raw(base.coords(), moved.coords(), c), c), eps);
}

std::vector<double> log_map(const PoincarePoint& base, const PoincarePoint& y) {
  require_same_space(base, y);
  const double c = base.curvature();
  const double sc = std::sqrt(c);
  const std::vector<double> minus_base = negated(base.coords());
  std::vector<double> u = mobius_add_raw(minus_base, y.coords(), c);
  const double unorm = std::sqrt(kernels::squared_norm(u));
  if (unorm == 0.0) return std::vector<double>(base.dim(), 0.0);
  const double lambda = 2.0 / (1.0 - c * kernels::squared_norm(base.coords()));
  const double arg = std::min(sc * unorm, std::nextafter(1.0, 0.0));
  const double f = 2.0 / (sc * lambda) * std::atanh(arg) / unorm;
  for (auto& x : u) x *= f;
  return u;
}

GeodesicMean weighted_geodesic_mean(std::span<const PoincarePoint> points,
                                    std::span<const double> weights,
                                    const KarcherOptions& options) {
  if (points.empty()) throw DimensionError("geodesic mean of an empty set");
  if (weights.size() != points.size())
    throw DimensionError("geodesic mean: " + std::to_string(weights.size()) + " weights for " +
                         std::to_string(points.size()) + " points");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("geodesic mean: weights must be finite and >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw DomainError("geodesic mean: weights sum to zero");

  std::vector<PoincarePoint> admitted;
  admitted.reserve(points.size());
  for (const auto& p : points) {
    require_same_space(points.front(), p);
    admitted.push_back(admit(p, options.eps, "geodesic mean"));
  }
  const double c = points.front().curvature();
  const std::size_t dim = points.front().dim();

  std::vector<double> w(weights.begin(), weights.end());
  for (auto& x : w) x /= total;

  std::vector<double> init(dim, 0.0);
  for (std::size_t i = 0; i < admitted.size(); ++i)
    if (w[i] != 0.0) kernels::axpy(w[i], admitted[i].coords(), init);
  GeodesicMean result;
  result.point = project(PoincarePoint(std::move(init), c), options.eps);

  // Weighted sum of log maps at m, keeping every log for the step model.
  std::vector<std::vector<double>> logs(admitted.size()), next_logs(admitted.size());
  const auto tangent_sum = [&](const PoincarePoint& m, std::vector<std::vector<double>>& per_point,
                               std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < admitted.size(); ++i) {
      if (w[i] == 0.0) continue;
      per_point[i] = log_map(m, admitted[i]);
      kernels::axpy(w[i], per_point[i], out);
    }
    return std::sqrt(kernels::squared_norm(out));
  };

  // Step length from the exact Hessian of the objective along the step: 1
  // radially and rho coth(rho) across, rho = sqrt(c) d(m, x_i). It equals 1
  // when the points are concentrated and shrinks when they are spread out.
  const auto model_step = [&](const PoincarePoint& m, const std::vector<double>& g) {
    const double lambda = 2.0 / (1.0 - c * kernels::squared_norm(m.coords()));
    const double gg = kernels::squared_norm(g);
    double curvature_along = 0.0;
    for (std::size_t i = 0; i < admitted.size(); ++i) {
      if (w[i] == 0.0) continue;
      const double len = std::sqrt(kernels::squared_norm(logs[i]));
      const double rho = std::sqrt(c) * lambda * len;
      const double a = rho < 1e-6 ? 1.0 + rho * rho / 3.0 : rho / std::tanh(rho);
      const double along = len > 0.0 ? kernels::dot(logs[i], g) / len : 0.0;
      curvature_along += w[i] * (a * gg + (1.0 - a) * along * along);
    }
    return curvature_along > 0.0 ? std::min(1.0, gg / curvature_along) : 1.0;
  };

  std::vector<double> step(dim), next_step(dim), scaled(dim);
  result.residual = tangent_sum(result.point, logs, step);
  for (int it = 0;; ++it) {
    result.iterations = it;
    if (result.residual < options.tol) {
      result.converged = true;
      break;
    }
    if (it >= options.max_iter) break;
    // Safeguard: a step is kept only if it shrinks the residual.
    bool moved = false;
    double t = model_step(result.point, step);
    for (int halvings = 0; halvings < 40; ++halvings, t *= 0.5) {
      for (std::size_t k = 0; k < dim; ++k) scaled[k] = t * step[k];
      PoincarePoint candidate = exp_map(result.point, scaled, options.eps);
      const double residual = tangent_sum(candidate, next_logs, next_step);
      if (residual < result.residual) {
        result.point = std::move(candidate);
        result.residual = residual;
        step.swap(next_step);
        logs.swap(next_logs);
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return result;
}

double frechet_objective(const PoincarePoint& m, std::span<const PoincarePoint> points,
                         std::span<const double> weights) {
  if (weights.size() != points.size()) throw DimensionError("frechet_objective: weight count mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = distance(m, points[i]);
    s += weights[i] * d * d;
  }
  return s;
}

}  // namespace mmvad::hyperbolic
