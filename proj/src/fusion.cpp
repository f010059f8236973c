#include "mmvad/fusion.hpp"

#include <cmath>

#include "mmvad/kernels.hpp"

namespace mmvad::fusion {

FusionOptions FusionOptions::from(const PipelineConfig& config, Geometry geometry, bool use_audio) {
  FusionOptions o;
  o.geometry = geometry;
  o.curvature = config.curvature;
  o.weights = {config.fusion_weight_visual, config.fusion_weight_audio};
  o.tangent_scale = config.tangent_scale;
  o.karcher = {config.karcher_tol, config.karcher_max_iter, config.ball_eps};
  o.use_audio = use_audio;
  return o;
}

std::vector<double> to_tangent(std::span<const double> embedding, double scale) {
  std::vector<double> v(embedding.begin(), embedding.end());
  const double norm = std::sqrt(kernels::squared_norm(v));
  if (norm == 0.0) return v;
  const double f = scale / norm;
  for (auto& x : v) x *= f;
  return v;
}

namespace {

void check_inputs(std::span<const double> e_vis, std::optional<std::span<const double>> e_aud,
                  const FusionWeights& w) {
  for (double x : e_vis)
    if (!std::isfinite(x)) throw DomainError("fuse_segment: non-finite visual embedding");
  if (e_aud) {
    if (e_aud->size() != e_vis.size())
      throw DimensionError("fuse_segment: visual dim " + std::to_string(e_vis.size()) +
                           " != audio dim " + std::to_string(e_aud->size()));
    for (double x : *e_aud)
      if (!std::isfinite(x)) throw DomainError("fuse_segment: non-finite audio embedding");
  }
  if (!(w.visual >= 0.0) || !(w.audio >= 0.0) || std::abs(w.visual + w.audio - 1.0) > 1e-12)
    throw DomainError("fuse_segment: weights must be non-negative and sum to 1");
}

}  // namespace

hyperbolic::GeodesicMean fuse_segment(std::span<const double> e_vis,
                                      std::optional<std::span<const double>> e_aud,
                                      const FusionWeights& w, double curvature,
                                      const hyperbolic::KarcherOptions& karcher) {
  check_inputs(e_vis, e_aud, w);
  auto z_vis = hyperbolic::exp_map_origin(e_vis, curvature, karcher.eps);
  if (!e_aud) {
    hyperbolic::GeodesicMean unimodal;
    unimodal.point = std::move(z_vis);
    unimodal.converged = true;
    return unimodal;
  }
  const hyperbolic::PoincarePoint pts[2] = {std::move(z_vis),
                                            hyperbolic::exp_map_origin(*e_aud, curvature, karcher.eps)};
  const double weights[2] = {w.visual, w.audio};
  return hyperbolic::weighted_geodesic_mean(pts, weights, karcher);
}

std::vector<double> fuse_segment_euclidean(std::span<const double> e_vis,
                                           std::optional<std::span<const double>> e_aud,
                                           const FusionWeights& w) {
  check_inputs(e_vis, e_aud, w);
  if (!e_aud) return {e_vis.begin(), e_vis.end()};
  std::vector<double> out(e_vis.size(), 0.0);
  kernels::axpy(w.visual, e_vis, out);
  kernels::axpy(w.audio, *e_aud, out);
  return out;
}

FusedSequence fuse_sequence(const Dataset& dataset, const std::vector<std::size_t>& caption_index,
                            const FusionOptions& options) {
  const std::size_t n = dataset.size();
  if (caption_index.size() != n)
    throw DimensionError("fuse_sequence: caption index length differs from segment count");
  FusedSequence out;
  out.geometry = options.geometry;
  out.curvature = options.curvature;
  out.points.reserve(n);
  out.modality_mask.reserve(n);
  if (n == 0) return out;

  const EmbeddingMatrix& text = dataset.at(Modality::kText);
  const EmbeddingMatrix* audio =
      options.use_audio && dataset.has(Modality::kAudio) ? &dataset.at(Modality::kAudio) : nullptr;

  for (std::size_t t = 0; t < n; ++t) {
    const std::vector<double> e_vis = to_tangent(text.row(caption_index.at(t)), options.tangent_scale);
    std::optional<std::vector<double>> e_aud;
    if (audio && dataset.segments[t].has_audio())
      e_aud = to_tangent(audio->row(t), options.tangent_scale);
    std::optional<std::span<const double>> aud_view;
    if (e_aud) aud_view = std::span<const double>(*e_aud);

    out.modality_mask.push_back(kMaskVisual | (e_aud ? kMaskAudio : 0));
    if (options.geometry == Geometry::kEuclidean) {
      out.points.emplace_back(fuse_segment_euclidean(e_vis, aud_view, options.weights), options.curvature);
      continue;
    }
    auto fused = fuse_segment(e_vis, aud_view, options.weights, options.curvature, options.karcher);
    if (!fused.converged) out.unconverged.push_back(t);
    out.points.push_back(std::move(fused.point));
  }
  return out;
}

EmbeddingMatrix window_features(const FusedSequence& fused, const captions::SummarySet& summaries,
                                const FusionOptions& options) {
  if (fused.size() != summaries.segment_to_window.size())
    throw DimensionError("window_features: fused length differs from segment count");
  const std::size_t dim = fused.size() ? fused.points.front().dim() : 1;
  EmbeddingMatrix out(Modality::kText, dim, summaries.size());
  for (std::size_t k = 0; k < summaries.size(); ++k) {
    const auto [first, last] = summaries.segments_of(k);
    std::span<const hyperbolic::PoincarePoint> members(fused.points.data() + first, last - first);
    auto dst = out.row(k);
    if (options.geometry == Geometry::kEuclidean) {
      const double w = 1.0 / static_cast<double>(members.size());
      for (const auto& p : members) kernels::axpy(w, p.coords(), dst);
      continue;
    }
    std::vector<hyperbolic::PoincarePoint> pts(members.begin(), members.end());
    const std::vector<double> weights(pts.size(), 1.0);
    const auto mean = pts.size() == 1 ? hyperbolic::GeodesicMean{pts.front(), 0.0, 0, true}
                                      : hyperbolic::weighted_geodesic_mean(pts, weights, options.karcher);
    const auto tangent = hyperbolic::log_map_origin(mean.point, options.karcher.eps);
    std::copy(tangent.begin(), tangent.end(), dst.begin());
  }
  return out;
}

}  // namespace mmvad::fusion
