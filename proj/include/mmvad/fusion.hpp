#pragma once
// Hyperbolic fusion of per-segment caption embeddings.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mmvad/captions.hpp"
#include "mmvad/core.hpp"
#include "mmvad/hyperbolic.hpp"

namespace mmvad::fusion {

enum class Geometry { kHyperbolic, kEuclidean };

struct FusionWeights {
  double visual = 0.5;
  double audio = 0.5;
};

struct FusionOptions {
  Geometry geometry = Geometry::kHyperbolic;
  double curvature = 1.0;
  FusionWeights weights;
  /// Caption embeddings are L2-normalized and multiplied by this before the
  /// exponential map.
  double tangent_scale = 0.5;
  hyperbolic::KarcherOptions karcher;
  bool use_audio = true;

  static FusionOptions from(const PipelineConfig& config, Geometry geometry, bool use_audio);
};

enum ModalityMask : std::uint8_t { kMaskVisual = 1, kMaskAudio = 2 };

struct FusedSequence {
  Geometry geometry = Geometry::kHyperbolic;
  double curvature = 1.0;
  /// One point per segment. Ball coordinates for hyperbolic fusion,
  /// plain vectors for euclidean fusion.
  std::vector<hyperbolic::PoincarePoint> points;
  std::vector<std::uint8_t> modality_mask;
  /// Segments whose Karcher iteration hit max_iter.
  std::vector<std::size_t> unconverged;

  std::size_t size() const { return points.size(); }
};

/// L2-normalize then scale; a zero row stays zero.
std::vector<double> to_tangent(std::span<const double> embedding, double scale);

/// GeodesicMean(exp_0(e_vis), exp_0(e_aud)) with weights w. Without audio
/// the result is exp_0(e_vis), with no iteration.
hyperbolic::GeodesicMean fuse_segment(std::span<const double> e_vis,
                                      std::optional<std::span<const double>> e_aud,
                                      const FusionWeights& w, double curvature,
                                      const hyperbolic::KarcherOptions& karcher = {});

/// Weighted arithmetic mean (w_vis e_vis + w_aud e_aud); e_vis alone without audio.
std::vector<double> fuse_segment_euclidean(std::span<const double> e_vis,
                                           std::optional<std::span<const double>> e_aud,
                                           const FusionWeights& w);

/// Fuses every segment of a validated dataset. The visual input of segment t
/// is text row caption_index[t] (the cleaned caption); the audio input is
/// audio row t when the segment has an audio caption and audio embeddings
/// exist.
FusedSequence fuse_sequence(const Dataset& dataset, const std::vector<std::size_t>& caption_index,
                            const FusionOptions& options);

/// Per-window representation in the origin tangent space: log_0 of the
/// equal-weight geodesic mean of the window's fused points (hyperbolic), or
/// their arithmetic mean (euclidean).
EmbeddingMatrix window_features(const FusedSequence& fused, const captions::SummarySet& summaries,
                                const FusionOptions& options);

}  // namespace mmvad::fusion
