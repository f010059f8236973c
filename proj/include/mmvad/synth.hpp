#pragma once
// Synthetic datasets with a planted anomaly direction.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "mmvad/core.hpp"

namespace mmvad::synth {

struct SynthOptions {
  std::size_t segments = 400;
  std::size_t dim = 16;
  double anomaly_fraction = 0.1;
  double shift = 6.0;
  std::uint64_t seed = 0;
  std::size_t frames_per_segment = 16;
  std::size_t max_event_length = 20;
  bool audio = true;
  double caption_noise = 0.3;
  double audio_noise = 0.5;
  double swapped_caption_fraction = 0.1;

  /// Throws DomainError outside fraction in (0, 1), shift >= 0, dim >= 1,
  /// frames_per_segment >= 1.
  void validate() const;
};

struct SyntheticDataset {
  std::vector<SegmentRecord> segments;
  EmbeddingMatrix visual;
  EmbeddingMatrix text;
  std::optional<EmbeddingMatrix> audio;
  std::vector<int> segment_labels;
  std::vector<int> frame_labels;
  /// Per-frame AUC of the Mahalanobis distance under the generator's known
  /// normal cluster N(0, I); unset when metrics are undefined.
  std::optional<double> oracle_auc;
};

/// Normal segments draw a latent x ~ N(0, I); anomalous segments, placed as
/// contiguous events, add shift * seeded_direction(seed, dim). Visual rows
/// are x, caption rows x + N(0, caption_noise^2) with a fraction of captions
/// swapped to another segment's, audio rows x + N(0, audio_noise^2).
SyntheticDataset generate(const SynthOptions& options);

/// Writes visual.mmve, text.mmve, [audio.mmve], captions.jsonl, labels.csv,
/// manifest.cfg (seed included) and oracle.json into `dir`.
void write_dataset(const SyntheticDataset& data, const SynthOptions& options, const std::filesystem::path& dir);

}  // namespace mmvad::synth
