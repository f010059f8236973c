#pragma once
// Caption cleaning by semantic self-alignment, and per-window summaries.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mmvad/core.hpp"

namespace mmvad::captions {

struct CleaningResult {
  /// cleaned_index[t]: caption chosen for segment t.
  std::vector<std::size_t> cleaned_index;
  /// Zero-norm rows, reported by index. They take similarity -inf.
  std::vector<std::size_t> zero_norm_frame_rows;
  std::vector<std::size_t> zero_norm_caption_rows;
};

/// For every visual row t, the caption row j maximizing
/// cosine(frame_embs[t], caption_embs[j]) over all j. Ties go to the lowest j.
/// A zero-norm visual row matches nothing and falls back to caption 0.
CleaningResult clean_captions(const EmbeddingMatrix& frame_embs, const EmbeddingMatrix& caption_embs);

struct CaptionSet {
  std::vector<std::string> raw;
  std::vector<std::size_t> cleaned_index;
  std::vector<std::string> cleaned;

  /// Throws DimensionError if an index is out of range.
  static CaptionSet from_indices(std::vector<std::string> raw, std::vector<std::size_t> index);
  static CaptionSet identity(std::vector<std::string> raw);
};

struct SummarySet {
  std::size_t window = 1;
  std::vector<std::string> texts;
  /// segment t belongs to window segment_to_window[t] == t / window.
  std::vector<std::size_t> segment_to_window;
  /// Per-window text embedding; filled by the pipeline (may be empty).
  EmbeddingMatrix embeddings;

  std::size_t size() const { return texts.size(); }
  /// [first, last) segment range of window k.
  std::pair<std::size_t, std::size_t> segments_of(std::size_t k) const;
};

/// One summary per window of `window` consecutive segments, trailing partial
/// window included:
///   "VISUAL: <cleaned captions joined by ' '> | AUDIO: <audio captions or none>"
/// Segments without audio contribute nothing to the AUDIO part; a window with
/// no audio at all reads "none". Throws DomainError for window == 0.
SummarySet build_summaries(const CaptionSet& cleaned,
                           const std::vector<std::optional<std::string>>& audio, std::size_t window);

/// Mean of the rows selected for each window, i.e.
/// out[k] = mean_{t in window k} rows[index[t]].
EmbeddingMatrix window_means(const SummarySet& summaries, const EmbeddingMatrix& rows,
                             const std::vector<std::size_t>& index);

}  // namespace mmvad::captions
