#include "mmvad/captions.hpp"

#include <cmath>
#include <limits>

#include "mmvad/kernels.hpp"

namespace mmvad::captions {

CleaningResult clean_captions(const EmbeddingMatrix& frame_embs, const EmbeddingMatrix& caption_embs) {
  const std::size_t n = frame_embs.count();
  if (caption_embs.count() != n)
    throw DimensionError("clean_captions: " + std::to_string(n) + " visual rows vs " +
                         std::to_string(caption_embs.count()) + " caption rows");
  if (n > 0 && frame_embs.dim() != caption_embs.dim())
    throw DimensionError("clean_captions: visual dim " + std::to_string(frame_embs.dim()) +
                         " != caption dim " + std::to_string(caption_embs.dim()));

  CleaningResult result;
  result.cleaned_index.assign(n, 0);
  if (n == 0) return result;
  const std::size_t dim = frame_embs.dim();

  std::vector<double> caption_norm(n);
  for (std::size_t j = 0; j < n; ++j) {
    caption_norm[j] = std::sqrt(kernels::squared_norm(caption_embs.row(j)));
    if (caption_norm[j] == 0.0) result.zero_norm_caption_rows.push_back(j);
  }

  std::vector<double> dots(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double fnorm = std::sqrt(kernels::squared_norm(frame_embs.row(t)));
    if (fnorm == 0.0) {
      result.zero_norm_frame_rows.push_back(t);
      continue;
    }
    kernels::matvec(caption_embs.data(), dim, frame_embs.row(t), dots);
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (caption_norm[j] == 0.0) continue;
      const double sim = dots[j] / (fnorm * caption_norm[j]);
      if (sim > best) {
        best = sim;
        best_j = j;
      }
    }
    result.cleaned_index[t] = best_j;
  }
  return result;
}

CaptionSet CaptionSet::from_indices(std::vector<std::string> raw, std::vector<std::size_t> index) {
  CaptionSet set;
  set.cleaned.reserve(index.size());
  for (std::size_t t = 0; t < index.size(); ++t) {
    if (index[t] >= raw.size())
      throw DimensionError("caption index " + std::to_string(index[t]) + " for segment " +
                           std::to_string(t) + " out of range");
    set.cleaned.push_back(raw[index[t]]);
  }
  set.raw = std::move(raw);
  set.cleaned_index = std::move(index);
  return set;
}

CaptionSet CaptionSet::identity(std::vector<std::string> raw) {
  std::vector<std::size_t> index(raw.size());
  for (std::size_t i = 0; i < index.size(); ++i) index[i] = i;
  return from_indices(std::move(raw), std::move(index));
}

std::pair<std::size_t, std::size_t> SummarySet::segments_of(std::size_t k) const {
  const std::size_t first = k * window;
  const std::size_t last = std::min(first + window, segment_to_window.size());
  return {first, last};
}

SummarySet build_summaries(const CaptionSet& cleaned,
                           const std::vector<std::optional<std::string>>& audio, std::size_t window) {
  if (window == 0) throw DomainError("build_summaries: window must be >= 1");
  const std::size_t n = cleaned.cleaned.size();
  if (!audio.empty() && audio.size() != n)
    throw DimensionError("build_summaries: audio caption count differs from segment count");

  SummarySet out;
  out.window = window;
  out.segment_to_window.resize(n);
  for (std::size_t t = 0; t < n; ++t) out.segment_to_window[t] = t / window;
  const std::size_t windows = (n + window - 1) / window;
  out.texts.reserve(windows);
  for (std::size_t k = 0; k < windows; ++k) {
    const auto [first, last] = out.segments_of(k);
    std::string visual, sound;
    for (std::size_t t = first; t < last; ++t) {
      if (!visual.empty()) visual += ' ';
      visual += cleaned.cleaned[t];
      if (!audio.empty() && audio[t]) {
        if (!sound.empty()) sound += ' ';
        sound += *audio[t];
      }
    }
    out.texts.push_back("VISUAL: " + visual + " | AUDIO: " + (sound.empty() ? "none" : sound));
  }
  return out;
}

EmbeddingMatrix window_means(const SummarySet& summaries, const EmbeddingMatrix& rows,
                             const std::vector<std::size_t>& index) {
  if (index.size() != summaries.segment_to_window.size())
    throw DimensionError("window_means: index length differs from segment count");
  EmbeddingMatrix out(Modality::kText, rows.dim(), summaries.size());
  for (std::size_t k = 0; k < summaries.size(); ++k) {
    const auto [first, last] = summaries.segments_of(k);
    auto dst = out.row(k);
    for (std::size_t t = first; t < last; ++t) kernels::axpy(1.0, rows.row(index[t]), dst);
    const double inv = 1.0 / static_cast<double>(last - first);
    for (auto& x : dst) x *= inv;
  }
  return out;
}

}  // namespace mmvad::captions
