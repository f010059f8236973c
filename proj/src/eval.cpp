#include "mmvad/eval.hpp"

#include <algorithm>
#include <numeric>

namespace mmvad::eval {
namespace {

void check_pair(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw DimensionError(std::to_string(scores.size()) + " scores vs " + std::to_string(labels.size()) +
                         " labels");
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] != 0 && labels[i] != 1)
      throw DomainError("label at frame " + std::to_string(i) + " is " + std::to_string(labels[i]));
}

// Indices sorted by descending score; equal scores keep index order.
std::vector<std::size_t> descending(std::span<const double> scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return idx;
}

}  // namespace

std::vector<double> expand_to_frames(std::span<const double> window_scores,
                                     std::span<const std::size_t> segment_to_window,
                                     std::span<const SegmentRecord> segments) {
  if (segment_to_window.size() != segments.size())
    throw DimensionError("expand_to_frames: window map covers " + std::to_string(segment_to_window.size()) +
                         " of " + std::to_string(segments.size()) + " segments");
  std::vector<double> frames;
  std::int64_t next = 0;
  for (std::size_t t = 0; t < segments.size(); ++t) {
    const auto& s = segments[t];
    if (s.frame_start != next || s.frame_end < s.frame_start) {
      const std::int64_t gap_end = s.frame_start - 1;
      throw DimensionError("expand_to_frames: frames [" + std::to_string(next) + ", " +
                           std::to_string(std::max(gap_end, next)) + "] not covered exactly once at segment " +
                           std::to_string(t));
    }
    const std::size_t w = segment_to_window[t];
    if (w >= window_scores.size())
      throw DimensionError("expand_to_frames: segment " + std::to_string(t) + " maps to missing window " +
                           std::to_string(w));
    frames.insert(frames.end(), static_cast<std::size_t>(s.frame_count()), window_scores[w]);
    next = s.frame_end + 1;
  }
  return frames;
}

double auc_roc(std::span<const double> scores, std::span<const int> labels) {
  check_pair(scores, labels);
  const auto idx = descending(scores);
  // Walk tie groups from the top; each positive earns credit for negatives
  // strictly below it and half credit for tied negatives.
  double positives = 0, negatives = 0;
  for (int l : labels) (l ? positives : negatives) += 1;
  if (positives == 0 || negatives == 0)
    throw UndefinedMetricError("AUC-ROC undefined: labels contain a single class");
  double credit = 0.0;
  double negatives_below = negatives;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    double pos = 0, neg = 0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      (labels[idx[j]] ? pos : neg) += 1;
      ++j;
    }
    negatives_below -= neg;
    credit += pos * negatives_below + 0.5 * pos * neg;
    i = j;
  }
  return credit / (positives * negatives);
}

double average_precision(std::span<const double> scores, std::span<const int> labels) {
  check_pair(scores, labels);
  double positives = 0;
  for (int l : labels) positives += l;
  if (positives == 0) throw UndefinedMetricError("average precision undefined: no positive frames");
  const auto idx = descending(scores);
  double tp = 0, fp = 0, ap = 0, prev_recall = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      (labels[idx[j]] ? tp : fp) += 1;
      ++j;
    }
    const double recall = tp / positives;
    ap += (recall - prev_recall) * (tp / (tp + fp));
    prev_recall = recall;
    i = j;
  }
  return ap;
}

EvalReport evaluate(std::span<const double> scores, std::span<const int> labels) {
  check_pair(scores, labels);
  EvalReport report;
  report.frame_count = labels.size();
  report.positive_count = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (report.positive_count == 0 || report.positive_count == report.frame_count) {
    report.undefined_reason = report.frame_count == 0 ? "no frames"
                              : report.positive_count == 0 ? "no positive frames"
                                                           : "no negative frames";
    return report;
  }
  report.auc_roc = auc_roc(scores, labels);
  report.average_precision = average_precision(scores, labels);
  return report;
}

}  // namespace mmvad::eval
