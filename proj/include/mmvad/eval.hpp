#pragma once
// Frame-level evaluation.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmvad/core.hpp"

namespace mmvad::eval {

/// Thrown when a metric is requested on data that cannot define it.
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

struct EvalReport {
  std::size_t frame_count = 0;
  std::size_t positive_count = 0;
  /// Unset when the metric is undefined (single-class labels).
  std::optional<double> auc_roc;
  std::optional<double> average_precision;

  bool defined() const { return auc_roc.has_value() && average_precision.has_value(); }
  /// Why a metric is undefined; empty when both are defined.
  std::string undefined_reason;
};

/// Every frame of segment t takes the score of t's window. Throws
/// DimensionError naming the frame range when segments do not tile
/// [0, frame_count) or when a segment maps to a missing window.
std::vector<double> expand_to_frames(std::span<const double> window_scores,
                                     std::span<const std::size_t> segment_to_window,
                                     std::span<const SegmentRecord> segments);

/// Mann-Whitney AUC with ties counted as 1/2. Throws UndefinedMetricError
/// without both classes.
double auc_roc(std::span<const double> scores, std::span<const int> labels);

/// sum_k (R_k - R_{k-1}) P_k over descending distinct score thresholds,
/// tied scores forming one step. Throws UndefinedMetricError without positives.
double average_precision(std::span<const double> scores, std::span<const int> labels);

/// Both metrics, undefined ones left unset. Throws DimensionError on a length
/// mismatch and DomainError on a label outside {0, 1}.
EvalReport evaluate(std::span<const double> scores, std::span<const int> labels);

}  // namespace mmvad::eval
