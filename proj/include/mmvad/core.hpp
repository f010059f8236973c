#pragma once
// Domain types shared by every pipeline stage.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mmvad {

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape or dimension disagreement between inputs.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Input outside an operation's domain (NaN, out-of-range probability, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unreadable file.
class FormatError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------

enum class Modality : std::uint8_t { kVisual = 0, kAudio = 1, kText = 2 };

std::string_view modality_name(Modality m);

/// Row-major count x dim matrix of finite doubles.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(Modality modality, std::size_t dim, std::size_t count);
  /// Takes ownership of `data`; throws DimensionError if the size is not a
  /// multiple of dim. Finiteness is checked by validate_dataset.
  EmbeddingMatrix(Modality modality, std::size_t dim, std::vector<double> data);

  Modality modality() const { return modality_; }
  std::size_t dim() const { return dim_; }
  std::size_t count() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
  bool empty() const { return data_.empty(); }

  std::span<const double> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }
  std::span<const double> data() const { return data_; }

  /// Index of the first row with a non-finite entry, if any.
  std::optional<std::size_t> first_non_finite_row() const;

 private:
  Modality modality_ = Modality::kVisual;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

struct SegmentRecord {
  std::size_t index = 0;
  std::int64_t frame_start = 0;
  std::int64_t frame_end = 0;  // inclusive
  std::string visual_caption;
  std::optional<std::string> audio_caption;

  bool has_audio() const { return audio_caption.has_value(); }
  std::int64_t frame_count() const { return frame_end - frame_start + 1; }
};

struct ScoreSeries {
  std::vector<double> segment_scores;
  std::vector<double> frame_scores;
  std::optional<std::vector<int>> labels;
};

/// Tunables for every stage. Defaults are the values the pipeline ships with.
struct PipelineConfig {
  double curvature = 1.0;
  double fusion_weight_visual = 0.5;
  double fusion_weight_audio = 0.5;
  double tangent_scale = 0.5;
  double karcher_tol = 1e-10;
  int karcher_max_iter = 200;
  std::size_t window = 10;
  std::size_t prompt_dim = 32;
  double eta = 0.05;
  int iterations = 50;
  std::optional<double> mu_target;  // unset: 0.1 * number of windows
  double lambda_sparsity = 1.0;
  std::size_t neighbors = 5;
  double shrinkage = 0.1;
  double ball_eps = 1e-5;
  double stub_gain = 8.0;
  std::uint64_t seed = 0;

  /// Throws DomainError naming the first violated invariant.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Dataset validation

struct ValidationIssue {
  std::string code;     // "count_mismatch", "dim_mismatch", "non_finite", ...
  std::string message;  // names the offending segment/modality
};

/// Immutable, validated view of one video.
struct Dataset {
  std::vector<SegmentRecord> segments;
  std::map<Modality, EmbeddingMatrix> embeddings;

  std::size_t size() const { return segments.size(); }
  std::int64_t frame_count() const { return segments.empty() ? 0 : segments.back().frame_end + 1; }
  bool has(Modality m) const { return embeddings.count(m) != 0; }
  const EmbeddingMatrix& at(Modality m) const;
};

struct ValidationResult {
  std::optional<Dataset> dataset;
  std::vector<ValidationIssue> issues;

  bool ok() const { return dataset.has_value(); }
  std::string summary() const;
};

/// Accepts iff: every matrix has one row per segment and only finite
/// entries; visual and text share a dimension (they are compared by cosine);
/// audio, when present, has the text dimension (they are fused); segments
/// are indexed 0..N-1, start at frame 0, and tile the frame axis with
/// frame_start <= frame_end. Visual and text matrices are required when
/// there is at least one segment.
ValidationResult validate_dataset(std::vector<SegmentRecord> segments,
                                  std::map<Modality, EmbeddingMatrix> embeddings);

}  // namespace mmvad
