#include "mmvad/core.hpp"

#include <cmath>
#include <sstream>

namespace mmvad {

std::string_view modality_name(Modality m) {
  switch (m) {
    case Modality::kVisual: return "visual";
    case Modality::kAudio: return "audio";
    case Modality::kText: return "text";
  }
  return "unknown";
}

EmbeddingMatrix::EmbeddingMatrix(Modality modality, std::size_t dim, std::size_t count)
    : modality_(modality), dim_(dim), data_(dim * count, 0.0) {
  if (dim == 0) throw DimensionError("embedding dim must be positive");
}

EmbeddingMatrix::EmbeddingMatrix(Modality modality, std::size_t dim, std::vector<double> data)
    : modality_(modality), dim_(dim), data_(std::move(data)) {
  if (dim == 0) throw DimensionError("embedding dim must be positive");
  if (data_.size() % dim != 0) {
    std::ostringstream os;
    os << modality_name(modality) << " embeddings: " << data_.size()
       << " values is not a multiple of dim " << dim;
    throw DimensionError(os.str());
  }
}

std::optional<std::size_t> EmbeddingMatrix::first_non_finite_row() const {
  for (std::size_t i = 0; i < data_.size(); ++i)
    if (!std::isfinite(data_[i])) return i / dim_;
  return std::nullopt;
}

void PipelineConfig::validate() const {
  auto fail = [](const std::string& what) { throw DomainError("config: " + what); };
  if (!(curvature > 0.0) || !std::isfinite(curvature)) fail("curvature must be > 0");
  if (!(fusion_weight_visual >= 0.0) || !(fusion_weight_audio >= 0.0))
    fail("fusion weights must be non-negative");
  if (std::abs(fusion_weight_visual + fusion_weight_audio - 1.0) > 1e-12)
    fail("fusion weights must sum to 1");
  if (!(tangent_scale > 0.0)) fail("tangent_scale must be > 0");
  if (!(karcher_tol > 0.0) || karcher_max_iter < 1) fail("karcher tolerance/iterations must be positive");
  if (window < 1) fail("window must be >= 1");
  if (prompt_dim < 1) fail("prompt_dim must be >= 1");
  if (!(eta > 0.0)) fail("eta must be > 0");
  if (iterations < 0) fail("iterations must be >= 0");
  if (mu_target && !(*mu_target >= 0.0)) fail("mu_target must be >= 0");
  if (!(lambda_sparsity >= 0.0)) fail("lambda must be >= 0");
  if (neighbors < 1) fail("neighbors must be >= 1");
  if (!(shrinkage >= 0.0 && shrinkage <= 1.0)) fail("shrinkage must lie in [0, 1]");
  if (!(ball_eps > 0.0 && ball_eps <= 1e-3)) fail("ball_eps must lie in (0, 1e-3]");
  if (!std::isfinite(stub_gain)) fail("stub_gain must be finite");
}

const EmbeddingMatrix& Dataset::at(Modality m) const {
  auto it = embeddings.find(m);
  if (it == embeddings.end())
    throw DimensionError("dataset has no " + std::string(modality_name(m)) + " embeddings");
  return it->second;
}

std::string ValidationResult::summary() const {
  std::ostringstream os;
  for (const auto& issue : issues) os << issue.code << ": " << issue.message << '\n';
  return os.str();
}

ValidationResult validate_dataset(std::vector<SegmentRecord> segments,
                                  std::map<Modality, EmbeddingMatrix> embeddings) {
  ValidationResult result;
  auto add = [&](std::string code, std::string message) {
    result.issues.push_back({std::move(code), std::move(message)});
  };
  const std::size_t n = segments.size();

  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = segments[i];
    const std::string where = "segment " + std::to_string(i);
    if (s.index != i)
      add("bad_index", where + " carries index " + std::to_string(s.index));
    if (s.frame_start > s.frame_end)
      add("bad_frame_range", where + " has frame_start " + std::to_string(s.frame_start) +
                                 " > frame_end " + std::to_string(s.frame_end));
    const std::int64_t expected_start = i == 0 ? 0 : segments[i - 1].frame_end + 1;
    if (s.frame_start != expected_start)
      add("non_contiguous", where + " starts at frame " + std::to_string(s.frame_start) +
                                ", expected " + std::to_string(expected_start));
  }

  for (const auto& [modality, m] : embeddings) {
    const std::string name(modality_name(modality));
    if (m.modality() != modality)
      add("modality_mismatch", name + " slot holds a " + std::string(modality_name(m.modality())) +
                                   " matrix");
    if (m.count() != n)
      add("count_mismatch", name + " embeddings have " + std::to_string(m.count()) +
                                " rows for " + std::to_string(n) + " segments");
    if (auto bad = m.first_non_finite_row())
      add("non_finite", name + " embeddings: non-finite entry in row " + std::to_string(*bad));
  }

  if (n > 0) {
    for (Modality required : {Modality::kVisual, Modality::kText})
      if (!embeddings.count(required))
        add("missing_modality", std::string(modality_name(required)) + " embeddings are required");
  }
  auto dim_of = [&](Modality m) -> std::optional<std::size_t> {
    auto it = embeddings.find(m);
    if (it == embeddings.end()) return std::nullopt;
    return it->second.dim();
  };
  const auto vd = dim_of(Modality::kVisual), td = dim_of(Modality::kText),
             ad = dim_of(Modality::kAudio);
  if (vd && td && *vd != *td)
    add("dim_mismatch", "visual dim " + std::to_string(*vd) + " != text dim " + std::to_string(*td));
  if (ad && td && *ad != *td)
    add("dim_mismatch", "audio dim " + std::to_string(*ad) + " != text dim " + std::to_string(*td));

  if (result.issues.empty())
    result.dataset = Dataset{std::move(segments), std::move(embeddings)};
  return result;
}

}  // namespace mmvad
