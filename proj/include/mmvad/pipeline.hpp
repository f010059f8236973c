#pragma once
// End-to-end orchestration: clean -> fuse -> summarize -> optimize/score ->
// refine -> expand to frames -> evaluate.

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mmvad/captions.hpp"
#include "mmvad/config.hpp"
#include "mmvad/eval.hpp"
#include "mmvad/fusion.hpp"
#include "mmvad/prompt_opt.hpp"
#include "mmvad/refine.hpp"

namespace mmvad {

/// Input files failed validation; carries every issue found.
class ValidationFailure : public Error {
 public:
  explicit ValidationFailure(std::vector<ValidationIssue> issues);
  std::vector<ValidationIssue> issues;
};

/// A pipeline stage failed; what() starts with "stage <name>:".
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message);
  std::string stage;
};

struct LoadedInputs {
  Dataset dataset;
  std::optional<std::vector<int>> labels;
};

/// Parses every file the manifest references and validates the dataset.
/// Throws ConfigError for missing files, ValidationFailure for parse or
/// consistency problems (all issues collected).
LoadedInputs load_inputs(const RunManifest& manifest);

std::unique_ptr<prompt::ScorerBackend> make_scorer(const RunManifest& manifest, std::size_t summary_dim);

struct PipelineResult {
  captions::CleaningResult cleaning;
  captions::SummarySet summaries;
  fusion::FusedSequence fused;
  EmbeddingMatrix window_features;  // scorer input per window
  prompt::OptimizationResult optimization;
  std::vector<double> window_scores;   // a_t before refinement
  std::vector<double> refined_scores;  // a'_t (equal to a_t when refinement is off)
  std::optional<refine::RefineResult> refinement;
  std::string refinement_note;
  ScoreSeries series;
  std::optional<eval::EvalReport> report;
  double mu = 0.0;
  bool audio_used = false;
};

/// Runs all stages on an in-memory dataset. `scorer` overrides the backend
/// the manifest would build. Stage failures surface as StageError.
PipelineResult run_pipeline(const Dataset& dataset, const std::optional<std::vector<int>>& labels,
                            const RunManifest& manifest, const prompt::ScorerBackend* scorer = nullptr);

/// Report document written as report.json.
std::string report_json(const PipelineResult& result, const RunManifest& manifest);

struct OutputPaths {
  std::filesystem::path scores, loss_history, report;
};
OutputPaths output_paths(const std::filesystem::path& out_dir);

/// Writes scores.csv, loss_history.csv and report.json; on failure removes
/// whatever was written and rethrows.
void write_outputs(const PipelineResult& result, const RunManifest& manifest,
                   const std::filesystem::path& out_dir);

}  // namespace mmvad
