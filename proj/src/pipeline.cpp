#include "mmvad/pipeline.hpp"

#include <fstream>

#include <json.hpp>

#include "mmvad/io.hpp"
#include "mmvad/remote_scorer.hpp"

namespace mmvad {

ValidationFailure::ValidationFailure(std::vector<ValidationIssue> issues_in)
    : Error([&] {
        std::string msg = "validation failed:";
        for (const auto& i : issues_in) msg += "\n  " + i.code + ": " + i.message;
        return msg;
      }()),
      issues(std::move(issues_in)) {}

StageError::StageError(std::string stage_in, const std::string& message)
    : Error("stage " + stage_in + ": " + message), stage(std::move(stage_in)) {}

LoadedInputs load_inputs(const RunManifest& manifest) {
  manifest.validate();
  std::vector<ValidationIssue> issues;
  std::map<Modality, EmbeddingMatrix> embeddings;
  auto load = [&](Modality slot, const std::filesystem::path& p) {
    try {
      embeddings[slot] = io::read_embeddings(p);
    } catch (const Error& e) {
      issues.push_back({"bad_file", e.what()});
    }
  };
  load(Modality::kVisual, manifest.visual);
  load(Modality::kText, manifest.text);
  if (manifest.audio && manifest.stages.use_audio) load(Modality::kAudio, *manifest.audio);

  std::vector<SegmentRecord> segments;
  try {
    segments = io::read_captions(manifest.captions);
  } catch (const Error& e) {
    issues.push_back({"bad_file", e.what()});
  }
  std::optional<std::vector<int>> labels;
  if (manifest.labels) {
    try {
      labels = io::read_labels(*manifest.labels);
    } catch (const Error& e) {
      issues.push_back({"bad_file", e.what()});
    }
  }
  if (!issues.empty()) throw ValidationFailure(std::move(issues));

  auto result = validate_dataset(std::move(segments), std::move(embeddings));
  if (!result.ok()) throw ValidationFailure(std::move(result.issues));
  if (labels && static_cast<std::int64_t>(labels->size()) != result.dataset->frame_count())
    throw ValidationFailure({{"label_mismatch", std::to_string(labels->size()) + " labels for " +
                                                    std::to_string(result.dataset->frame_count()) + " frames"}});
  return {std::move(*result.dataset), std::move(labels)};
}

std::unique_ptr<prompt::ScorerBackend> make_scorer(const RunManifest& manifest, std::size_t summary_dim) {
  const PipelineConfig& c = manifest.config;
  if (manifest.scorer.kind == "remote") {
    prompt::RemoteScorerOptions o;
    o.endpoint = manifest.scorer.endpoint;
    o.prompt_dim = c.prompt_dim;
    o.timeout = std::chrono::milliseconds(manifest.scorer.timeout_ms);
    o.retries = manifest.scorer.retries;
    o.fd_step = manifest.scorer.fd_step;
    o.max_in_flight = manifest.scorer.max_in_flight;
    return std::make_unique<prompt::RemoteScorer>(std::move(o));
  }
  return std::make_unique<prompt::StubScorer>(
      prompt::StubScorer::from_seed(c.seed, c.prompt_dim, summary_dim, c.stub_gain));
}

namespace {

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace

PipelineResult run_pipeline(const Dataset& dataset, const std::optional<std::vector<int>>& labels,
                            const RunManifest& manifest, const prompt::ScorerBackend* scorer) {
  const PipelineConfig& config = manifest.config;
  const Stages& stages = manifest.stages;
  stage("config", [&] { config.validate(); });
  const std::size_t n = dataset.size();
  PipelineResult r;
  r.audio_used = stages.use_audio && dataset.has(Modality::kAudio);

  // Caption cleaning.
  std::vector<std::string> raw;
  raw.reserve(n);
  for (const auto& s : dataset.segments) raw.push_back(s.visual_caption);
  std::vector<std::size_t> caption_index(n);
  for (std::size_t t = 0; t < n; ++t) caption_index[t] = t;
  if (stages.clean && n > 0) {
    r.cleaning = stage("clean", [&] {
      return captions::clean_captions(dataset.at(Modality::kVisual), dataset.at(Modality::kText));
    });
    caption_index = r.cleaning.cleaned_index;
  } else {
    r.cleaning.cleaned_index = caption_index;
  }

  // Summaries and fusion.
  std::vector<std::optional<std::string>> audio_captions;
  if (r.audio_used)
    for (const auto& s : dataset.segments) audio_captions.push_back(s.audio_caption);
  r.summaries = stage("summarize", [&] {
    auto set = captions::build_summaries(captions::CaptionSet::from_indices(raw, caption_index), audio_captions,
                                         config.window);
    if (n > 0) set.embeddings = captions::window_means(set, dataset.at(Modality::kText), caption_index);
    return set;
  });
  const auto fusion_options = fusion::FusionOptions::from(config, stages.fusion, r.audio_used);
  r.fused = stage("fuse", [&] { return fusion::fuse_sequence(dataset, caption_index, fusion_options); });

  if (n == 0) {
    r.optimization.state.q.assign(config.prompt_dim, 0.0);
    r.refinement_note = "skipped: no segments";
    r.series.labels = labels;
    if (labels) r.report = eval::evaluate({}, *labels);
    return r;
  }
  r.window_features = stage("fuse", [&] { return fusion::window_features(r.fused, r.summaries, fusion_options); });

  // Scoring with test-time prompt adaptation.
  std::unique_ptr<prompt::ScorerBackend> owned;
  if (!scorer) {
    owned = stage("score", [&] { return make_scorer(manifest, r.window_features.dim()); });
    scorer = owned.get();
  }
  const std::size_t windows = r.summaries.size();
  std::vector<prompt::SummaryInput> inputs(windows);
  for (std::size_t k = 0; k < windows; ++k)
    inputs[k] = {r.summaries.texts[k], r.window_features.row(k), std::nullopt};
  r.mu = config.mu_target.value_or(0.1 * static_cast<double>(windows));
  prompt::OptimizerOptions opt;
  opt.eta = config.eta;
  opt.iterations = stages.optimize ? config.iterations : 0;
  opt.mu = r.mu;
  opt.lambda = config.lambda_sparsity;
  r.optimization = stage("optimize", [&] {
    return prompt::optimize_prompt(std::vector<double>(scorer->prompt_dim(), 0.0), inputs, *scorer, opt);
  });
  r.window_scores = r.optimization.scores;

  // Refinement.
  r.refined_scores = r.window_scores;
  if (stages.refine) {
    if (n < 2) {
      r.refinement_note = "skipped: fewer than 2 visual rows";
    } else {
      r.refinement = stage("refine", [&] {
        const auto stats = refine::fit_visual_stats(dataset.at(Modality::kVisual), config.shrinkage);
        return refine::refine_scores(r.window_scores, r.summaries.embeddings, stats,
                                     std::min(config.neighbors, windows));
      });
      r.refined_scores = r.refinement->scores;
    }
  }

  // Frame expansion and evaluation.
  r.series.segment_scores.resize(n);
  for (std::size_t t = 0; t < n; ++t) r.series.segment_scores[t] = r.refined_scores[r.summaries.segment_to_window[t]];
  r.series.frame_scores = stage("expand", [&] {
    return eval::expand_to_frames(r.refined_scores, r.summaries.segment_to_window, dataset.segments);
  });
  r.series.labels = labels;
  if (labels) r.report = stage("evaluate", [&] { return eval::evaluate(r.series.frame_scores, *labels); });
  return r;
}

std::string report_json(const PipelineResult& r, const RunManifest& manifest) {
  using nlohmann::ordered_json;
  const PipelineConfig& c = manifest.config;
  ordered_json doc;
  doc["format"] = "mmvad-report";
  doc["version"] = 1;

  ordered_json components;
  components["visual_captions"] = true;
  components["audio_captions"] = r.audio_used;
  components["caption_cleaning"] = manifest.stages.clean;
  components["fusion"] = std::string(geometry_name(manifest.stages.fusion));
  components["mahalanobis_refinement"] = manifest.stages.refine;
  components["prompt_optimization"] = manifest.stages.optimize;
  doc["components"] = components;

  ordered_json cfg;
  cfg["curvature"] = c.curvature;
  cfg["fusion_weight_visual"] = c.fusion_weight_visual;
  cfg["fusion_weight_audio"] = c.fusion_weight_audio;
  cfg["tangent_scale"] = c.tangent_scale;
  cfg["karcher_tol"] = c.karcher_tol;
  cfg["karcher_max_iter"] = c.karcher_max_iter;
  cfg["window"] = c.window;
  cfg["prompt_dim"] = c.prompt_dim;
  cfg["eta"] = c.eta;
  cfg["iterations"] = c.iterations;
  cfg["mu_target"] = c.mu_target ? ordered_json(*c.mu_target) : ordered_json("auto");
  cfg["mu_effective"] = r.mu;
  cfg["lambda"] = c.lambda_sparsity;
  cfg["neighbors"] = c.neighbors;
  cfg["shrinkage"] = c.shrinkage;
  cfg["ball_eps"] = c.ball_eps;
  cfg["stub_gain"] = c.stub_gain;
  cfg["seed"] = c.seed;
  doc["config"] = cfg;

  ordered_json scorer;
  scorer["name"] = r.optimization.scorer.name;
  scorer["deterministic"] = r.optimization.scorer.deterministic;
  scorer["gradient"] = r.optimization.scorer.gradient;
  doc["scorer"] = scorer;

  const std::size_t n = r.fused.size();
  std::size_t audio_segments = 0;
  for (auto mask : r.fused.modality_mask) audio_segments += (mask & fusion::kMaskAudio) ? 1 : 0;
  ordered_json data;
  data["segments"] = n;
  data["frames"] = r.series.frame_scores.size();
  data["windows"] = r.summaries.size();
  data["audio_segments"] = audio_segments;
  doc["dataset"] = data;

  std::size_t changed = 0;
  for (std::size_t t = 0; t < r.cleaning.cleaned_index.size(); ++t) changed += r.cleaning.cleaned_index[t] != t;
  ordered_json cleaning;
  cleaning["replaced_captions"] = changed;
  cleaning["zero_norm_visual_rows"] = r.cleaning.zero_norm_frame_rows;
  cleaning["zero_norm_caption_rows"] = r.cleaning.zero_norm_caption_rows;
  doc["cleaning"] = cleaning;

  doc["fusion"] = ordered_json{{"unconverged_segments", r.fused.unconverged}};

  const auto& hist = r.optimization.state.loss_history;
  ordered_json optimization;
  optimization["iterations"] = r.optimization.state.iteration;
  if (!hist.empty()) {
    std::size_t descending = 0;
    for (std::size_t i = 1; i < hist.size(); ++i) descending += hist[i] <= hist[i - 1];
    optimization["initial_loss"] = hist.front();
    optimization["final_loss"] = hist.back();
    optimization["non_increasing_steps"] = descending;
  }
  doc["optimization"] = optimization;

  ordered_json refinement;
  refinement["applied"] = r.refinement.has_value();
  if (r.refinement) {
    refinement["neighbors"] = r.refinement->neighbors.empty() ? 0 : r.refinement->neighbors.front().size();
    refinement["fallback_rows"] = r.refinement->fallback_rows;
  }
  if (!r.refinement_note.empty()) refinement["note"] = r.refinement_note;
  doc["refinement"] = refinement;

  ordered_json metrics;
  if (r.report) {
    metrics["frame_count"] = r.report->frame_count;
    metrics["positive_count"] = r.report->positive_count;
    metrics["auc_roc"] = r.report->auc_roc ? ordered_json(*r.report->auc_roc) : ordered_json("undefined");
    metrics["average_precision"] =
        r.report->average_precision ? ordered_json(*r.report->average_precision) : ordered_json("undefined");
    if (!r.report->undefined_reason.empty()) metrics["undefined_reason"] = r.report->undefined_reason;
  } else {
    metrics["auc_roc"] = "undefined";
    metrics["average_precision"] = "undefined";
    metrics["undefined_reason"] = "no labels";
  }
  doc["metrics"] = metrics;
  return doc.dump(2) + "\n";
}

OutputPaths output_paths(const std::filesystem::path& out_dir) {
  return {out_dir / "scores.csv", out_dir / "loss_history.csv", out_dir / "report.json"};
}

void write_outputs(const PipelineResult& result, const RunManifest& manifest, const std::filesystem::path& out_dir) {
  const auto paths = output_paths(out_dir);
  std::vector<std::filesystem::path> written;
  try {
    std::filesystem::create_directories(out_dir);
    const std::string report = report_json(result, manifest);
    written.push_back(paths.scores);
    io::write_scores(paths.scores, result.series.frame_scores);
    written.push_back(paths.loss_history);
    io::write_loss_history(paths.loss_history, result.optimization.state.loss_history);
    written.push_back(paths.report);
    std::ofstream out(paths.report, std::ios::trunc);
    out << report;
    out.flush();
    if (!out) throw Error("write failed for " + paths.report.string());
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) std::filesystem::remove(p, ec);
    throw;
  }
}

}  // namespace mmvad
