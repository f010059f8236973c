// mmvad: command-line front end.
//
//   mmvad validate --config FILE
//   mmvad run      --config FILE --out DIR [--seed N] [--no-clean] [--no-optimize]
//                  [--no-refine] [--no-audio] [--fusion hyperbolic|euclidean]
//                  [--scorer stub|remote] [--endpoint URL]
//   mmvad eval     --scores FILE --labels FILE
//   mmvad synth    --out DIR [--segments N] [--dim D] [--anomaly-fraction F]
//                  [--shift S] [--seed N] [--frames-per-segment N] [--no-audio]
//
// Exit codes: 0 success, 1 validation error, 2 runtime error, 3 undefined metrics.

#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mmvad/config.hpp"
#include "mmvad/eval.hpp"
#include "mmvad/io.hpp"
#include "mmvad/kernels.hpp"
#include "mmvad/pipeline.hpp"
#include "mmvad/synth.hpp"

namespace {

enum Exit : int { kOk = 0, kValidation = 1, kRuntime = 2, kUndefined = 3 };

void print_metrics(const mmvad::eval::EvalReport& r) {
  auto show = [](const std::optional<double>& v) { return v ? mmvad::io::format_double(*v) : std::string("undefined"); };
  std::cout << "frames=" << r.frame_count << " positives=" << r.positive_count << " auc_roc=" << show(r.auc_roc)
            << " average_precision=" << show(r.average_precision) << '\n';
  if (!r.undefined_reason.empty()) std::cout << "metrics undefined: " << r.undefined_reason << '\n';
}

struct RunFlags {
  std::string config, out, fusion, scorer, endpoint;
  std::optional<std::uint64_t> seed;
  bool no_clean = false, no_optimize = false, no_refine = false, no_audio = false;
};

mmvad::RunManifest manifest_from(const RunFlags& f) {
  auto m = mmvad::load_manifest(f.config);
  if (f.seed) m.config.seed = *f.seed;
  if (f.no_clean) m.stages.clean = false;
  if (f.no_optimize) m.stages.optimize = false;
  if (f.no_refine) m.stages.refine = false;
  if (f.no_audio) m.stages.use_audio = false;
  if (f.fusion == "euclidean") m.stages.fusion = mmvad::fusion::Geometry::kEuclidean;
  if (f.fusion == "hyperbolic") m.stages.fusion = mmvad::fusion::Geometry::kHyperbolic;
  if (!f.scorer.empty()) m.scorer.kind = f.scorer;
  if (!f.endpoint.empty()) m.scorer.endpoint = f.endpoint;
  return m;
}

int cmd_validate(const RunFlags& f) {
  const auto m = manifest_from(f);
  const auto inputs = mmvad::load_inputs(m);
  std::cout << "ok: " << inputs.dataset.size() << " segments, " << inputs.dataset.frame_count() << " frames";
  for (const auto& [modality, mat] : inputs.dataset.embeddings)
    std::cout << ", " << mmvad::modality_name(modality) << " dim " << mat.dim();
  std::cout << '\n';
  return kOk;
}

int cmd_run(const RunFlags& f) {
  const auto m = manifest_from(f);
  const auto inputs = mmvad::load_inputs(m);
  const auto result = mmvad::run_pipeline(inputs.dataset, inputs.labels, m);
  mmvad::write_outputs(result, m, f.out);
  std::cout << "wrote " << f.out << " (" << result.series.frame_scores.size() << " frames, kernels "
            << mmvad::kernels::backend_name(mmvad::kernels::active_backend()) << ")\n";
  if (result.report) {
    print_metrics(*result.report);
    if (!result.report->defined()) return kUndefined;
  }
  return kOk;
}

int cmd_eval(const std::string& scores_path, const std::string& labels_path) {
  std::vector<double> scores;
  std::vector<int> labels;
  try {
    scores = mmvad::io::read_scores(scores_path);
    labels = mmvad::io::read_labels(labels_path);
  } catch (const mmvad::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  }
  if (scores.size() != labels.size()) {
    std::cerr << "error: " << scores.size() << " scores vs " << labels.size() << " labels\n";
    return kValidation;
  }
  const auto report = mmvad::eval::evaluate(scores, labels);
  print_metrics(report);
  return report.defined() ? kOk : kUndefined;
}

int cmd_synth(const mmvad::synth::SynthOptions& o, const std::string& out) {
  const auto data = mmvad::synth::generate(o);
  mmvad::synth::write_dataset(data, o, out);
  std::cout << "wrote " << out << ": " << o.segments << " segments, oracle auc "
            << (data.oracle_auc ? mmvad::io::format_double(*data.oracle_auc) : std::string("undefined")) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Training-free video anomaly scoring over precomputed embeddings"};
  app.require_subcommand(1);

  RunFlags flags;
  auto* validate = app.add_subcommand("validate", "Parse and validate every input a config references");
  validate->add_option("--config", flags.config, "Run manifest (key=value)")->required();

  auto* run = app.add_subcommand("run", "Run the full pipeline and write scores, loss history and report");
  run->add_option("--config", flags.config, "Run manifest (key=value)")->required();
  run->add_option("--out", flags.out, "Output directory")->required();
  run->add_option("--seed", flags.seed, "Override the manifest seed");
  run->add_flag("--no-clean", flags.no_clean, "Disable caption cleaning");
  run->add_flag("--no-optimize", flags.no_optimize, "Score with the initial prompt");
  run->add_flag("--no-refine", flags.no_refine, "Disable Mahalanobis refinement");
  run->add_flag("--no-audio", flags.no_audio, "Ignore audio inputs");
  run->add_option("--fusion", flags.fusion, "Fusion geometry")->check(CLI::IsMember({"hyperbolic", "euclidean"}));
  run->add_option("--scorer", flags.scorer, "Scorer backend")->check(CLI::IsMember({"stub", "remote"}));
  run->add_option("--endpoint", flags.endpoint, "Remote scorer base URL");

  std::string scores_path, labels_path;
  auto* evalc = app.add_subcommand("eval", "Evaluate a scores CSV against a labels CSV");
  evalc->add_option("--scores", scores_path, "frame,score CSV")->required();
  evalc->add_option("--labels", labels_path, "frame,label CSV")->required();

  mmvad::synth::SynthOptions synth_opts;
  std::string synth_out;
  bool synth_no_audio = false;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--segments", synth_opts.segments, "Number of segments");
  synth->add_option("--dim", synth_opts.dim, "Embedding dimension");
  synth->add_option("--anomaly-fraction", synth_opts.anomaly_fraction, "Fraction of anomalous segments");
  synth->add_option("--shift", synth_opts.shift, "Anomaly shift along the seeded direction");
  synth->add_option("--seed", synth_opts.seed, "Seed");
  synth->add_option("--frames-per-segment", synth_opts.frames_per_segment, "Frames per segment");
  synth->add_flag("--no-audio", synth_no_audio, "Omit audio embeddings and captions");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(flags);
    if (run->parsed()) return cmd_run(flags);
    if (evalc->parsed()) return cmd_eval(scores_path, labels_path);
    if (synth->parsed()) {
      synth_opts.audio = !synth_no_audio;
      return cmd_synth(synth_opts, synth_out);
    }
  } catch (const mmvad::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const mmvad::ValidationFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const mmvad::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kRuntime;
}
