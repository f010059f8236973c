#include "mmvad/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "mmvad/eval.hpp"
#include "mmvad/io.hpp"
#include "mmvad/rng.hpp"

namespace mmvad::synth {

void SynthOptions::validate() const {
  if (!(anomaly_fraction > 0.0 && anomaly_fraction < 1.0))
    throw DomainError("synth: anomaly_fraction must lie in (0, 1)");
  if (!(shift >= 0.0) || !std::isfinite(shift)) throw DomainError("synth: shift must be >= 0");
  if (dim == 0) throw DomainError("synth: dim must be >= 1");
  if (frames_per_segment == 0) throw DomainError("synth: frames_per_segment must be >= 1");
  if (max_event_length == 0) throw DomainError("synth: max_event_length must be >= 1");
  if (!(swapped_caption_fraction >= 0.0 && swapped_caption_fraction < 1.0))
    throw DomainError("synth: swapped_caption_fraction must lie in [0, 1)");
}

namespace {

// Anomalous segment flags: ceil(n_anom / max_len) events of near-equal
// length separated by random gaps.
std::vector<int> place_events(std::size_t n, std::size_t n_anom, std::size_t max_len, std::mt19937_64& rng) {
  std::vector<int> flags(n, 0);
  if (n_anom == 0) return flags;
  const std::size_t events = (n_anom + max_len - 1) / max_len;
  std::vector<std::size_t> lengths(events, n_anom / events);
  for (std::size_t e = 0; e < n_anom % events; ++e) ++lengths[e];
  // Distribute the normal segments over events + 1 gaps, interior gaps >= 1
  // when there is room.
  const std::size_t normal = n - n_anom;
  const std::size_t interior = events - 1;
  const std::size_t reserved = std::min(interior, normal);
  std::vector<std::size_t> gaps(events + 1, 0);
  for (std::size_t g = 1; g <= reserved; ++g) gaps[g] = 1;
  std::uniform_int_distribution<std::size_t> pick(0, events);
  for (std::size_t i = reserved; i < normal; ++i) ++gaps[pick(rng)];
  std::size_t pos = 0;
  for (std::size_t e = 0; e < events; ++e) {
    pos += gaps[e];
    for (std::size_t k = 0; k < lengths[e]; ++k) flags[pos++] = 1;
  }
  return flags;
}

}  // namespace

SyntheticDataset generate(const SynthOptions& o) {
  o.validate();
  const std::size_t n = o.segments, d = o.dim;
  auto layout_rng = make_rng(o.seed, Stream::kSynthLayout);
  auto latent_rng = make_rng(o.seed, Stream::kSynthLatent);
  auto noise_rng = make_rng(o.seed, Stream::kSynthNoise);

  const std::size_t n_anom = n == 0 ? 0 : std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(o.anomaly_fraction * double(n))), 1, n - (n > 1 ? 1 : 0));
  SyntheticDataset out;
  out.segment_labels = place_events(n, n_anom, o.max_event_length, layout_rng);
  const std::vector<double> direction = seeded_direction(o.seed, d);

  std::vector<double> visual(n * d), text(n * d), audio(n * d);
  std::normal_distribution<double> unit(0.0, 1.0);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t i = 0; i < d; ++i) {
      double x = unit(latent_rng);
      if (out.segment_labels[t]) x += o.shift * direction[i];
      visual[t * d + i] = x;
      text[t * d + i] = x + o.caption_noise * unit(noise_rng);
      audio[t * d + i] = x + o.audio_noise * unit(noise_rng);
    }
  }

  // Swap a fraction of captions (text rows and strings) for another segment's.
  std::vector<std::size_t> caption_source(n);
  for (std::size_t t = 0; t < n; ++t) caption_source[t] = t;
  if (n > 1) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> other(0, n - 2);
    for (std::size_t t = 0; t < n; ++t) {
      if (coin(layout_rng) >= o.swapped_caption_fraction) continue;
      std::size_t j = other(layout_rng);
      if (j >= t) ++j;
      caption_source[t] = j;
    }
  }
  std::vector<double> swapped(n * d);
  for (std::size_t t = 0; t < n; ++t)
    std::copy_n(text.begin() + caption_source[t] * d, d, swapped.begin() + t * d);

  for (std::size_t t = 0; t < n; ++t) {
    SegmentRecord s;
    s.index = t;
    s.frame_start = static_cast<std::int64_t>(t * o.frames_per_segment);
    s.frame_end = s.frame_start + static_cast<std::int64_t>(o.frames_per_segment) - 1;
    const std::size_t src = caption_source[t];
    s.visual_caption = out.segment_labels[src] ? "a person is involved in a violent incident (segment " + std::to_string(src) + ")"
                                               : "people walk calmly through the scene (segment " + std::to_string(src) + ")";
    if (o.audio) s.audio_caption = out.segment_labels[t] ? "shouting and loud impacts" : "quiet ambient noise";
    out.segments.push_back(std::move(s));
  }
  out.visual = EmbeddingMatrix(Modality::kVisual, d, std::move(visual));
  out.text = EmbeddingMatrix(Modality::kText, d, std::move(swapped));
  if (o.audio) out.audio = EmbeddingMatrix(Modality::kAudio, d, std::move(audio));

  out.frame_labels.reserve(n * o.frames_per_segment);
  std::vector<double> oracle_frames;
  oracle_frames.reserve(n * o.frames_per_segment);
  for (std::size_t t = 0; t < n; ++t) {
    double q = 0.0;
    for (double x : out.visual.row(t)) q += x * x;
    for (std::size_t f = 0; f < o.frames_per_segment; ++f) {
      out.frame_labels.push_back(out.segment_labels[t]);
      oracle_frames.push_back(std::sqrt(q));
    }
  }
  const auto report = eval::evaluate(oracle_frames, out.frame_labels);
  out.oracle_auc = report.auc_roc;
  return out;
}

void write_dataset(const SyntheticDataset& data, const SynthOptions& o, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  io::write_embeddings(dir / "visual.mmve", data.visual);
  io::write_embeddings(dir / "text.mmve", data.text);
  if (data.audio) io::write_embeddings(dir / "audio.mmve", *data.audio);
  io::write_captions(dir / "captions.jsonl", data.segments);
  io::write_labels(dir / "labels.csv", data.frame_labels);

  std::ofstream cfg(dir / "manifest.cfg", std::ios::trunc);
  cfg << "# synthetic dataset: segments=" << o.segments << " dim=" << o.dim
      << " anomaly_fraction=" << io::format_double(o.anomaly_fraction) << " shift=" << io::format_double(o.shift) << '\n';
  cfg << "visual = visual.mmve\ntext = text.mmve\n";
  if (data.audio) cfg << "audio = audio.mmve\n";
  cfg << "captions = captions.jsonl\nlabels = labels.csv\n";
  cfg << "seed = " << o.seed << '\n';
  if (!cfg) throw Error("cannot write " + (dir / "manifest.cfg").string());

  nlohmann::ordered_json oracle;
  oracle["segments"] = o.segments;
  oracle["dim"] = o.dim;
  oracle["anomaly_fraction"] = o.anomaly_fraction;
  oracle["shift"] = o.shift;
  oracle["seed"] = o.seed;
  oracle["anomalous_segments"] = std::count(data.segment_labels.begin(), data.segment_labels.end(), 1);
  oracle["mahalanobis_oracle_auc"] =
      data.oracle_auc ? nlohmann::ordered_json(*data.oracle_auc) : nlohmann::ordered_json("undefined");
  std::ofstream oj(dir / "oracle.json", std::ios::trunc);
  oj << oracle.dump(2) << '\n';
  if (!oj) throw Error("cannot write " + (dir / "oracle.json").string());
}

}  // namespace mmvad::synth
