#include "mmvad/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "mmvad/io.hpp"

namespace mmvad {
namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

template <typename T>
T parse_value(std::string_view key, std::string_view text) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError("config: cannot parse value '" + std::string(text) + "' for key '" + std::string(key) + "'");
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "on") return true;
  if (text == "false" || text == "0" || text == "off") return false;
  throw ConfigError("config: key '" + std::string(key) + "' expects true/false, got '" + std::string(text) + "'");
}

}  // namespace

std::string_view geometry_name(fusion::Geometry g) {
  return g == fusion::Geometry::kHyperbolic ? "hyperbolic" : "euclidean";
}

RunManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir) {
  RunManifest m;
  auto path = [&](std::string_view v) {
    std::filesystem::path p{std::string(v)};
    return p.is_absolute() ? p : base_dir / p;
  };
  using Setter = std::function<void(std::string_view, std::string_view)>;
  PipelineConfig& c = m.config;
  const std::map<std::string, Setter, std::less<>> setters = {
      {"visual", [&](auto, auto v) { m.visual = path(v); }},
      {"text", [&](auto, auto v) { m.text = path(v); }},
      {"audio", [&](auto, auto v) { m.audio = path(v); }},
      {"captions", [&](auto, auto v) { m.captions = path(v); }},
      {"labels", [&](auto, auto v) { m.labels = path(v); }},
      {"curvature", [&](auto k, auto v) { c.curvature = parse_value<double>(k, v); }},
      {"fusion_weight_visual", [&](auto k, auto v) { c.fusion_weight_visual = parse_value<double>(k, v); }},
      {"fusion_weight_audio", [&](auto k, auto v) { c.fusion_weight_audio = parse_value<double>(k, v); }},
      {"tangent_scale", [&](auto k, auto v) { c.tangent_scale = parse_value<double>(k, v); }},
      {"karcher_tol", [&](auto k, auto v) { c.karcher_tol = parse_value<double>(k, v); }},
      {"karcher_max_iter", [&](auto k, auto v) { c.karcher_max_iter = parse_value<int>(k, v); }},
      {"window", [&](auto k, auto v) { c.window = parse_value<std::size_t>(k, v); }},
      {"prompt_dim", [&](auto k, auto v) { c.prompt_dim = parse_value<std::size_t>(k, v); }},
      {"eta", [&](auto k, auto v) { c.eta = parse_value<double>(k, v); }},
      {"iterations", [&](auto k, auto v) { c.iterations = parse_value<int>(k, v); }},
      {"mu_target",
       [&](auto k, auto v) {
         if (v == "auto") c.mu_target.reset();
         else c.mu_target = parse_value<double>(k, v);
       }},
      {"lambda", [&](auto k, auto v) { c.lambda_sparsity = parse_value<double>(k, v); }},
      {"neighbors", [&](auto k, auto v) { c.neighbors = parse_value<std::size_t>(k, v); }},
      {"shrinkage", [&](auto k, auto v) { c.shrinkage = parse_value<double>(k, v); }},
      {"ball_eps", [&](auto k, auto v) { c.ball_eps = parse_value<double>(k, v); }},
      {"stub_gain", [&](auto k, auto v) { c.stub_gain = parse_value<double>(k, v); }},
      {"seed", [&](auto k, auto v) { c.seed = parse_value<std::uint64_t>(k, v); }},
      {"clean", [&](auto k, auto v) { m.stages.clean = parse_bool(k, v); }},
      {"optimize", [&](auto k, auto v) { m.stages.optimize = parse_bool(k, v); }},
      {"refine", [&](auto k, auto v) { m.stages.refine = parse_bool(k, v); }},
      {"use_audio", [&](auto k, auto v) { m.stages.use_audio = parse_bool(k, v); }},
      {"fusion",
       [&](auto, auto v) {
         if (v == "hyperbolic") m.stages.fusion = fusion::Geometry::kHyperbolic;
         else if (v == "euclidean") m.stages.fusion = fusion::Geometry::kEuclidean;
         else throw ConfigError("config: fusion must be hyperbolic or euclidean, got '" + std::string(v) + "'");
       }},
      {"scorer",
       [&](auto, auto v) {
         if (v != "stub" && v != "remote")
           throw ConfigError("config: scorer must be stub or remote, got '" + std::string(v) + "'");
         m.scorer.kind = std::string(v);
       }},
      {"endpoint", [&](auto, auto v) { m.scorer.endpoint = std::string(v); }},
      {"timeout_ms", [&](auto k, auto v) { m.scorer.timeout_ms = parse_value<int>(k, v); }},
      {"retries", [&](auto k, auto v) { m.scorer.retries = parse_value<int>(k, v); }},
      {"fd_step", [&](auto k, auto v) { m.scorer.fd_step = parse_value<double>(k, v); }},
      {"max_in_flight", [&](auto k, auto v) { m.scorer.max_in_flight = parse_value<std::size_t>(k, v); }},
  };

  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::map<std::string, std::size_t> seen;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key(trim(t.substr(0, eq)));
    const auto value = trim(t.substr(eq + 1));
    auto it = setters.find(key);
    if (it == setters.end())
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (auto [pos, fresh] = seen.emplace(key, lineno); !fresh)
      throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "' (first on line " +
                        std::to_string(pos->second) + ")");
    it->second(key, value);
  }
  return m;
}

RunManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_manifest(text.str(), path.parent_path());
}

void RunManifest::validate() const {
  try {
    config.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  auto require = [](const std::filesystem::path& p, const char* key) {
    if (p.empty()) throw ConfigError(std::string("config: missing required key '") + key + "'");
    if (!std::filesystem::is_regular_file(p))
      throw ConfigError(std::string("config: ") + key + " file not found: " + p.string());
  };
  require(visual, "visual");
  require(text, "text");
  require(captions, "captions");
  if (audio) require(*audio, "audio");
  if (labels) require(*labels, "labels");
  if (scorer.kind == "remote" && scorer.endpoint.empty())
    throw ConfigError("config: scorer=remote requires an endpoint");
  if (scorer.timeout_ms <= 0) throw ConfigError("config: timeout_ms must be > 0");
  if (scorer.retries < 0) throw ConfigError("config: retries must be >= 0");
  if (!(scorer.fd_step > 0.0)) throw ConfigError("config: fd_step must be > 0");
}

std::string format_manifest(const RunManifest& m) {
  const PipelineConfig& c = m.config;
  std::ostringstream os;
  auto kv = [&](const char* k, const std::string& v) { os << k << " = " << v << '\n'; };
  auto num = [](double v) { return io::format_double(v); };
  if (!m.visual.empty()) kv("visual", m.visual.string());
  if (!m.text.empty()) kv("text", m.text.string());
  if (m.audio) kv("audio", m.audio->string());
  if (!m.captions.empty()) kv("captions", m.captions.string());
  if (m.labels) kv("labels", m.labels->string());
  kv("curvature", num(c.curvature));
  kv("fusion_weight_visual", num(c.fusion_weight_visual));
  kv("fusion_weight_audio", num(c.fusion_weight_audio));
  kv("tangent_scale", num(c.tangent_scale));
  kv("karcher_tol", num(c.karcher_tol));
  kv("karcher_max_iter", std::to_string(c.karcher_max_iter));
  kv("window", std::to_string(c.window));
  kv("prompt_dim", std::to_string(c.prompt_dim));
  kv("eta", num(c.eta));
  kv("iterations", std::to_string(c.iterations));
  kv("mu_target", c.mu_target ? num(*c.mu_target) : "auto");
  kv("lambda", num(c.lambda_sparsity));
  kv("neighbors", std::to_string(c.neighbors));
  kv("shrinkage", num(c.shrinkage));
  kv("ball_eps", num(c.ball_eps));
  kv("stub_gain", num(c.stub_gain));
  kv("seed", std::to_string(c.seed));
  kv("clean", m.stages.clean ? "true" : "false");
  kv("fusion", std::string(geometry_name(m.stages.fusion)));
  kv("optimize", m.stages.optimize ? "true" : "false");
  kv("refine", m.stages.refine ? "true" : "false");
  kv("use_audio", m.stages.use_audio ? "true" : "false");
  kv("scorer", m.scorer.kind);
  if (!m.scorer.endpoint.empty()) kv("endpoint", m.scorer.endpoint);
  kv("timeout_ms", std::to_string(m.scorer.timeout_ms));
  kv("retries", std::to_string(m.scorer.retries));
  kv("fd_step", num(m.scorer.fd_step));
  kv("max_in_flight", std::to_string(m.scorer.max_in_flight));
  return os.str();
}

}  // namespace mmvad
