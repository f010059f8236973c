#pragma once
// Run manifest: input paths, pipeline parameters, stage toggles and scorer
// settings, read from a flat UTF-8 key=value file. Lines starting with '#'
// and blank lines are ignored; unknown keys are errors.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "mmvad/core.hpp"
#include "mmvad/fusion.hpp"

namespace mmvad {

/// Malformed manifest, unknown key or missing input file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct Stages {
  bool clean = true;
  fusion::Geometry fusion = fusion::Geometry::kHyperbolic;
  bool optimize = true;
  bool refine = true;
  bool use_audio = true;
};

struct ScorerSettings {
  std::string kind = "stub";  // "stub" or "remote"
  std::string endpoint;
  int timeout_ms = 5000;
  int retries = 0;
  double fd_step = 1e-4;
  std::size_t max_in_flight = 4;
};

struct RunManifest {
  std::filesystem::path visual;
  std::filesystem::path text;
  std::optional<std::filesystem::path> audio;
  std::filesystem::path captions;
  std::optional<std::filesystem::path> labels;
  PipelineConfig config;
  Stages stages;
  ScorerSettings scorer;

  /// Throws ConfigError when a referenced file is missing or a setting is
  /// invalid.
  void validate() const;
};

/// Parses key=value text. Relative paths resolve against `base_dir`.
RunManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir);
RunManifest load_manifest(const std::filesystem::path& path);

/// Inverse of parse_manifest for the settings (paths written as given).
std::string format_manifest(const RunManifest& manifest);

std::string_view geometry_name(fusion::Geometry g);

}  // namespace mmvad
