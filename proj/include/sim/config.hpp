#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "sim/backend.hpp"

namespace sim {

enum class BackendKind { Http, Mock };

struct BackendConfig {
  BackendKind kind = BackendKind::Mock;
  std::string endpoint;                // http: base URL, e.g. .../v1
  std::string credential_env;          // http: env var holding the bearer token
  std::filesystem::path fixture_path;  // mock: fixture JSON
  int timeout_seconds = 60;
};

/// One experiment, fully pinned in one reviewable document. Relative
/// paths resolve against the config file's directory.
struct RunConfig {
  std::filesystem::path corpus_path;
  std::string persona_registry = "default";  // "default" or a file path
  BackendConfig backend;
  GenerationParams params;
  int parallelism = 4;
  std::filesystem::path cache_dir = "cache";
  std::filesystem::path output_dir = "out";
  std::optional<std::string> run_id;  // else derived from content digests
  bool include_kappa = false;
  bool lax_corpus = false;

  std::filesystem::path config_dir;

  std::filesystem::path resolve(const std::filesystem::path& path) const {
    return path.is_absolute() ? path : config_dir / path;
  }
};

/// Parses and structurally validates a config file. Throws BadConfig with
/// the offending field named.
RunConfig load_config(const std::filesystem::path& path);

}  // namespace sim
