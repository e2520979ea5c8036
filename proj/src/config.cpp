#include "sim/config.hpp"

#include <fstream>

#include "sim/errors.hpp"
#include "json.hpp"

namespace sim {

using nlohmann::json;

namespace {

const json& require(const json& doc, const char* field) {
  if (!doc.contains(field))
    fail(ErrorKind::BadConfig,
         std::string("config missing required field \"") + field + "\"");
  return doc[field];
}

std::string require_string(const json& doc, const char* field) {
  const json& value = require(doc, field);
  if (!value.is_string() || value.get<std::string>().empty())
    fail(ErrorKind::BadConfig,
         std::string("config field \"") + field +
             "\" must be a non-empty string");
  return value.get<std::string>();
}

GenerationParams parse_params(const json& doc) {
  GenerationParams params;
  params.model = require_string(doc, "model");
  if (doc.contains("temperature")) {
    if (!doc["temperature"].is_number())
      fail(ErrorKind::BadConfig, "params.temperature must be a number");
    params.temperature = doc["temperature"].get<double>();
    if (params.temperature < 0)
      fail(ErrorKind::BadConfig, "params.temperature must be >= 0");
  }
  if (doc.contains("max_tokens")) {
    if (!doc["max_tokens"].is_number_integer() ||
        doc["max_tokens"].get<int>() < 1)
      fail(ErrorKind::BadConfig, "params.max_tokens must be an integer >= 1");
    params.max_tokens = doc["max_tokens"].get<int>();
  }
  if (doc.contains("logit_bias")) {
    if (!doc["logit_bias"].is_object())
      fail(ErrorKind::BadConfig,
           "params.logit_bias must map token ids to numbers");
    for (const auto& [token, bias] : doc["logit_bias"].items()) {
      if (!bias.is_number())
        fail(ErrorKind::BadConfig,
             "params.logit_bias[\"" + token + "\"] must be a number");
      params.logit_bias[token] = bias.get<double>();
    }
  }
  if (doc.contains("logit_bias_scope")) {
    if (!doc["logit_bias_scope"].is_string())
      fail(ErrorKind::BadConfig, "params.logit_bias_scope must be a string");
    params.logit_bias_scope = logit_bias_scope_from_string(
        doc["logit_bias_scope"].get<std::string>());
  }
  if (doc.contains("seed") && !doc["seed"].is_null()) {
    if (!doc["seed"].is_number_integer())
      fail(ErrorKind::BadConfig, "params.seed must be an integer");
    params.seed = doc["seed"].get<std::int64_t>();
  }
  return params;
}

BackendConfig parse_backend(const json& doc) {
  BackendConfig backend;
  std::string kind = require_string(doc, "kind");
  if (kind == "http")
    backend.kind = BackendKind::Http;
  else if (kind == "mock")
    backend.kind = BackendKind::Mock;
  else
    fail(ErrorKind::BadConfig,
         "backend.kind \"" + kind + "\" not in {http, mock}");

  if (backend.kind == BackendKind::Http) {
    backend.endpoint = require_string(doc, "endpoint");
    if (doc.contains("credential_env") && !doc["credential_env"].is_null()) {
      if (!doc["credential_env"].is_string())
        fail(ErrorKind::BadConfig, "backend.credential_env must be a string");
      backend.credential_env = doc["credential_env"].get<std::string>();
    }
    if (doc.contains("timeout_seconds")) {
      if (!doc["timeout_seconds"].is_number_integer() ||
          doc["timeout_seconds"].get<int>() < 1)
        fail(ErrorKind::BadConfig,
             "backend.timeout_seconds must be an integer >= 1");
      backend.timeout_seconds = doc["timeout_seconds"].get<int>();
    }
  } else {
    backend.fixture_path = require_string(doc, "fixture_path");
  }
  return backend;
}

}  // namespace

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    fail(ErrorKind::BadConfig, "cannot open config file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& err) {
    fail(ErrorKind::BadConfig,
         "config file " + path.string() + ": " + err.what());
  }
  if (!doc.is_object())
    fail(ErrorKind::BadConfig, "config file must hold a JSON object");

  RunConfig config;
  config.config_dir = std::filesystem::absolute(path).parent_path();
  config.corpus_path = require_string(doc, "corpus_path");
  if (doc.contains("persona_registry"))
    config.persona_registry = require_string(doc, "persona_registry");

  const json& backend = require(doc, "backend");
  if (!backend.is_object())
    fail(ErrorKind::BadConfig, "config field \"backend\" must be an object");
  config.backend = parse_backend(backend);

  const json& params = require(doc, "params");
  if (!params.is_object())
    fail(ErrorKind::BadConfig, "config field \"params\" must be an object");
  config.params = parse_params(params);

  if (doc.contains("parallelism")) {
    if (!doc["parallelism"].is_number_integer() ||
        doc["parallelism"].get<int>() < 1)
      fail(ErrorKind::BadConfig, "parallelism must be an integer >= 1");
    config.parallelism = doc["parallelism"].get<int>();
  }
  if (doc.contains("cache_dir"))
    config.cache_dir = require_string(doc, "cache_dir");
  if (doc.contains("output_dir"))
    config.output_dir = require_string(doc, "output_dir");
  if (doc.contains("run_id") && !doc["run_id"].is_null())
    config.run_id = require_string(doc, "run_id");
  if (doc.contains("include_kappa")) {
    if (!doc["include_kappa"].is_boolean())
      fail(ErrorKind::BadConfig, "include_kappa must be a boolean");
    config.include_kappa = doc["include_kappa"].get<bool>();
  }
  if (doc.contains("lax_corpus")) {
    if (!doc["lax_corpus"].is_boolean())
      fail(ErrorKind::BadConfig, "lax_corpus must be a boolean");
    config.lax_corpus = doc["lax_corpus"].get<bool>();
  }
  return config;
}

}  // namespace sim
