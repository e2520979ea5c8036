#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "sim/corpus.hpp"
#include "sim/personas.hpp"

namespace sim {

/// Which question(s) the logit_bias map is sent with. Part of the
/// versioned params serialization, so changing it changes cache keys.
enum class LogitBiasScope { Belief, Share, Both };

std::string to_string(LogitBiasScope scope);
LogitBiasScope logit_bias_scope_from_string(const std::string& text);

struct GenerationParams {
  std::string model;
  double temperature = 0.0;
  int max_tokens = 16;
  std::map<std::string, double> logit_bias;  // token-id string -> bias
  LogitBiasScope logit_bias_scope = LogitBiasScope::Both;
  std::optional<std::int64_t> seed;
};

/// SHA-256 over the versioned canonical serialization of params.
std::string params_digest(const GenerationParams& params);

/// Params as actually sent for one question: logit_bias stripped when the
/// scope excludes that question. This is what reaches the wire and the
/// cache key.
GenerationParams effective_params(const GenerationParams& params,
                                  Question question);

struct BackendRequest {
  std::string prompt;
  GenerationParams params;
};

struct BackendResponse {
  std::string text;
  std::int64_t latency_ms = 0;
  int attempt = 1;
  std::string backend_id;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual BackendResponse complete(const BackendRequest& request) = 0;
  /// Cheap reachability/auth check; throws on failure.
  virtual void probe() = 0;
  virtual std::string id() const = 0;
};

/// Deterministic offline backend answering from a prompt -> text map.
/// Thread-safe; counts completions so tests can assert replay behavior.
class MockBackend : public Backend {
 public:
  /// Direct prompt-keyed script. Strict mode throws UnknownKey on a miss;
  /// otherwise misses return default_text.
  MockBackend(std::map<std::string, std::string> script, bool strict,
              std::string default_text = "");

  BackendResponse complete(const BackendRequest& request) override;
  void probe() override {}
  std::string id() const override { return "mock"; }

  std::int64_t calls() const { return calls_.load(); }
  void reset_calls() { calls_.store(0); }

 private:
  std::map<std::string, std::string> script_;
  bool strict_;
  std::string default_text_;
  std::atomic<std::int64_t> calls_{0};
};

/// Builds a mock from fixture cells keyed (persona, headline_id,
/// question). Prompts are pre-rendered for every registry/corpus pair in
/// both plain and re-ask form, so the mock can be driven through the same
/// code path as a live backend.
std::unique_ptr<MockBackend> mock_from_fixture(
    const std::map<std::tuple<std::string, std::string, Question>,
                   std::string>& fixture,
    const PersonaRegistry& registry, const Corpus& corpus, bool strict,
    std::string default_text = "");

/// Loads a fixture file: {"default_text"?: string, "cells": {persona:
/// {headline_id: {"belief": text, "share": text}}}}. Absent default_text
/// means strict mode.
std::unique_ptr<MockBackend> mock_from_fixture_file(
    const std::filesystem::path& path, const PersonaRegistry& registry,
    const Corpus& corpus);

struct HttpBackendConfig {
  std::string endpoint;    // e.g. http://localhost:8080/v1
  std::string credential;  // empty = no Authorization header
  int timeout_seconds = 60;
  int max_retries = 3;          // retries after the first attempt
  int backoff_base_ms = 1000;   // 1s/2s/4s at the default
};

/// OpenAI-compatible chat-completions client. Retries timeouts, 429 and
/// 5xx with exponential backoff; 401/403 fail immediately.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config);
  ~HttpBackend() override;

  BackendResponse complete(const BackendRequest& request) override;
  void probe() override;
  std::string id() const override;

  /// The exact JSON body sent for a request; exposed for wire tests.
  static std::string wire_body(const BackendRequest& request);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sim
