#include "sim/backend.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

#include "sim/digest.hpp"
#include "sim/errors.hpp"
#include "httplib.h"
#include "json.hpp"

namespace sim {

using nlohmann::json;

std::string to_string(LogitBiasScope scope) {
  switch (scope) {
    case LogitBiasScope::Belief: return "belief";
    case LogitBiasScope::Share: return "share";
    default: return "both";
  }
}

LogitBiasScope logit_bias_scope_from_string(const std::string& text) {
  if (text == "belief") return LogitBiasScope::Belief;
  if (text == "share") return LogitBiasScope::Share;
  if (text == "both") return LogitBiasScope::Both;
  fail(ErrorKind::BadConfig,
       "logit_bias_scope \"" + text + "\" not in {belief, share, both}");
}

std::string params_digest(const GenerationParams& params) {
  for (const auto& [token, bias] : params.logit_bias) {
    (void)token;
    if (!std::isfinite(bias))
      fail(ErrorKind::BadConfig, "logit_bias values must be finite");
  }
  // std::map iterates in sorted key order, so the dump is canonical.
  json doc = json::object();
  doc["model"] = params.model;
  doc["temperature"] = params.temperature;
  doc["max_tokens"] = params.max_tokens;
  doc["logit_bias"] = params.logit_bias;
  doc["logit_bias_scope"] = to_string(params.logit_bias_scope);
  doc["seed"] = params.seed ? json(*params.seed) : json(nullptr);
  return sha256_hex("params/v1\n" + doc.dump());
}

GenerationParams effective_params(const GenerationParams& params,
                                  Question question) {
  GenerationParams out = params;
  bool keep = params.logit_bias_scope == LogitBiasScope::Both ||
              (params.logit_bias_scope == LogitBiasScope::Belief &&
               question == Question::Belief) ||
              (params.logit_bias_scope == LogitBiasScope::Share &&
               question == Question::Share);
  if (!keep) out.logit_bias.clear();
  return out;
}

MockBackend::MockBackend(std::map<std::string, std::string> script,
                         bool strict, std::string default_text)
    : script_(std::move(script)),
      strict_(strict),
      default_text_(std::move(default_text)) {}

BackendResponse MockBackend::complete(const BackendRequest& request) {
  if (request.prompt.empty())
    fail(ErrorKind::BadConfig, "backend request with empty prompt");
  calls_.fetch_add(1);
  BackendResponse response;
  response.backend_id = id();
  auto it = script_.find(request.prompt);
  if (it != script_.end()) {
    response.text = it->second;
    return response;
  }
  if (strict_)
    fail(ErrorKind::UnknownKey,
         "mock fixture has no entry for prompt: " + request.prompt);
  response.text = default_text_;
  return response;
}

std::unique_ptr<MockBackend> mock_from_fixture(
    const std::map<std::tuple<std::string, std::string, Question>,
                   std::string>& fixture,
    const PersonaRegistry& registry, const Corpus& corpus, bool strict,
    std::string default_text) {
  std::map<std::string, std::string> script;
  for (const auto& [key, text] : fixture) {
    const auto& [persona_name, headline_id, question] = key;
    const Persona* persona = registry.find(persona_name);
    if (!persona)
      fail(ErrorKind::UnknownKey,
           "fixture names unknown persona \"" + persona_name + "\"");
    const HeadlineRecord* headline = corpus.find(headline_id);
    if (!headline)
      fail(ErrorKind::UnknownKey,
           "fixture names unknown headline \"" + headline_id + "\"");
    // Both the plain and the re-ask prompt resolve to the fixture text, so
    // a fixture cell answers identically no matter which variant is asked.
    script[render(*persona, *headline, question)] = text;
    script[render_reask(*persona, *headline, question)] = text;
  }
  return std::make_unique<MockBackend>(std::move(script), strict,
                                       std::move(default_text));
}

std::unique_ptr<MockBackend> mock_from_fixture_file(
    const std::filesystem::path& path, const PersonaRegistry& registry,
    const Corpus& corpus) {
  std::ifstream in(path);
  if (!in)
    fail(ErrorKind::IoFailure, "cannot open fixture file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& err) {
    fail(ErrorKind::MalformedRecord,
         "fixture file " + path.string() + ": " + err.what());
  }
  if (!doc.is_object() || !doc.contains("cells") || !doc["cells"].is_object())
    fail(ErrorKind::MalformedRecord,
         "fixture file must be an object with a \"cells\" map");

  std::map<std::tuple<std::string, std::string, Question>, std::string>
      fixture;
  for (const auto& [persona_name, per_headline] : doc["cells"].items()) {
    if (!per_headline.is_object())
      fail(ErrorKind::MalformedRecord,
           "fixture cells for \"" + persona_name + "\" must be an object");
    for (const auto& [headline_id, answers] : per_headline.items()) {
      if (!answers.is_object())
        fail(ErrorKind::MalformedRecord,
             "fixture answers for (" + persona_name + ", " + headline_id +
                 ") must be an object");
      for (const auto& [question_name, text] : answers.items()) {
        Question question;
        if (question_name == "belief")
          question = Question::Belief;
        else if (question_name == "share")
          question = Question::Share;
        else
          fail(ErrorKind::MalformedRecord,
               "fixture question \"" + question_name +
                   "\" not in {belief, share}");
        if (!text.is_string())
          fail(ErrorKind::MalformedRecord, "fixture texts must be strings");
        fixture[{persona_name, headline_id, question}] =
            text.get<std::string>();
      }
    }
  }

  bool strict = !doc.contains("default_text");
  std::string default_text =
      strict ? std::string() : doc["default_text"].get<std::string>();
  return mock_from_fixture(fixture, registry, corpus, strict, default_text);
}

namespace {

struct ParsedEndpoint {
  std::string base;  // scheme://host[:port]
  std::string path;  // prefix, no trailing slash
};

ParsedEndpoint parse_endpoint(const std::string& endpoint) {
  auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos)
    fail(ErrorKind::BadConfig,
         "endpoint \"" + endpoint + "\" lacks a scheme (http:// or https://)");
  auto path_start = endpoint.find('/', scheme_end + 3);
  ParsedEndpoint parsed;
  if (path_start == std::string::npos) {
    parsed.base = endpoint;
  } else {
    parsed.base = endpoint.substr(0, path_start);
    parsed.path = endpoint.substr(path_start);
    while (!parsed.path.empty() && parsed.path.back() == '/')
      parsed.path.pop_back();
  }
  return parsed;
}

bool transient_status(int status) {
  return status == 429 || (status >= 500 && status < 600);
}

}  // namespace

struct HttpBackend::Impl {
  HttpBackendConfig config;
  ParsedEndpoint endpoint;
  httplib::Client client;

  explicit Impl(HttpBackendConfig cfg)
      : config(std::move(cfg)),
        endpoint(parse_endpoint(config.endpoint)),
        client(endpoint.base) {
    client.set_connection_timeout(config.timeout_seconds, 0);
    client.set_read_timeout(config.timeout_seconds, 0);
    client.set_write_timeout(config.timeout_seconds, 0);
  }

  httplib::Headers headers() const {
    httplib::Headers h;
    if (!config.credential.empty())
      h.emplace("Authorization", "Bearer " + config.credential);
    return h;
  }
};

HttpBackend::HttpBackend(HttpBackendConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::id() const {
  return "http:" + impl_->config.endpoint;
}

std::string HttpBackend::wire_body(const BackendRequest& request) {
  json body = json::object();
  body["model"] = request.params.model;
  body["messages"] = json::array(
      {json{{"role", "user"}, {"content", request.prompt}}});
  body["temperature"] = request.params.temperature;
  body["max_tokens"] = request.params.max_tokens;
  if (!request.params.logit_bias.empty())
    body["logit_bias"] = request.params.logit_bias;
  if (request.params.seed) body["seed"] = *request.params.seed;
  return body.dump();
}

BackendResponse HttpBackend::complete(const BackendRequest& request) {
  if (request.prompt.empty())
    fail(ErrorKind::BadConfig, "backend request with empty prompt");

  std::string body = wire_body(request);
  std::string path = impl_->endpoint.path + "/chat/completions";
  auto start = std::chrono::steady_clock::now();

  int attempts = impl_->config.max_retries + 1;
  std::string last_failure;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    if (attempt > 1) {
      auto wait = std::chrono::milliseconds(
          impl_->config.backoff_base_ms * (1LL << (attempt - 2)));
      std::this_thread::sleep_for(wait);
    }

    auto result =
        impl_->client.Post(path, impl_->headers(), body, "application/json");
    if (!result) {
      last_failure = "transport error: " + httplib::to_string(result.error());
      continue;
    }
    if (result->status == 401 || result->status == 403)
      fail(ErrorKind::AuthFailed,
           "endpoint rejected credentials (HTTP " +
               std::to_string(result->status) + ")");
    if (transient_status(result->status)) {
      last_failure = "HTTP " + std::to_string(result->status);
      continue;
    }
    if (result->status != 200)
      fail(ErrorKind::MalformedReply,
           "unexpected HTTP " + std::to_string(result->status) + ": " +
               result->body);

    json reply;
    try {
      reply = json::parse(result->body);
    } catch (const json::parse_error&) {
      fail(ErrorKind::MalformedReply, "response body is not JSON");
    }
    if (!reply.contains("choices") || !reply["choices"].is_array() ||
        reply["choices"].empty() ||
        !reply["choices"][0].contains("message") ||
        !reply["choices"][0]["message"].contains("content") ||
        !reply["choices"][0]["message"]["content"].is_string())
      fail(ErrorKind::MalformedReply,
           "response lacks choices[0].message.content");

    BackendResponse response;
    response.text =
        reply["choices"][0]["message"]["content"].get<std::string>();
    response.attempt = attempt;
    response.backend_id = id();
    response.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - start)
                              .count();
    return response;
  }
  fail(ErrorKind::BackendUnreachable,
       "retries exhausted against " + impl_->config.endpoint + " (" +
           last_failure + ")");
}

void HttpBackend::probe() {
  auto result =
      impl_->client.Get(impl_->endpoint.path + "/models", impl_->headers());
  if (!result)
    fail(ErrorKind::BackendUnreachable,
         "cannot reach " + impl_->config.endpoint + ": " +
             httplib::to_string(result.error()));
  if (result->status == 401 || result->status == 403)
    fail(ErrorKind::AuthFailed,
         "endpoint rejected credentials (HTTP " +
             std::to_string(result->status) + ")");
  if (result->status != 200)
    fail(ErrorKind::BackendUnreachable,
         "probe returned HTTP " + std::to_string(result->status));
}

}  // namespace sim
