#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sim/backend.hpp"
#include "sim/corpus.hpp"
#include "sim/personas.hpp"
#include "sim/store.hpp"

namespace sim {

/// One (persona, headline) cell. nullopt belief/share mean Invalid; the
/// raw completion text is always retained for audit.
struct ElicitedResponse {
  std::string persona;
  std::string headline_id;
  std::optional<BeliefLabel> belief;
  std::optional<int> share;  // in [1,5] when present
  std::string raw_belief;
  std::string raw_share;
  std::string model;
  std::string params_digest;
};

struct ResponseMatrix {
  std::string run_id;
  std::vector<std::string> personas;   // registry order
  std::vector<std::string> headlines;  // corpus order
  std::map<std::pair<std::string, std::string>, ElicitedResponse> cells;

  const ElicitedResponse* cell(const std::string& persona,
                               const std::string& headline_id) const;
  bool complete() const;  // cells cover the full cross product
};

/// Case-insensitive scan of the first 10 alphanumeric tokens. The bigram
/// "not real"/"not true" wins as Misinfo before unigram matching; within
/// each position negation tokens {no, fake, misinformation, misinfo,
/// false} are checked before affirmation {yes, real, true, believe}.
/// Total: unmatched text yields nullopt (Invalid), never an error.
std::optional<BeliefLabel> parse_belief(const std::string& raw);

/// First all-digit token decides: a single character '1'..'5' is the
/// rating; 0, 6-9 or multi-digit is Invalid; no digit token is Invalid.
std::optional<int> parse_share(const std::string& raw);

struct RunStats {
  std::size_t cells = 0;
  std::size_t invalid_cells = 0;  // belief or share unparseable
  std::size_t invalid_belief = 0;
  std::size_t invalid_share = 0;
  std::size_t cached_cells = 0;   // cells needing no backend call
  std::size_t cache_hits = 0;     // completion-level
  std::size_t backend_calls = 0;  // completion-level
  std::vector<std::pair<std::string, std::string>> missing;
  std::string abort_reason;  // nonempty when the run ended early
};

/// Runs the two-question protocol for one cell: belief then share, two
/// independent completions. Completions are served from the store when
/// present, otherwise fetched and persisted. An Invalid parse triggers one
/// re-ask with the answer-format suffix appended (skipped when that yields
/// the identical prompt).
ElicitedResponse elicit_cell(const Persona& persona,
                             const HeadlineRecord& headline, Backend& backend,
                             const GenerationParams& params,
                             CompletionStore* store, RunStats* stats = nullptr);

/// Full cross-product run with at most `parallelism` cells in flight.
/// Commit order is canonical (persona-major, corpus order) regardless of
/// completion arrival. On BackendUnreachable/AuthFailed the run aborts
/// early: completed cells stay persisted, stats lists the missing cells
/// and the abort reason. Other errors propagate.
ResponseMatrix run_simulation(const PersonaRegistry& registry,
                              const Corpus& corpus, Backend& backend,
                              const GenerationParams& params,
                              CompletionStore* store, int parallelism,
                              const std::string& run_id,
                              RunStats* stats = nullptr);

/// responses.jsonl: one line per cell in canonical order, fields run_id,
/// persona, headline_id, belief, share, raw_belief, raw_share, model,
/// params_digest. Byte-deterministic for a fixed matrix.
void write_responses(const ResponseMatrix& matrix,
                     const std::filesystem::path& path);
ResponseMatrix load_responses(const std::filesystem::path& path);

}  // namespace sim
