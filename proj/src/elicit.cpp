#include "sim/elicit.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <thread>

#include "sim/errors.hpp"
#include "json.hpp"

namespace sim {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const ElicitedResponse* ResponseMatrix::cell(
    const std::string& persona, const std::string& headline_id) const {
  auto it = cells.find({persona, headline_id});
  return it == cells.end() ? nullptr : &it->second;
}

bool ResponseMatrix::complete() const {
  if (cells.size() != personas.size() * headlines.size()) return false;
  for (const auto& persona : personas)
    for (const auto& headline : headlines)
      if (!cells.count({persona, headline})) return false;
  return true;
}

namespace {

std::vector<std::string> alnum_tokens(const std::string& raw,
                                      std::size_t limit) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : raw) {
    if (std::isalnum(c)) {
      current += static_cast<char>(std::tolower(c));
      continue;
    }
    if (!current.empty()) {
      tokens.push_back(current);
      current.clear();
      if (tokens.size() == limit) return tokens;
    }
  }
  if (!current.empty() && tokens.size() < limit) tokens.push_back(current);
  return tokens;
}

bool negation_token(const std::string& token) {
  return token == "no" || token == "fake" || token == "misinformation" ||
         token == "misinfo" || token == "false";
}

bool affirmation_token(const std::string& token) {
  return token == "yes" || token == "real" || token == "true" ||
         token == "believe";
}

}  // namespace

std::optional<BeliefLabel> parse_belief(const std::string& raw) {
  auto tokens = alnum_tokens(raw, 10);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == "not" && i + 1 < tokens.size() &&
        (tokens[i + 1] == "real" || tokens[i + 1] == "true"))
      return BeliefLabel::Misinfo;
    if (negation_token(tokens[i])) return BeliefLabel::Misinfo;
    if (affirmation_token(tokens[i])) return BeliefLabel::Real;
  }
  return std::nullopt;
}

std::optional<int> parse_share(const std::string& raw) {
  for (const auto& token : alnum_tokens(raw, std::string::npos)) {
    bool all_digits = std::all_of(token.begin(), token.end(), [](unsigned char c) {
      return std::isdigit(c);
    });
    if (!all_digits) continue;
    if (token.size() == 1 && token[0] >= '1' && token[0] <= '5')
      return token[0] - '0';
    return std::nullopt;  // 0, 6-9 or multi-digit: the answer is off-scale
  }
  return std::nullopt;
}

namespace {

// Serves one prompt through the cache: hit -> stored text, miss ->
// backend completion persisted before returning.
std::string serve(const std::string& prompt, Question question,
                  Backend& backend, const GenerationParams& params,
                  CompletionStore* store, RunStats* stats) {
  GenerationParams effective = effective_params(params, question);
  std::string key = cache_key(backend.id(), params.model, prompt,
                              params_digest(effective), question);
  if (store) {
    if (auto hit = store->get(key)) {
      if (stats) ++stats->cache_hits;
      return hit->raw_text;
    }
  }
  BackendResponse response = backend.complete({prompt, effective});
  if (stats) ++stats->backend_calls;
  if (store) store->put(key, response.text, response.attempt);
  return response.text;
}

template <typename Parse>
auto ask(const Persona& persona, const HeadlineRecord& headline,
         Question question, Backend& backend, const GenerationParams& params,
         CompletionStore* store, RunStats* stats, Parse parse,
         std::string& raw_out) {
  std::string prompt = render(persona, headline, question);
  raw_out = serve(prompt, question, backend, params, store, stats);
  auto parsed = parse(raw_out);
  if (!parsed) {
    std::string reask = render_reask(persona, headline, question);
    if (reask != prompt) {
      raw_out = serve(reask, question, backend, params, store, stats);
      parsed = parse(raw_out);
    }
  }
  return parsed;
}

}  // namespace

ElicitedResponse elicit_cell(const Persona& persona,
                             const HeadlineRecord& headline, Backend& backend,
                             const GenerationParams& params,
                             CompletionStore* store, RunStats* stats) {
  ElicitedResponse response;
  response.persona = persona.name;
  response.headline_id = headline.id;
  response.model = params.model;
  response.params_digest = params_digest(params);
  response.belief = ask(persona, headline, Question::Belief, backend, params,
                        store, stats, parse_belief, response.raw_belief);
  response.share = ask(persona, headline, Question::Share, backend, params,
                       store, stats, parse_share, response.raw_share);
  return response;
}

ResponseMatrix run_simulation(const PersonaRegistry& registry,
                              const Corpus& corpus, Backend& backend,
                              const GenerationParams& params,
                              CompletionStore* store, int parallelism,
                              const std::string& run_id, RunStats* stats) {
  if (registry.personas.empty() || corpus.records.empty())
    fail(ErrorKind::BadConfig, "run needs a nonempty registry and corpus");
  if (parallelism < 1)
    fail(ErrorKind::BadConfig, "parallelism must be >= 1");

  ResponseMatrix matrix;
  matrix.run_id = run_id;
  matrix.personas = registry.names();
  for (const auto& record : corpus.records)
    matrix.headlines.push_back(record.id);

  std::size_t n = registry.personas.size() * corpus.records.size();
  std::vector<std::optional<ElicitedResponse>> slots(n);
  std::vector<RunStats> worker_stats(
      static_cast<std::size_t>(std::min<std::size_t>(
          static_cast<std::size_t>(parallelism), n)));

  std::atomic<std::size_t> next{0};
  std::atomic<bool> aborted{false};
  std::mutex failure_mutex;
  std::string abort_reason;
  std::exception_ptr hard_failure;

  auto cell_inputs = [&](std::size_t index) {
    std::size_t per = corpus.records.size();
    const Persona& persona = registry.personas[index / per];
    const HeadlineRecord& headline = corpus.records[index % per];
    return std::pair<const Persona&, const HeadlineRecord&>(persona, headline);
  };

  auto worker = [&](RunStats& local) {
    while (!aborted.load()) {
      std::size_t index = next.fetch_add(1);
      if (index >= n) break;
      auto [persona, headline] = cell_inputs(index);
      try {
        std::size_t calls_before = local.backend_calls;
        slots[index] =
            elicit_cell(persona, headline, backend, params, store, &local);
        if (local.backend_calls == calls_before) ++local.cached_cells;
      } catch (const SimError& err) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (err.kind() == ErrorKind::BackendUnreachable ||
            err.kind() == ErrorKind::AuthFailed) {
          if (abort_reason.empty()) abort_reason = err.what();
        } else if (!hard_failure) {
          hard_failure = std::current_exception();
        }
        aborted.store(true);
        break;
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!hard_failure) hard_failure = std::current_exception();
        aborted.store(true);
        break;
      }
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(worker_stats.size());
  for (auto& local : worker_stats) threads.emplace_back(worker, std::ref(local));
  for (auto& thread : threads) thread.join();
  if (hard_failure) std::rethrow_exception(hard_failure);

  RunStats combined;
  for (const auto& local : worker_stats) {
    combined.cache_hits += local.cache_hits;
    combined.backend_calls += local.backend_calls;
    combined.cached_cells += local.cached_cells;
  }
  combined.abort_reason = abort_reason;

  // Canonical commit order: persona-major over slots, independent of
  // which worker finished when.
  for (std::size_t index = 0; index < n; ++index) {
    auto [persona, headline] = cell_inputs(index);
    if (!slots[index]) {
      combined.missing.emplace_back(persona.name, headline.id);
      continue;
    }
    ++combined.cells;
    if (!slots[index]->belief) ++combined.invalid_belief;
    if (!slots[index]->share) ++combined.invalid_share;
    if (!slots[index]->belief || !slots[index]->share)
      ++combined.invalid_cells;
    matrix.cells[{persona.name, headline.id}] = std::move(*slots[index]);
  }
  if (stats) *stats = std::move(combined);
  return matrix;
}

void write_responses(const ResponseMatrix& matrix,
                     const std::filesystem::path& path) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    fail(ErrorKind::IoFailure, "cannot write " + path.string());

  for (const auto& persona : matrix.personas) {
    for (const auto& headline : matrix.headlines) {
      const ElicitedResponse* cell = matrix.cell(persona, headline);
      if (!cell) continue;  // partial run: missing cells are simply absent
      ordered_json line;
      line["run_id"] = matrix.run_id;
      line["persona"] = cell->persona;
      line["headline_id"] = cell->headline_id;
      line["belief"] = cell->belief ? to_string(*cell->belief) : "invalid";
      line["share"] = cell->share ? json(*cell->share) : json(nullptr);
      line["raw_belief"] = cell->raw_belief;
      line["raw_share"] = cell->raw_share;
      line["model"] = cell->model;
      line["params_digest"] = cell->params_digest;
      out << line.dump() << '\n';
    }
  }
  if (!out)
    fail(ErrorKind::IoFailure, "short write to " + path.string());
}

ResponseMatrix load_responses(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(ErrorKind::IoFailure, "cannot open " + path.string());

  ResponseMatrix matrix;
  std::string raw_line;
  std::size_t line_no = 0;
  while (std::getline(in, raw_line)) {
    ++line_no;
    if (raw_line.empty()) continue;
    json line;
    try {
      line = json::parse(raw_line);
    } catch (const json::parse_error& err) {
      fail(ErrorKind::MalformedRecord,
           path.string() + " line " + std::to_string(line_no) + ": " +
               err.what());
    }
    ElicitedResponse cell;
    try {
      if (matrix.run_id.empty())
        matrix.run_id = line.at("run_id").get<std::string>();
      else if (line.at("run_id").get<std::string>() != matrix.run_id)
        fail(ErrorKind::MalformedRecord,
             path.string() + " line " + std::to_string(line_no) +
                 ": mixed run_ids");
      cell.persona = line.at("persona").get<std::string>();
      cell.headline_id = line.at("headline_id").get<std::string>();
      std::string belief = line.at("belief").get<std::string>();
      if (belief != "invalid") cell.belief = belief_label_from_string(belief);
      if (!line.at("share").is_null()) {
        int share = line.at("share").get<int>();
        if (share < 1 || share > 5)
          fail(ErrorKind::BadLikert,
               path.string() + " line " + std::to_string(line_no) +
                   ": share outside [1,5]");
        cell.share = share;
      }
      cell.raw_belief = line.at("raw_belief").get<std::string>();
      cell.raw_share = line.at("raw_share").get<std::string>();
      cell.model = line.at("model").get<std::string>();
      cell.params_digest = line.at("params_digest").get<std::string>();
    } catch (const json::exception& err) {
      fail(ErrorKind::MalformedRecord,
           path.string() + " line " + std::to_string(line_no) + ": " +
               err.what());
    }

    if (std::find(matrix.personas.begin(), matrix.personas.end(),
                  cell.persona) == matrix.personas.end())
      matrix.personas.push_back(cell.persona);
    if (std::find(matrix.headlines.begin(), matrix.headlines.end(),
                  cell.headline_id) == matrix.headlines.end())
      matrix.headlines.push_back(cell.headline_id);
    if (matrix.cells.count({cell.persona, cell.headline_id}))
      fail(ErrorKind::DuplicateId,
           path.string() + " line " + std::to_string(line_no) +
               ": duplicate cell (" + cell.persona + ", " + cell.headline_id +
               ")");
    matrix.cells[{cell.persona, cell.headline_id}] = std::move(cell);
  }
  if (matrix.cells.empty())
    fail(ErrorKind::MalformedRecord, path.string() + " holds no responses");
  return matrix;
}

}  // namespace sim
