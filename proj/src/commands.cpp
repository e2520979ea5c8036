#include "sim/commands.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <ostream>

#include "sim/digest.hpp"
#include "sim/errors.hpp"
#include "sim/metrics.hpp"
#include "sim/report.hpp"
#include "sim/store.hpp"
#include "json.hpp"

namespace sim {

using nlohmann::json;

// Reported human-annotator accuracy benchmark rendered on accuracy charts.
constexpr double kHumanAccuracyBaseline = 0.63;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::BackendUnreachable:
    case ErrorKind::AuthFailed:
      return kExitBackend;
    case ErrorKind::IncompleteRun:
      return kExitPartial;
    default:
      return kExitConfig;
  }
}

std::string derive_run_id(const RunConfig& config, const Corpus& corpus,
                          const PersonaRegistry& registry) {
  if (config.run_id) return *config.run_id;
  std::string digest =
      sha256_hex("runid/v1\n" + corpus.source_digest + "\n" +
                 registry.digest() + "\n" + params_digest(config.params));
  return digest.substr(0, 12);
}

namespace {

struct Inputs {
  Corpus corpus;
  PersonaRegistry registry;
};

Inputs load_inputs(const RunConfig& config) {
  Inputs inputs;
  auto corpus_path = config.resolve(config.corpus_path);
  if (!std::filesystem::exists(corpus_path))
    fail(ErrorKind::IoFailure,
         "corpus_path not found: " + corpus_path.string());
  inputs.corpus = load_normalized(
      corpus_path, config.lax_corpus ? LoadMode::Lax : LoadMode::Strict);
  if (config.persona_registry == "default")
    inputs.registry = default_registry();
  else
    inputs.registry = load_registry(config.resolve(config.persona_registry));
  return inputs;
}

std::unique_ptr<Backend> make_backend(const RunConfig& config,
                                      const Inputs& inputs) {
  if (config.backend.kind == BackendKind::Mock) {
    auto fixture_path = config.resolve(config.backend.fixture_path);
    if (!std::filesystem::exists(fixture_path))
      fail(ErrorKind::IoFailure,
           "fixture_path not found: " + fixture_path.string());
    return mock_from_fixture_file(fixture_path, inputs.registry,
                                  inputs.corpus);
  }
  HttpBackendConfig http;
  http.endpoint = config.backend.endpoint;
  http.timeout_seconds = config.backend.timeout_seconds;
  if (!config.backend.credential_env.empty()) {
    const char* value = std::getenv(config.backend.credential_env.c_str());
    if (!value || !*value)
      fail(ErrorKind::BadConfig,
           "credential env var " + config.backend.credential_env +
               " is unset or empty (AuthFailed)");
    http.credential = value;
  }
  return std::make_unique<HttpBackend>(std::move(http));
}

// One CLI process per run directory: created exclusively, removed on exit.
class RunLock {
 public:
  explicit RunLock(const std::filesystem::path& path) : path_(path) {
    std::filesystem::create_directories(path.parent_path());
    int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
      if (errno == EEXIST)
        fail(ErrorKind::LockHeld,
             "run lock held: " + path_.string() +
                 " (remove it if no other process owns this run)");
      fail(ErrorKind::IoFailure, "cannot create lock " + path_.string());
    }
    std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] ssize_t written = ::write(fd, pid.data(), pid.size());
    ::close(fd);
  }
  ~RunLock() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  std::filesystem::path path_;
};

std::filesystem::path run_dir(const RunConfig& config,
                              const std::string& run_id) {
  return config.resolve(config.output_dir) / "runs" / run_id;
}

std::filesystem::path metrics_dir(const RunConfig& config,
                                  const std::string& run_id) {
  return config.resolve(config.output_dir) / "metrics" / run_id;
}

std::filesystem::path report_dir(const RunConfig& config,
                                 const std::string& run_id) {
  return config.resolve(config.output_dir) / "report" / run_id;
}

std::string backend_label(const RunConfig& config) {
  if (config.backend.kind == BackendKind::Mock)
    return "mock (fixture " + config.backend.fixture_path.string() + ")";
  return "http (" + config.backend.endpoint + ")";
}

// Loads responses for a run and canonicalizes orders against the config's
// registry and corpus; any gap means the run is incomplete.
ResponseMatrix load_complete_matrix(const RunConfig& config,
                                    const std::string& run_id,
                                    const Inputs& inputs) {
  auto path = run_dir(config, run_id) / "responses.jsonl";
  if (!std::filesystem::exists(path))
    fail(ErrorKind::IncompleteRun,
         "no responses.jsonl for run " + run_id + " (expected " +
             path.string() + ")");
  ResponseMatrix matrix = load_responses(path);
  if (matrix.run_id != run_id)
    fail(ErrorKind::MalformedRecord,
         path.string() + " belongs to run " + matrix.run_id + ", not " +
             run_id);

  std::size_t missing = 0;
  for (const auto& persona : inputs.registry.personas)
    for (const auto& record : inputs.corpus.records)
      if (!matrix.cell(persona.name, record.id)) ++missing;
  if (missing > 0)
    fail(ErrorKind::IncompleteRun,
         "run " + run_id + " is missing " + std::to_string(missing) +
             " of " +
             std::to_string(inputs.registry.personas.size() *
                            inputs.corpus.records.size()) +
             " cells; rerun `sim run` to resume");
  if (matrix.cells.size() !=
      inputs.registry.personas.size() * inputs.corpus.records.size())
    fail(ErrorKind::MalformedRecord,
         path.string() + " holds cells outside the configured grid");

  matrix.personas = inputs.registry.names();
  matrix.headlines.clear();
  for (const auto& record : inputs.corpus.records)
    matrix.headlines.push_back(record.id);
  return matrix;
}

json parse_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoFailure, "cannot open " + path.string());
  try {
    json doc;
    in >> doc;
    return doc;
  } catch (const json::parse_error& err) {
    fail(ErrorKind::MalformedRecord, path.string() + ": " + err.what());
  }
}

AgreementMatrix load_agreement_file(const std::filesystem::path& path) {
  json doc = parse_json_file(path);
  AgreementMatrix am;
  try {
    am.annotators = doc.at("annotators").get<std::vector<std::string>>();
    for (const auto& row : doc.at("values")) {
      std::vector<std::optional<double>> values;
      for (const auto& value : row)
        values.push_back(value.is_null()
                             ? std::nullopt
                             : std::optional<double>(value.get<double>()));
      am.values.push_back(std::move(values));
    }
    am.denominators =
        doc.at("denominators").get<std::vector<std::vector<std::size_t>>>();
  } catch (const json::exception& err) {
    fail(ErrorKind::MalformedRecord, path.string() + ": " + err.what());
  }
  return am;
}

std::pair<AccuracyTable, AccuracyTable> load_accuracy_file(
    const std::filesystem::path& path) {
  json doc = parse_json_file(path);
  AccuracyTable vs_gold, vs_human;
  try {
    for (const auto& row : doc.at("personas")) {
      std::string persona = row.at("persona").get<std::string>();
      auto value = [&](const char* field) -> std::optional<double> {
        if (row.at(field).is_null()) return std::nullopt;
        return row.at(field).get<double>();
      };
      vs_gold.push_back({persona, value("accuracy_vs_gold"),
                         row.at("n_gold").get<std::size_t>()});
      vs_human.push_back({persona, value("accuracy_vs_human"),
                          row.at("n_human").get<std::size_t>()});
    }
  } catch (const json::exception& err) {
    fail(ErrorKind::MalformedRecord, path.string() + ": " + err.what());
  }
  return {std::move(vs_gold), std::move(vs_human)};
}

std::optional<LikertHistogram> histogram_from_json(const json& value) {
  if (value.is_null()) return std::nullopt;
  LikertHistogram histogram;
  auto counts = value.at("counts").get<std::vector<std::size_t>>();
  if (counts.size() != 5)
    fail(ErrorKind::MalformedRecord, "likert counts must have 5 bins");
  std::copy(counts.begin(), counts.end(), histogram.counts.begin());
  histogram.n = value.at("n").get<std::size_t>();
  return histogram;
}

std::vector<LikertCsvRow> load_likert_file(
    const std::filesystem::path& path) {
  json doc = parse_json_file(path);
  std::vector<LikertCsvRow> rows;
  try {
    for (const auto& [name, value] : doc.at("personas").items())
      rows.push_back({name, histogram_from_json(value)});
    rows.push_back({"human_pool", histogram_from_json(doc.at("human_pool"))});
  } catch (const json::exception& err) {
    fail(ErrorKind::MalformedRecord, path.string() + ": " + err.what());
  }
  return rows;
}

}  // namespace

int cmd_validate(const RunConfig& config, std::ostream& out,
                 Backend* injected) {
  try {
    Inputs inputs = load_inputs(config);
    std::unique_ptr<Backend> owned;
    Backend* backend = injected;
    if (!backend) {
      owned = make_backend(config, inputs);
      backend = owned.get();
    }
    backend->probe();
    out << "corpus: " << inputs.corpus.records.size()
        << " records; personas: " << inputs.registry.personas.size() << '\n';
    out << "backend: " << backend_label(config) << " ok\n";
    out << "run_id: " << derive_run_id(config, inputs.corpus, inputs.registry)
        << '\n';
    return kExitSuccess;
  } catch (const SimError& err) {
    out << "error: " << err.what() << '\n';
    return exit_code_for(err.kind());
  }
}

int cmd_run(const RunConfig& config, std::ostream& out, Backend* injected,
            RunStats* stats_out) {
  try {
    Inputs inputs = load_inputs(config);
    std::unique_ptr<Backend> owned;
    Backend* backend = injected;
    if (!backend) {
      owned = make_backend(config, inputs);
      backend = owned.get();
    }

    std::string run_id = derive_run_id(config, inputs.corpus, inputs.registry);
    auto dir = run_dir(config, run_id);
    std::filesystem::create_directories(dir);
    RunLock lock(dir / ".lock");

    auto cache_path = config.resolve(config.cache_dir) / "completions.log";
    CompletionStore store(cache_path, OpenMode::Recover);

    RunStats stats;
    ResponseMatrix matrix =
        run_simulation(inputs.registry, inputs.corpus, *backend, config.params,
                       &store, config.parallelism, run_id, &stats);
    write_responses(matrix, dir / "responses.jsonl");
    if (stats_out) *stats_out = stats;

    std::size_t total = inputs.registry.personas.size() *
                        inputs.corpus.records.size();
    out << "run " << run_id << ": " << stats.cells << "/" << total
        << " cells (" << stats.invalid_cells << " invalid), "
        << stats.cached_cells << " cells from cache, " << stats.backend_calls
        << " backend calls\n";

    if (!stats.missing.empty()) {
      out << "partial run; missing cells:\n";
      std::size_t shown = 0;
      for (const auto& [persona, headline] : stats.missing) {
        if (shown == 20) {
          out << "  ... and " << stats.missing.size() - shown << " more\n";
          break;
        }
        out << "  " << persona << ' ' << headline << '\n';
        ++shown;
      }
      if (!stats.abort_reason.empty())
        out << "abort: " << stats.abort_reason << '\n';
      return kExitPartial;
    }
    return kExitSuccess;
  } catch (const SimError& err) {
    out << "error: " << err.what() << '\n';
    return exit_code_for(err.kind());
  }
}

int cmd_metrics(const RunConfig& config, const std::string& run_id,
                std::ostream& out) {
  try {
    Inputs inputs = load_inputs(config);
    ResponseMatrix matrix = load_complete_matrix(config, run_id, inputs);
    MetricsOptions options;
    options.include_kappa = config.include_kappa;
    auto dir = metrics_dir(config, run_id);
    write_metrics_files(matrix, inputs.corpus, inputs.registry, options, dir);
    out << "metrics " << run_id << ": agreement.json accuracy.json "
        << "likert.json contrast.json written to " << dir.string() << '\n';
    return kExitSuccess;
  } catch (const SimError& err) {
    out << "error: " << err.what() << '\n';
    return exit_code_for(err.kind());
  }
}

int cmd_report(const RunConfig& config, const std::string& run_id,
               std::size_t top_k, std::ostream& out) {
  try {
    auto mdir = metrics_dir(config, run_id);
    for (const char* name :
         {"agreement.json", "accuracy.json", "likert.json", "contrast.json"}) {
      if (!std::filesystem::exists(mdir / name))
        fail(ErrorKind::MissingMetrics,
             "missing " + (mdir / name).string() +
                 "; run `sim metrics` first");
    }

    Inputs inputs = load_inputs(config);
    ResponseMatrix matrix = load_complete_matrix(config, run_id, inputs);
    AgreementMatrix am = load_agreement_file(mdir / "agreement.json");
    auto [vs_gold, vs_human] = load_accuracy_file(mdir / "accuracy.json");
    std::vector<LikertCsvRow> likert = load_likert_file(mdir / "likert.json");

    auto dir = report_dir(config, run_id);
    std::filesystem::create_directories(dir);

    emit_heatmap_svg(am, dir / "heatmap.svg");

    {
      std::vector<std::string> bins;
      BarSeries gold_series{"vs_gold", {}};
      BarSeries human_series{"vs_human", {}};
      for (std::size_t i = 0; i < vs_gold.size(); ++i) {
        bins.push_back(vs_gold[i].persona);
        gold_series.values.push_back(
            vs_gold[i].accuracy ? *vs_gold[i].accuracy
                                : std::numeric_limits<double>::quiet_NaN());
        human_series.values.push_back(
            vs_human[i].accuracy ? *vs_human[i].accuracy
                                 : std::numeric_limits<double>::quiet_NaN());
      }
      emit_bars_svg({gold_series, human_series}, bins, BarMode::Accuracy,
                    kHumanAccuracyBaseline, dir / "accuracy_bars.svg");
    }

    {
      BarSeries agents{"agents", std::vector<double>(5, 0.0)};
      std::optional<BarSeries> humans;
      for (const auto& row : likert) {
        if (!row.histogram) continue;
        if (row.name == "human_pool") {
          humans = BarSeries{"humans", {}};
          for (std::size_t i = 0; i < 5; ++i)
            humans->values.push_back(
                static_cast<double>(row.histogram->counts[i]));
        } else {
          for (std::size_t i = 0; i < 5; ++i)
            agents.values[i] +=
                static_cast<double>(row.histogram->counts[i]);
        }
      }
      std::vector<BarSeries> series = {agents};
      if (humans) series.push_back(*humans);
      emit_bars_svg(series, {"1", "2", "3", "4", "5"}, BarMode::Histogram,
                    std::nullopt, dir / "likert_bars.svg");
    }

    auto exemplars = disagreement_exemplars(matrix, inputs.corpus, top_k);
    emit_tables_csv(am, vs_gold, vs_human, likert, exemplars, dir);

    out << "report " << run_id << ": heatmap.svg accuracy_bars.svg "
        << "likert_bars.svg and 4 csv tables written to " << dir.string()
        << '\n';
    return kExitSuccess;
  } catch (const SimError& err) {
    out << "error: " << err.what() << '\n';
    return exit_code_for(err.kind());
  }
}

}  // namespace sim
