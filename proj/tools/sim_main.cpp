#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "sim/commands.hpp"
#include "sim/config.hpp"
#include "sim/errors.hpp"

namespace {

sim::RunConfig load_or_exit(const std::string& path) {
  try {
    return sim::load_config(path);
  } catch (const sim::SimError& err) {
    std::cout << "error: " << err.what() << std::endl;
    std::exit(sim::kExitConfig);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "sim: batch simulation harness eliciting misinformation judgments and "
      "share-likelihood ratings from persona-prompted language-model agents"};
  app.require_subcommand(1);
  app.footer(
      "Schema versions: cache log completions/v1; params digest params/v1; "
      "cache key cachekey/v1; run id runid/v1; persona digest personas/v1.\n"
      "Exit codes: 0 success, 1 config/input error, 2 partial run, "
      "3 backend/auth error.");

  std::string config_path;
  std::string run_id;
  std::size_t top_k = 5;

  CLI::App* validate = app.add_subcommand(
      "validate", "Check that the corpus, personas and backend all load");
  validate->add_option("-c,--config", config_path, "Run config JSON")
      ->required();

  CLI::App* run = app.add_subcommand(
      "run", "Execute the two-question protocol over the full grid");
  run->add_option("-c,--config", config_path, "Run config JSON")->required();

  CLI::App* metrics = app.add_subcommand(
      "metrics", "Compute agreement, accuracy, Likert and contrast files");
  metrics->add_option("-c,--config", config_path, "Run config JSON")
      ->required();
  metrics->add_option("--run", run_id, "Run id (printed by `sim run`)")
      ->required();

  CLI::App* report = app.add_subcommand(
      "report", "Render SVG charts and CSV tables from the metrics");
  report->add_option("-c,--config", config_path, "Run config JSON")
      ->required();
  report->add_option("--run", run_id, "Run id (printed by `sim run`)")
      ->required();
  report->add_option("--top-k", top_k,
                     "Disagreement exemplar rows (default 5)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? sim::kExitSuccess : sim::kExitConfig;
  }

  if (validate->parsed())
    return sim::cmd_validate(load_or_exit(config_path), std::cout);
  if (run->parsed()) return sim::cmd_run(load_or_exit(config_path), std::cout);
  if (metrics->parsed())
    return sim::cmd_metrics(load_or_exit(config_path), run_id, std::cout);
  return sim::cmd_report(load_or_exit(config_path), run_id, top_k, std::cout);
}
