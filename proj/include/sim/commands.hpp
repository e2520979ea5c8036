#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <string>

#include "sim/config.hpp"
#include "sim/corpus.hpp"
#include "sim/elicit.hpp"
#include "sim/errors.hpp"
#include "sim/personas.hpp"

namespace sim {

// Stable exit-code contract.
inline constexpr int kExitSuccess = 0;
inline constexpr int kExitConfig = 1;   // config or input error
inline constexpr int kExitPartial = 2;  // incomplete run
inline constexpr int kExitBackend = 3;  // backend or auth error

int exit_code_for(ErrorKind kind);

/// run_id: explicit config value, else the first 12 hex chars of the
/// digest over (corpus digest, registry digest, params digest). Identical
/// experiments share identity; no timestamp enters the id.
std::string derive_run_id(const RunConfig& config, const Corpus& corpus,
                          const PersonaRegistry& registry);

/// Commands print human output to `out`, map failures to the exit-code
/// contract, and never throw. An injected backend (tests) overrides the
/// configured one.
int cmd_validate(const RunConfig& config, std::ostream& out,
                 Backend* injected = nullptr);
int cmd_run(const RunConfig& config, std::ostream& out,
            Backend* injected = nullptr, RunStats* stats_out = nullptr);
int cmd_metrics(const RunConfig& config, const std::string& run_id,
                std::ostream& out);
int cmd_report(const RunConfig& config, const std::string& run_id,
               std::size_t top_k, std::ostream& out);

}  // namespace sim
