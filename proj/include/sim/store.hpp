#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "sim/backend.hpp"
#include "sim/personas.hpp"

namespace sim {

/// Content address of one completion. Any byte difference in backend id,
/// model, prompt, params digest or question kind yields a different key.
/// The serialization is versioned so the digest is stable across builds.
std::string cache_key(const std::string& backend_id, const std::string& model,
                      const std::string& prompt,
                      const std::string& params_digest, Question question);

struct CacheEntry {
  std::string key;
  std::string raw_text;
  std::string created_at;  // RFC 3339 UTC
  int attempt = 1;
};

enum class OpenMode {
  Strict,   // any damage -> StoreCorrupt
  Recover,  // a damaged final line (crash artifact) is truncated away
};

/// Append-only completion cache: a schema-pinned log of JSON lines, each
/// checksum-chained to its predecessor, plus an in-memory first-write-wins
/// index built at open. One writer process; puts are serialized.
class CompletionStore {
 public:
  CompletionStore(const std::filesystem::path& path, OpenMode mode);

  std::optional<CacheEntry> get(const std::string& key) const;
  void put(const std::string& key, const std::string& raw_text,
           int attempt = 1);

  std::size_t size() const;
  const std::filesystem::path& path() const { return path_; }

  static constexpr const char* kSchema = "completions/v1";

 private:
  void load(OpenMode mode);

  std::filesystem::path path_;
  std::map<std::string, CacheEntry> index_;
  std::string last_checksum_;
  std::ofstream appender_;
  mutable std::mutex mutex_;
};

}  // namespace sim
