#include "sim/store.hpp"

#include <chrono>
#include <ctime>

#include "sim/digest.hpp"
#include "sim/errors.hpp"
#include "json.hpp"

namespace sim {

using nlohmann::json;

std::string cache_key(const std::string& backend_id, const std::string& model,
                      const std::string& prompt,
                      const std::string& params_digest, Question question) {
  // Length-prefixed fields so no concatenation of distinct inputs collides.
  std::string material = "cachekey/v1";
  for (const std::string& part :
       {backend_id, model, prompt, params_digest, to_string(question)}) {
    material += '\n';
    material += std::to_string(part.size());
    material += ':';
    material += part;
  }
  return sha256_hex(material);
}

namespace {

std::string now_rfc3339() {
  auto now = std::chrono::system_clock::now();
  std::time_t seconds = std::chrono::system_clock::to_time_t(now);
  std::tm utc{};
  gmtime_r(&seconds, &utc);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buffer;
}

// The checksum covers the entry minus "c", chained on the predecessor.
std::string entry_payload(const std::string& key, const std::string& text,
                          int attempt, const std::string& ts) {
  json payload = json::object();
  payload["a"] = attempt;
  payload["k"] = key;
  payload["t"] = text;
  payload["ts"] = ts;
  return payload.dump();
}

}  // namespace

CompletionStore::CompletionStore(const std::filesystem::path& path,
                                 OpenMode mode)
    : path_(path) {
  load(mode);
  appender_.open(path_, std::ios::binary | std::ios::app);
  if (!appender_)
    fail(ErrorKind::IoFailure, "cannot open cache log " + path_.string());
}

void CompletionStore::load(OpenMode mode) {
  last_checksum_ = sha256_hex(kSchema);

  std::ifstream in(path_, std::ios::binary);
  if (!in) {
    // Fresh store: create the file with its schema line.
    std::filesystem::create_directories(path_.parent_path());
    std::ofstream out(path_, std::ios::binary | std::ios::trunc);
    if (!out)
      fail(ErrorKind::IoFailure, "cannot create cache log " + path_.string());
    out << json{{"schema", kSchema}}.dump() << '\n';
    return;
  }

  std::string line;
  if (!std::getline(in, line))
    fail(ErrorKind::StoreCorrupt,
         "cache log " + path_.string() + " is empty (missing schema line)");
  try {
    json schema = json::parse(line);
    if (schema.at("schema").get<std::string>() != kSchema)
      fail(ErrorKind::StoreCorrupt,
           "cache log schema mismatch: " + schema.at("schema").dump());
  } catch (const json::exception&) {
    fail(ErrorKind::StoreCorrupt, "cache log schema line unreadable");
  }

  // byte offset of the end of the last verified line, for recovery truncation
  std::uintmax_t verified_end = static_cast<std::uintmax_t>(in.tellg());
  std::string damage;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    bool last_line = in.peek() == std::ifstream::traits_type::eof();
    std::string why;
    try {
      json entry = json::parse(line);
      std::string key = entry.at("k").get<std::string>();
      std::string text = entry.at("t").get<std::string>();
      int attempt = entry.at("a").get<int>();
      std::string ts = entry.at("ts").get<std::string>();
      std::string checksum = entry.at("c").get<std::string>();
      std::string expect =
          sha256_hex(last_checksum_ + entry_payload(key, text, attempt, ts));
      if (checksum != expect) {
        why = "checksum mismatch";
      } else {
        last_checksum_ = checksum;
        if (!index_.count(key))
          index_.emplace(key, CacheEntry{key, text, ts, attempt});
        verified_end = static_cast<std::uintmax_t>(in.tellg());
        continue;
      }
    } catch (const json::exception&) {
      why = "unparseable line";
    }
    damage = "line " + std::to_string(line_no) + ": " + why;
    if (!last_line)
      fail(ErrorKind::StoreCorrupt,
           "cache log " + path_.string() + " damaged mid-file (" + damage +
               ")");
    if (mode == OpenMode::Strict)
      fail(ErrorKind::StoreCorrupt,
           "cache log " + path_.string() + " damaged (" + damage + ")");
    break;
  }

  if (!damage.empty()) {
    // Recover mode: drop the crash artifact so future appends re-chain.
    in.close();
    std::filesystem::resize_file(path_, verified_end);
  }
}

std::optional<CacheEntry> CompletionStore::get(const std::string& key) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void CompletionStore::put(const std::string& key, const std::string& raw_text,
                          int attempt) {
  std::lock_guard<std::mutex> lock(mutex_);
  std::string ts = now_rfc3339();
  std::string payload = entry_payload(key, raw_text, attempt, ts);
  std::string checksum = sha256_hex(last_checksum_ + payload);

  json entry = json::object();
  entry["a"] = attempt;
  entry["c"] = checksum;
  entry["k"] = key;
  entry["t"] = raw_text;
  entry["ts"] = ts;
  appender_ << entry.dump() << '\n';
  appender_.flush();
  if (!appender_)
    fail(ErrorKind::IoFailure, "append to cache log " + path_.string() +
                                   " failed");

  last_checksum_ = checksum;
  if (!index_.count(key))
    index_.emplace(key, CacheEntry{key, raw_text, ts, attempt});
}

std::size_t CompletionStore::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return index_.size();
}

}  // namespace sim
