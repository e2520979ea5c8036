#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sim {

/// Binary headline classification. Serialized forms are the lowercase
/// strings "real" and "misinfo"; the vocabulary is closed.
enum class BeliefLabel { Real, Misinfo };

std::string to_string(BeliefLabel label);
BeliefLabel belief_label_from_string(const std::string& text);

/// One corpus item: the headline, its fact-checked gold label, the
/// aggregated human prediction (absent on ties), and the pooled human
/// share ratings. The emotion tag is preserved but consumed by no metric.
struct HeadlineRecord {
  std::string id;
  std::string headline;
  BeliefLabel gold = BeliefLabel::Real;
  std::optional<BeliefLabel> human_pred;
  std::vector<int> human_share;  // each in [1,5]
  std::optional<std::string> topic;
  std::optional<std::string> emotion;
};

struct Corpus {
  std::vector<HeadlineRecord> records;
  std::string source_digest;  // SHA-256 of the normalized serialization

  const HeadlineRecord* find(const std::string& id) const;
};

/// Canonical line-delimited serialization of one record (fixed key order,
/// compact JSON). The corpus digest is the SHA-256 of these lines joined
/// with '\n' plus a trailing '\n'.
std::string serialize_record(const HeadlineRecord& record);
std::string serialize_corpus(const Corpus& corpus);

enum class LoadMode { Strict, Lax };

/// Loads a normalized JSONL corpus file. Strict mode rejects unknown
/// fields; lax mode collects warnings into `warnings` when given.
/// Throws MissingField / BadLabel / BadLikert / MalformedRecord /
/// UnknownField with the offending line number, DuplicateId, EmptyCorpus.
Corpus load_normalized(const std::filesystem::path& path,
                       LoadMode mode = LoadMode::Strict,
                       std::vector<std::string>* warnings = nullptr);

/// Writes the canonical serialization; load_normalized(write_normalized(c))
/// reproduces records and digest exactly.
void write_normalized(const Corpus& corpus, const std::filesystem::path& path);

/// Column-mapping config for raw tabular (CSV) imports. Names refer to
/// header columns of the source file; only headline and gold are required.
struct ImportMapping {
  std::string headline_column;
  std::string gold_column;
  std::optional<std::string> id_column;
  std::optional<std::string> human_pred_column;
  std::optional<std::string> human_share_column;
  std::optional<std::string> topic_column;
  std::optional<std::string> emotion_column;
  // Raw label -> closed vocabulary. Lookup is case-insensitive and applied
  // after the canonical forms "real"/"misinfo".
  std::map<std::string, std::string> synonyms = {
      {"true", "real"}, {"fake", "misinfo"}, {"false", "misinfo"}};
};

struct ImportResult {
  Corpus corpus;
  std::size_t skipped = 0;
  std::vector<std::string> skip_reasons;  // one entry per skipped row
};

/// Imports a raw CSV file through the mapping. Dirty rows (bad label,
/// out-of-range share, empty headline) are skipped and counted; throws
/// UnknownColumn if the mapping names a column absent from the header and
/// AllRowsSkipped if nothing survives.
ImportResult import_raw(const std::filesystem::path& path,
                        const ImportMapping& mapping);

/// Strict-majority aggregation of annotator votes; nullopt marks a tie.
/// Throws EmptyVotes on empty input.
std::optional<BeliefLabel> aggregate_human_pred(
    const std::vector<BeliefLabel>& votes);

}  // namespace sim
