#include "sim/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sim/digest.hpp"
#include "sim/errors.hpp"
#include "json.hpp"

namespace sim {

using nlohmann::json;

std::string to_string(BeliefLabel label) {
  return label == BeliefLabel::Real ? "real" : "misinfo";
}

BeliefLabel belief_label_from_string(const std::string& text) {
  if (text == "real") return BeliefLabel::Real;
  if (text == "misinfo") return BeliefLabel::Misinfo;
  fail(ErrorKind::BadLabel, "unknown belief label \"" + text + "\"");
}

const HeadlineRecord* Corpus::find(const std::string& id) const {
  for (const auto& record : records) {
    if (record.id == id) return &record;
  }
  return nullptr;
}

std::string serialize_record(const HeadlineRecord& record) {
  // Fixed key order so the digest is a function of content alone.
  nlohmann::ordered_json line = nlohmann::ordered_json::object();
  line["id"] = record.id;
  line["headline"] = record.headline;
  line["gold"] = to_string(record.gold);
  if (record.human_pred) line["human_pred"] = to_string(*record.human_pred);
  if (!record.human_share.empty()) line["human_share"] = record.human_share;
  if (record.topic) line["topic"] = *record.topic;
  if (record.emotion) line["emotion"] = *record.emotion;
  return line.dump();
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& record : corpus.records) {
    out += serialize_record(record);
    out += '\n';
  }
  return out;
}

namespace {

const char* const kKnownFields[] = {"id",          "headline", "gold",
                                    "human_pred",  "human_share",
                                    "topic",       "emotion"};

bool known_field(const std::string& key) {
  return std::find(std::begin(kKnownFields), std::end(kKnownFields), key) !=
         std::end(kKnownFields);
}

std::string at_line(std::size_t line_no, const std::string& message) {
  return "line " + std::to_string(line_no) + ": " + message;
}

HeadlineRecord parse_record(const json& line, std::size_t line_no,
                            LoadMode mode,
                            std::vector<std::string>* warnings) {
  if (!line.is_object())
    fail(ErrorKind::MalformedRecord, at_line(line_no, "not a JSON object"));

  for (const auto& [key, value] : line.items()) {
    (void)value;
    if (known_field(key)) continue;
    if (mode == LoadMode::Strict)
      fail(ErrorKind::UnknownField,
           at_line(line_no, "unknown field \"" + key + "\""));
    if (warnings)
      warnings->push_back(
          at_line(line_no, "ignoring unknown field \"" + key + "\""));
  }

  HeadlineRecord record;
  for (const char* field : {"id", "headline", "gold"}) {
    if (!line.contains(field))
      fail(ErrorKind::MissingField,
           at_line(line_no, std::string("missing required field \"") + field +
                                "\""));
  }
  if (!line["id"].is_string() || line["id"].get<std::string>().empty())
    fail(ErrorKind::MalformedRecord,
         at_line(line_no, "id must be a non-empty string"));
  if (!line["headline"].is_string() ||
      line["headline"].get<std::string>().empty())
    fail(ErrorKind::MalformedRecord,
         at_line(line_no, "headline must be a non-empty string"));
  record.id = line["id"].get<std::string>();
  record.headline = line["headline"].get<std::string>();

  if (!line["gold"].is_string())
    fail(ErrorKind::BadLabel, at_line(line_no, "gold must be a string"));
  try {
    record.gold = belief_label_from_string(line["gold"].get<std::string>());
  } catch (const SimError&) {
    fail(ErrorKind::BadLabel,
         at_line(line_no, "gold label \"" + line["gold"].get<std::string>() +
                              "\" not in {real, misinfo}"));
  }

  if (line.contains("human_pred")) {
    if (!line["human_pred"].is_string())
      fail(ErrorKind::BadLabel,
           at_line(line_no, "human_pred must be a string"));
    try {
      record.human_pred =
          belief_label_from_string(line["human_pred"].get<std::string>());
    } catch (const SimError&) {
      fail(ErrorKind::BadLabel,
           at_line(line_no, "human_pred label \"" +
                                line["human_pred"].get<std::string>() +
                                "\" not in {real, misinfo}"));
    }
  }

  if (line.contains("human_share")) {
    if (!line["human_share"].is_array())
      fail(ErrorKind::BadLikert,
           at_line(line_no, "human_share must be an array"));
    for (const auto& value : line["human_share"]) {
      if (!value.is_number_integer())
        fail(ErrorKind::BadLikert,
             at_line(line_no, "human_share entries must be integers"));
      int rating = value.get<int>();
      if (rating < 1 || rating > 5)
        fail(ErrorKind::BadLikert,
             at_line(line_no, "human_share rating " + std::to_string(rating) +
                                  " outside [1,5]"));
      record.human_share.push_back(rating);
    }
  }

  for (const char* field : {"topic", "emotion"}) {
    if (!line.contains(field)) continue;
    if (!line[field].is_string())
      fail(ErrorKind::MalformedRecord,
           at_line(line_no, std::string("\"") + field + "\" must be a string"));
    std::string value = line[field].get<std::string>();
    if (std::string(field) == "topic")
      record.topic = value;
    else
      record.emotion = value;
  }
  return record;
}

}  // namespace

Corpus load_normalized(const std::filesystem::path& path, LoadMode mode,
                       std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in)
    fail(ErrorKind::IoFailure, "cannot open corpus file " + path.string());

  Corpus corpus;
  std::string raw_line;
  std::size_t line_no = 0;
  for (; std::getline(in, raw_line); ) {
    ++line_no;
    if (raw_line.empty()) continue;
    json line;
    try {
      line = json::parse(raw_line);
    } catch (const json::parse_error& err) {
      fail(ErrorKind::MalformedRecord,
           at_line(line_no, std::string("invalid JSON: ") + err.what()));
    }
    HeadlineRecord record = parse_record(line, line_no, mode, warnings);
    if (corpus.find(record.id))
      fail(ErrorKind::DuplicateId,
           at_line(line_no, "duplicate id \"" + record.id + "\""));
    corpus.records.push_back(std::move(record));
  }
  if (corpus.records.empty())
    fail(ErrorKind::EmptyCorpus, "corpus file " + path.string() + " is empty");

  corpus.source_digest = sha256_hex(serialize_corpus(corpus));
  return corpus;
}

void write_normalized(const Corpus& corpus,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    fail(ErrorKind::IoFailure, "cannot write corpus file " + path.string());
  out << serialize_corpus(corpus);
  if (!out)
    fail(ErrorKind::IoFailure, "short write to corpus file " + path.string());
}

namespace {

// Minimal RFC 4180 reader: quoted fields, doubled-quote escapes, CRLF or
// LF row ends. Embedded newlines inside quotes are honored.
std::vector<std::vector<std::string>> read_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(ErrorKind::IoFailure, "cannot open import file " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  std::size_t i = 0;
  auto end_field = [&] {
    row.push_back(field);
    field.clear();
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(row);
    row.clear();
  };
  while (i < text.size()) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          i += 2;
          continue;
        }
        quoted = false;
        ++i;
        continue;
      }
      field += c;
      ++i;
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        ++i;
        break;
      case ',':
        end_field();
        ++i;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_row();
        ++i;
        break;
      case '\n':
        end_row();
        ++i;
        break;
      default:
        field += c;
        ++i;
        break;
    }
  }
  if (!field.empty() || !row.empty()) end_row();
  return rows;
}

std::string lower(std::string text) {
  std::transform(text.begin(), text.end(), text.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return text;
}

std::string trim(const std::string& text) {
  auto begin = text.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  auto end = text.find_last_not_of(" \t");
  return text.substr(begin, end - begin + 1);
}

std::optional<BeliefLabel> map_label(const std::string& raw,
                                     const ImportMapping& mapping) {
  std::string key = lower(trim(raw));
  if (key == "real") return BeliefLabel::Real;
  if (key == "misinfo") return BeliefLabel::Misinfo;
  for (const auto& [from, to] : mapping.synonyms) {
    if (lower(from) == key) {
      if (to == "real") return BeliefLabel::Real;
      if (to == "misinfo") return BeliefLabel::Misinfo;
      return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace

ImportResult import_raw(const std::filesystem::path& path,
                        const ImportMapping& mapping) {
  auto rows = read_csv(path);
  if (rows.empty())
    fail(ErrorKind::EmptyCorpus, "import file " + path.string() + " is empty");

  const auto& header = rows.front();
  auto column = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      fail(ErrorKind::UnknownColumn,
           "mapped column \"" + name + "\" not present in header");
    return static_cast<std::size_t>(it - header.begin());
  };

  std::size_t headline_col = column(mapping.headline_column);
  std::size_t gold_col = column(mapping.gold_column);
  std::optional<std::size_t> id_col, pred_col, share_col, topic_col,
      emotion_col;
  if (mapping.id_column) id_col = column(*mapping.id_column);
  if (mapping.human_pred_column) pred_col = column(*mapping.human_pred_column);
  if (mapping.human_share_column)
    share_col = column(*mapping.human_share_column);
  if (mapping.topic_column) topic_col = column(*mapping.topic_column);
  if (mapping.emotion_column) emotion_col = column(*mapping.emotion_column);

  ImportResult result;
  auto skip = [&](std::size_t row_no, const std::string& reason) {
    ++result.skipped;
    result.skip_reasons.push_back(
        "row " + std::to_string(row_no) + ": " + reason);
  };

  std::size_t auto_id = 0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    std::size_t row_no = r + 1;  // 1-based, header is row 1
    auto cell = [&](std::size_t col) -> std::string {
      return col < row.size() ? row[col] : std::string();
    };

    std::string headline = trim(cell(headline_col));
    if (headline.empty()) {
      skip(row_no, "empty headline");
      continue;
    }
    auto gold = map_label(cell(gold_col), mapping);
    if (!gold) {
      skip(row_no, "unmappable gold label \"" + trim(cell(gold_col)) + "\"");
      continue;
    }

    HeadlineRecord record;
    record.headline = headline;
    record.gold = *gold;
    ++auto_id;
    if (id_col && !trim(cell(*id_col)).empty()) {
      record.id = trim(cell(*id_col));
    } else {
      char synthetic[16];
      std::snprintf(synthetic, sizeof synthetic, "r%06zu", auto_id);
      record.id = synthetic;
    }

    if (pred_col && !trim(cell(*pred_col)).empty()) {
      auto pred = map_label(cell(*pred_col), mapping);
      if (!pred) {
        skip(row_no,
             "unmappable human_pred label \"" + trim(cell(*pred_col)) + "\"");
        continue;
      }
      record.human_pred = pred;
    }

    if (share_col && !trim(cell(*share_col)).empty()) {
      // Ratings are separated by ';' or '|' within one cell.
      std::string raw = cell(*share_col);
      std::replace(raw.begin(), raw.end(), '|', ';');
      std::stringstream parts(raw);
      std::string part;
      bool bad = false;
      std::vector<int> ratings;
      while (std::getline(parts, part, ';')) {
        part = trim(part);
        if (part.empty()) continue;
        bool digits = !part.empty() &&
                      std::all_of(part.begin(), part.end(), [](unsigned char c) {
                        return std::isdigit(c);
                      });
        int rating = digits ? std::stoi(part) : -1;
        if (!digits || rating < 1 || rating > 5) {
          bad = true;
          break;
        }
        ratings.push_back(rating);
      }
      if (bad) {
        skip(row_no, "human_share rating outside [1,5]");
        continue;
      }
      record.human_share = std::move(ratings);
    }

    if (topic_col && !trim(cell(*topic_col)).empty())
      record.topic = trim(cell(*topic_col));
    if (emotion_col && !trim(cell(*emotion_col)).empty())
      record.emotion = trim(cell(*emotion_col));

    if (result.corpus.find(record.id)) {
      skip(row_no, "duplicate id \"" + record.id + "\"");
      continue;
    }
    result.corpus.records.push_back(std::move(record));
  }

  if (result.corpus.records.empty())
    fail(ErrorKind::AllRowsSkipped,
         "no usable rows in " + path.string() + " (" +
             std::to_string(result.skipped) + " skipped)");

  result.corpus.source_digest = sha256_hex(serialize_corpus(result.corpus));
  return result;
}

std::optional<BeliefLabel> aggregate_human_pred(
    const std::vector<BeliefLabel>& votes) {
  if (votes.empty())
    fail(ErrorKind::EmptyVotes, "cannot aggregate zero annotator votes");
  std::size_t real = static_cast<std::size_t>(
      std::count(votes.begin(), votes.end(), BeliefLabel::Real));
  std::size_t misinfo = votes.size() - real;
  if (real == misinfo) return std::nullopt;
  return real > misinfo ? BeliefLabel::Real : BeliefLabel::Misinfo;
}

}  // namespace sim
