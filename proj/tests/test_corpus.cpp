#include <fstream>

#include "doctest.h"
#include "sim/corpus.hpp"
#include "sim/digest.hpp"
#include "sim/errors.hpp"
#include "support/checks.hpp"
#include "support/reference_grid.hpp"
#include "support/tempdir.hpp"

using namespace sim;
using testsupport::TempDir;
using testsupport::error_message;

TEST_SUITE("corpus") {

TEST_CASE("belief labels round-trip through their closed vocabulary") {
  CHECK(to_string(BeliefLabel::Real) == "real");
  CHECK(to_string(BeliefLabel::Misinfo) == "misinfo");
  CHECK(belief_label_from_string("real") == BeliefLabel::Real);
  CHECK(belief_label_from_string("misinfo") == BeliefLabel::Misinfo);
  CHECK_FAILS(ErrorKind::BadLabel, belief_label_from_string("fake"));
  CHECK_FAILS(ErrorKind::BadLabel, belief_label_from_string("Real"));
  CHECK_FAILS(ErrorKind::BadLabel, belief_label_from_string(""));
}

TEST_CASE("serialize_record emits a fixed key order and omits absent fields") {
  HeadlineRecord record;
  record.id = "h1";
  record.headline = "A \"quoted\" headline";
  record.gold = BeliefLabel::Misinfo;
  CHECK(serialize_record(record) ==
        R"({"id":"h1","headline":"A \"quoted\" headline","gold":"misinfo"})");

  record.human_pred = BeliefLabel::Real;
  record.human_share = {3, 4, 2};
  record.topic = "politics";
  record.emotion = "anger";
  CHECK(serialize_record(record) ==
        R"({"id":"h1","headline":"A \"quoted\" headline","gold":"misinfo",)"
        R"("human_pred":"real","human_share":[3,4,2],"topic":"politics",)"
        R"("emotion":"anger"})");
}

TEST_CASE("corpus digest is the SHA-256 of the normalized serialization") {
  Corpus corpus = testsupport::reference_grid().corpus;
  CHECK(corpus.source_digest == sha256_hex(serialize_corpus(corpus)));
  CHECK(corpus.source_digest.size() == 64);

  // Content change moves the digest; restoring it restores the digest.
  std::string before = corpus.source_digest;
  Corpus copy = corpus;
  copy.records[0].headline += "!";
  CHECK(sha256_hex(serialize_corpus(copy)) != before);
}

TEST_CASE("write_normalized then load_normalized reproduces records and digest") {
  TempDir dir;
  Corpus corpus = testsupport::reference_grid().corpus;
  auto path = dir / "corpus.jsonl";
  write_normalized(corpus, path);

  Corpus loaded = load_normalized(path);
  REQUIRE(loaded.records.size() == corpus.records.size());
  CHECK(loaded.source_digest == corpus.source_digest);
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    CHECK(loaded.records[i].id == corpus.records[i].id);
    CHECK(loaded.records[i].headline == corpus.records[i].headline);
    CHECK(loaded.records[i].gold == corpus.records[i].gold);
    CHECK(loaded.records[i].human_pred == corpus.records[i].human_pred);
    CHECK(loaded.records[i].human_share == corpus.records[i].human_share);
  }
  CHECK(testsupport::read_text(path) == serialize_corpus(corpus));
}

TEST_CASE("load_normalized skips blank lines and keeps file order") {
  TempDir dir;
  auto path = dir / "corpus.jsonl";
  testsupport::write_text(path,
      "{\"id\":\"b\",\"headline\":\"second alphabetically\",\"gold\":\"real\"}\n"
      "\n"
      "{\"id\":\"a\",\"headline\":\"first alphabetically\",\"gold\":\"misinfo\"}\n");
  Corpus corpus = load_normalized(path);
  REQUIRE(corpus.records.size() == 2);
  CHECK(corpus.records[0].id == "b");
  CHECK(corpus.records[1].id == "a");
  CHECK(corpus.find("a") == &corpus.records[1]);
  CHECK(corpus.find("missing") == nullptr);
}

TEST_CASE("load_normalized reports malformed input with line numbers") {
  TempDir dir;
  auto path = dir / "bad.jsonl";
  auto expect = [&](ErrorKind kind, const std::string& content,
                    const std::string& needle) {
    testsupport::write_text(path, content);
    std::string message =
        error_message(kind, [&] { load_normalized(path); });
    CHECK(message.find(needle) != std::string::npos);
  };

  expect(ErrorKind::MalformedRecord,
         "{\"id\":\"a\",\"headline\":\"x\",\"gold\":\"real\"}\nnot json\n",
         "line 2");
  expect(ErrorKind::MissingField, "{\"headline\":\"x\",\"gold\":\"real\"}\n",
         "\"id\"");
  expect(ErrorKind::MissingField, "{\"id\":\"a\",\"gold\":\"real\"}\n",
         "\"headline\"");
  expect(ErrorKind::MissingField, "{\"id\":\"a\",\"headline\":\"x\"}\n",
         "\"gold\"");
  expect(ErrorKind::BadLabel,
         "{\"id\":\"a\",\"headline\":\"x\",\"gold\":\"bogus\"}\n", "bogus");
  expect(ErrorKind::BadLabel,
         "{\"id\":\"a\",\"headline\":\"x\",\"gold\":\"real\","
         "\"human_pred\":\"yes\"}\n",
         "human_pred");
  expect(ErrorKind::BadLikert,
         "{\"id\":\"a\",\"headline\":\"x\",\"gold\":\"real\","
         "\"human_share\":[3,6]}\n",
         "6");
  expect(ErrorKind::BadLikert,
         "{\"id\":\"a\",\"headline\":\"x\",\"gold\":\"real\","
         "\"human_share\":[0]}\n",
         "0");
  expect(ErrorKind::BadLikert,
         "{\"id\":\"a\",\"headline\":\"x\",\"gold\":\"real\","
         "\"human_share\":\"3\"}\n",
         "array");
  expect(ErrorKind::MalformedRecord,
         "{\"id\":\"\",\"headline\":\"x\",\"gold\":\"real\"}\n", "id");
  expect(ErrorKind::DuplicateId,
         "{\"id\":\"a\",\"headline\":\"x\",\"gold\":\"real\"}\n"
         "{\"id\":\"a\",\"headline\":\"y\",\"gold\":\"real\"}\n",
         "line 2");
  expect(ErrorKind::EmptyCorpus, "\n\n", "empty");
  CHECK_FAILS(ErrorKind::IoFailure, load_normalized(dir / "does-not-exist"));
}

TEST_CASE("strict mode rejects unknown fields; lax mode warns and loads") {
  TempDir dir;
  auto path = dir / "extra.jsonl";
  testsupport::write_text(path,
      "{\"id\":\"a\",\"headline\":\"x\",\"gold\":\"real\",\"spice\":9}\n");

  std::string message = error_message(
      ErrorKind::UnknownField, [&] { load_normalized(path, LoadMode::Strict); });
  CHECK(message.find("spice") != std::string::npos);
  CHECK(message.find("line 1") != std::string::npos);

  std::vector<std::string> warnings;
  Corpus corpus = load_normalized(path, LoadMode::Lax, &warnings);
  CHECK(corpus.records.size() == 1);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("spice") != std::string::npos);
}

TEST_CASE("import_raw maps columns, synonyms, and synthesizes row ids") {
  TempDir dir;
  auto path = dir / "raw.csv";
  testsupport::write_text(path,
      "title,verdict,annotators,shares,subject\n"
      "\"Comma, quoted \"\"title\"\"\",TRUE,real,3;4;2,energy\n"
      "Plain headline,Fake,misinfo,5|1,health\n"
      "Tabloid line,false,,,\n");

  ImportMapping mapping;
  mapping.headline_column = "title";
  mapping.gold_column = "verdict";
  mapping.human_pred_column = "annotators";
  mapping.human_share_column = "shares";
  mapping.topic_column = "subject";

  ImportResult result = import_raw(path, mapping);
  CHECK(result.skipped == 0);
  REQUIRE(result.corpus.records.size() == 3);

  const auto& first = result.corpus.records[0];
  CHECK(first.id == "r000001");
  CHECK(first.headline == "Comma, quoted \"title\"");
  CHECK(first.gold == BeliefLabel::Real);  // synonym TRUE -> real
  CHECK(first.human_pred == BeliefLabel::Real);
  CHECK(first.human_share == std::vector<int>{3, 4, 2});
  CHECK(first.topic == "energy");

  const auto& second = result.corpus.records[1];
  CHECK(second.id == "r000002");
  CHECK(second.gold == BeliefLabel::Misinfo);  // synonym Fake -> misinfo
  CHECK(second.human_share == std::vector<int>{5, 1});

  const auto& third = result.corpus.records[2];
  CHECK(third.id == "r000003");
  CHECK(third.gold == BeliefLabel::Misinfo);  // synonym false -> misinfo
  CHECK_FALSE(third.human_pred.has_value());
  CHECK(third.human_share.empty());
  CHECK_FALSE(third.topic.has_value());
  CHECK_FALSE(result.corpus.source_digest.empty());
}

TEST_CASE("import_raw skips dirty rows with one reason each") {
  TempDir dir;
  auto path = dir / "dirty.csv";
  testsupport::write_text(path,
      "id,title,verdict,shares\n"
      "k1,Good row,real,4\n"
      "k2,,real,3\n"
      "k3,Mystery verdict,alien,2\n"
      "k4,Bad rating,misinfo,7\n"
      "k1,Duplicate key,real,1\n");

  ImportMapping mapping;
  mapping.headline_column = "title";
  mapping.gold_column = "verdict";
  mapping.id_column = "id";
  mapping.human_share_column = "shares";

  ImportResult result = import_raw(path, mapping);
  REQUIRE(result.corpus.records.size() == 1);
  CHECK(result.corpus.records[0].id == "k1");
  CHECK(result.skipped == 4);
  REQUIRE(result.skip_reasons.size() == 4);
  CHECK(result.skip_reasons[0].find("row 3") != std::string::npos);
  CHECK(result.skip_reasons[0].find("empty headline") != std::string::npos);
  CHECK(result.skip_reasons[1].find("alien") != std::string::npos);
  CHECK(result.skip_reasons[2].find("row 5") != std::string::npos);
  CHECK(result.skip_reasons[3].find("duplicate id") != std::string::npos);
}

TEST_CASE("import_raw rejects unknown columns and all-skipped files") {
  TempDir dir;
  auto path = dir / "raw.csv";
  testsupport::write_text(path, "title,verdict\nSomething,real\n");

  ImportMapping mapping;
  mapping.headline_column = "headline";  // absent from header
  mapping.gold_column = "verdict";
  std::string message =
      error_message(ErrorKind::UnknownColumn, [&] { import_raw(path, mapping); });
  CHECK(message.find("headline") != std::string::npos);

  testsupport::write_text(path, "title,verdict\n,real\n,misinfo\n");
  mapping.headline_column = "title";
  CHECK_FAILS(ErrorKind::AllRowsSkipped, import_raw(path, mapping));
}

TEST_CASE("imported corpora survive a normalize round-trip byte for byte") {
  TempDir dir;
  auto raw = dir / "raw.csv";
  testsupport::write_text(raw,
      "title,verdict\nFirst,real\nSecond,fake\n");
  ImportMapping mapping;
  mapping.headline_column = "title";
  mapping.gold_column = "verdict";
  Corpus imported = import_raw(raw, mapping).corpus;

  auto normalized = dir / "norm.jsonl";
  write_normalized(imported, normalized);
  Corpus reloaded = load_normalized(normalized);
  CHECK(reloaded.source_digest == imported.source_digest);
  CHECK(serialize_corpus(reloaded) == serialize_corpus(imported));
}

TEST_CASE("aggregate_human_pred takes strict majorities and flags ties") {
  const auto R = BeliefLabel::Real;
  const auto M = BeliefLabel::Misinfo;
  CHECK(aggregate_human_pred({R, R, M}) == R);
  CHECK(aggregate_human_pred({M, M, M, R}) == M);
  CHECK(aggregate_human_pred({R}) == R);
  CHECK(aggregate_human_pred({R, M}) == std::nullopt);
  CHECK(aggregate_human_pred({R, M, R, M}) == std::nullopt);
  CHECK_FAILS(ErrorKind::EmptyVotes, aggregate_human_pred({}));
}

}  // TEST_SUITE("corpus")
