#include <string>
#include <vector>

#include "doctest.h"
#include "sim/errors.hpp"
#include "sim/personas.hpp"
#include "support/checks.hpp"
#include "support/tempdir.hpp"

using namespace sim;
using testsupport::TempDir;

namespace {

HeadlineRecord headline_of(const std::string& text) {
  HeadlineRecord record;
  record.id = "h";
  record.headline = text;
  record.gold = BeliefLabel::Real;
  return record;
}

const char* kShareTail =
    "On a scale of 1 to 5, where 1 is not at all likely and 5 is extremely "
    "likely, how likely are you to share this headline on social media? "
    "Answer with a single number.";

}  // namespace

TEST_SUITE("personas") {

TEST_CASE("default registry lists the eight personas in fixed order") {
  PersonaRegistry registry = default_registry();
  CHECK(registry.names() == std::vector<std::string>{
                                "soldier", "college", "retired", "industrial",
                                "financial", "conspiracy", "susceptible",
                                "standard"});
  for (int i = 0; i < 5; ++i)
    CHECK(registry.personas[i].category == PersonaCategory::Profession);
  for (int i = 5; i < 8; ++i)
    CHECK(registry.personas[i].category == PersonaCategory::Schema);
  CHECK(registry.find("conspiracy") == &registry.personas[5]);
  CHECK(registry.find("nobody") == nullptr);
}

TEST_CASE("belief templates carry the exact fixed wording") {
  PersonaRegistry registry = default_registry();
  auto tpl = [&](const char* name) {
    return registry.find(name)->belief_template;
  };
  CHECK(tpl("soldier") ==
        "You are a young enlisted soldier and read the following headline: "
        "HEADLINE Did you believe the headline?");
  CHECK(tpl("college") ==
        "You are a politically active college student and read the following "
        "headline: HEADLINE Did you believe the headline?");
  CHECK(tpl("retired") ==
        "You are an older retired professional and read the following "
        "headline: HEADLINE Did you believe the headline?");
  CHECK(tpl("industrial") ==
        "You are an industrial worker and read the following headline: "
        "HEADLINE Did you believe the headline?");
  CHECK(tpl("financial") ==
        "You are a financial analyst and read the following headline: "
        "HEADLINE Did you believe the headline?");
  CHECK(tpl("conspiracy") ==
        "You are an individual who believes in many conspiracy theories and "
        "read the following headline: HEADLINE Did you believe the headline?");
  CHECK(tpl("susceptible") ==
        "You are someone who is susceptible to conspiracy theories and read "
        "the following headline: HEADLINE Did you believe the headline?");
  CHECK(tpl("standard") ==
        "You are a standard news reader and read the following headline: "
        "HEADLINE Did you believe the headline?");
}

TEST_CASE("share templates reuse each preamble with the 1-to-5 question") {
  PersonaRegistry registry = default_registry();
  const std::string belief_tail = "Did you believe the headline?";
  for (const auto& persona : registry.personas) {
    REQUIRE(persona.belief_template.size() > belief_tail.size());
    std::string preamble = persona.belief_template.substr(
        0, persona.belief_template.size() - belief_tail.size());
    CHECK(persona.share_template == preamble + kShareTail);
    CHECK(persona.answer_suffix ==
          "Answer with exactly one word: yes or no.");
  }
}

TEST_CASE("render substitutes the placeholder in a single pass") {
  PersonaRegistry registry = default_registry();
  const Persona& soldier = *registry.find("soldier");

  CHECK(render(soldier, headline_of("Sky is falling"), Question::Belief) ==
        "You are a young enlisted soldier and read the following headline: "
        "Sky is falling Did you believe the headline?");
  CHECK(render(soldier, headline_of("Sky is falling"), Question::Share) ==
        std::string("You are a young enlisted soldier and read the following "
                    "headline: Sky is falling ") +
            kShareTail);

  // A literal HEADLINE inside the headline text must not be re-expanded.
  std::string rendered =
      render(soldier, headline_of("The word HEADLINE is literal"),
             Question::Belief);
  CHECK(rendered ==
        "You are a young enlisted soldier and read the following headline: "
        "The word HEADLINE is literal Did you believe the headline?");

  Persona broken = soldier;
  broken.belief_template = "No placeholder here.";
  CHECK_FAILS(ErrorKind::PlaceholderMissing,
              render(broken, headline_of("x"), Question::Belief));
}

TEST_CASE("render_reask appends the per-question suffix exactly once") {
  PersonaRegistry registry = default_registry();
  const Persona& soldier = *registry.find("soldier");
  HeadlineRecord record = headline_of("Sky is falling");

  std::string belief = render(soldier, record, Question::Belief);
  CHECK(render_reask(soldier, record, Question::Belief) ==
        belief + " Answer with exactly one word: yes or no.");

  std::string share = render(soldier, record, Question::Share);
  CHECK(render_reask(soldier, record, Question::Share) ==
        share + " Answer with a single number from 1 to 5.");

  // When the base already ends with the suffix the re-ask is identical,
  // which the elicitor uses to skip the second call.
  Persona suffixed = soldier;
  suffixed.belief_template =
      "HEADLINE Answer with exactly one word: yes or no.";
  CHECK(render_reask(suffixed, record, Question::Belief) ==
        render(suffixed, record, Question::Belief));
}

TEST_CASE("registry digest is deterministic and content-sensitive") {
  PersonaRegistry a = default_registry();
  PersonaRegistry b = default_registry();
  CHECK(a.digest() == b.digest());
  CHECK(a.digest().size() == 64);

  b.personas[0].belief_template += "!";
  CHECK(a.digest() != b.digest());

  PersonaRegistry reordered = default_registry();
  std::swap(reordered.personas[0], reordered.personas[1]);
  CHECK(a.digest() != reordered.digest());

  PersonaRegistry no_suffix = default_registry();
  no_suffix.personas[0].answer_suffix.reset();
  CHECK(a.digest() != no_suffix.digest());
}

TEST_CASE("load_registry accepts well-formed files and rejects bad ones") {
  TempDir dir;
  auto path = dir / "personas.json";

  testsupport::write_text(path, R"([
    {"name": "skeptic", "category": "schema",
     "belief_template": "S: HEADLINE Believe?",
     "share_template": "S: HEADLINE Share?",
     "answer_suffix": "Answer yes or no."},
    {"name": "nurse", "category": "profession",
     "belief_template": "N: HEADLINE Believe?",
     "share_template": "N: HEADLINE Share?",
     "answer_suffix": null}
  ])");
  PersonaRegistry registry = load_registry(path);
  REQUIRE(registry.personas.size() == 2);
  CHECK(registry.personas[0].name == "skeptic");
  CHECK(registry.personas[0].category == PersonaCategory::Schema);
  CHECK(registry.personas[0].answer_suffix == "Answer yes or no.");
  CHECK_FALSE(registry.personas[1].answer_suffix.has_value());

  testsupport::write_text(path, R"([
    {"name": "a", "category": "schema",
     "belief_template": "HEADLINE", "share_template": "HEADLINE"},
    {"name": "a", "category": "schema",
     "belief_template": "HEADLINE", "share_template": "HEADLINE"}
  ])");
  CHECK_FAILS(ErrorKind::DuplicateName, load_registry(path));

  testsupport::write_text(path, R"([
    {"name": "a", "category": "astronaut",
     "belief_template": "HEADLINE", "share_template": "HEADLINE"}
  ])");
  CHECK_FAILS(ErrorKind::BadCategory, load_registry(path));

  testsupport::write_text(path, R"([
    {"name": "a", "category": "schema",
     "belief_template": "no placeholder", "share_template": "HEADLINE"}
  ])");
  CHECK_FAILS(ErrorKind::PlaceholderMissing, load_registry(path));

  testsupport::write_text(path, R"([
    {"name": "a", "category": "schema",
     "belief_template": "HEADLINE twice HEADLINE",
     "share_template": "HEADLINE"}
  ])");
  CHECK_FAILS(ErrorKind::PlaceholderMissing, load_registry(path));

  testsupport::write_text(path, R"([
    {"name": "a", "category": "schema", "belief_template": "HEADLINE"}
  ])");
  CHECK_FAILS(ErrorKind::MalformedRecord, load_registry(path));

  testsupport::write_text(path, "[]");
  CHECK_FAILS(ErrorKind::MalformedRecord, load_registry(path));

  testsupport::write_text(path, "{not json");
  CHECK_FAILS(ErrorKind::MalformedRecord, load_registry(path));

  CHECK_FAILS(ErrorKind::IoFailure, load_registry(dir / "absent.json"));
}

}  // TEST_SUITE("personas")
