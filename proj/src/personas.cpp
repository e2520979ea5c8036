#include "sim/personas.hpp"

#include <fstream>

#include "sim/digest.hpp"
#include "sim/errors.hpp"
#include "json.hpp"

namespace sim {

using nlohmann::json;

namespace {

constexpr const char* kPlaceholder = "HEADLINE";

constexpr const char* kBeliefQuestion = "Did you believe the headline?";

constexpr const char* kShareQuestion =
    "On a scale of 1 to 5, where 1 is not at all likely and 5 is extremely "
    "likely, how likely are you to share this headline on social media? "
    "Answer with a single number.";

constexpr const char* kBeliefSuffix = "Answer with exactly one word: yes or no.";

constexpr const char* kShareSuffix = "Answer with a single number from 1 to 5.";

std::size_t placeholder_count(const std::string& text) {
  std::size_t count = 0;
  for (std::size_t pos = text.find(kPlaceholder); pos != std::string::npos;
       pos = text.find(kPlaceholder, pos + 1))
    ++count;
  return count;
}

Persona make_persona(const std::string& name, PersonaCategory category,
                     const std::string& preamble) {
  Persona persona;
  persona.name = name;
  persona.category = category;
  persona.belief_template = preamble + kBeliefQuestion;
  persona.share_template = preamble + kShareQuestion;
  persona.answer_suffix = kBeliefSuffix;
  return persona;
}

}  // namespace

std::string to_string(PersonaCategory category) {
  return category == PersonaCategory::Profession ? "profession" : "schema";
}

PersonaCategory persona_category_from_string(const std::string& text) {
  if (text == "profession") return PersonaCategory::Profession;
  if (text == "schema") return PersonaCategory::Schema;
  fail(ErrorKind::BadCategory,
       "category \"" + text + "\" not in {profession, schema}");
}

std::string to_string(Question question) {
  return question == Question::Belief ? "belief" : "share";
}

const Persona* PersonaRegistry::find(const std::string& name) const {
  for (const auto& persona : personas) {
    if (persona.name == name) return &persona;
  }
  return nullptr;
}

std::vector<std::string> PersonaRegistry::names() const {
  std::vector<std::string> out;
  out.reserve(personas.size());
  for (const auto& persona : personas) out.push_back(persona.name);
  return out;
}

std::string PersonaRegistry::digest() const {
  json doc = json::array();
  for (const auto& persona : personas) {
    json entry = json::object();
    entry["name"] = persona.name;
    entry["category"] = to_string(persona.category);
    entry["belief_template"] = persona.belief_template;
    entry["share_template"] = persona.share_template;
    entry["answer_suffix"] =
        persona.answer_suffix ? json(*persona.answer_suffix) : json(nullptr);
    doc.push_back(std::move(entry));
  }
  return sha256_hex("personas/v1\n" + doc.dump());
}

PersonaRegistry default_registry() {
  PersonaRegistry registry;
  registry.personas = {
      make_persona("soldier", PersonaCategory::Profession,
                   "You are a young enlisted soldier and read the following "
                   "headline: HEADLINE "),
      make_persona("college", PersonaCategory::Profession,
                   "You are a politically active college student and read "
                   "the following headline: HEADLINE "),
      make_persona("retired", PersonaCategory::Profession,
                   "You are an older retired professional and read the "
                   "following headline: HEADLINE "),
      make_persona("industrial", PersonaCategory::Profession,
                   "You are an industrial worker and read the following "
                   "headline: HEADLINE "),
      make_persona("financial", PersonaCategory::Profession,
                   "You are a financial analyst and read the following "
                   "headline: HEADLINE "),
      make_persona("conspiracy", PersonaCategory::Schema,
                   "You are an individual who believes in many conspiracy "
                   "theories and read the following headline: HEADLINE "),
      make_persona("susceptible", PersonaCategory::Schema,
                   "You are someone who is susceptible to conspiracy "
                   "theories and read the following headline: HEADLINE "),
      make_persona("standard", PersonaCategory::Schema,
                   "You are a standard news reader and read the following "
                   "headline: HEADLINE "),
  };
  return registry;
}

std::string render(const Persona& persona, const HeadlineRecord& headline,
                   Question question) {
  const std::string& tpl = question == Question::Belief
                               ? persona.belief_template
                               : persona.share_template;
  std::size_t pos = tpl.find(kPlaceholder);
  if (pos == std::string::npos)
    fail(ErrorKind::PlaceholderMissing,
         "persona \"" + persona.name + "\" " + to_string(question) +
             " template lacks the HEADLINE placeholder");
  std::string out = tpl;
  out.replace(pos, std::string(kPlaceholder).size(), headline.headline);
  return out;
}

std::string render_reask(const Persona& persona,
                         const HeadlineRecord& headline, Question question) {
  std::string suffix =
      question == Question::Belief
          ? (persona.answer_suffix ? *persona.answer_suffix : kBeliefSuffix)
          : kShareSuffix;
  std::string base = render(persona, headline, question);
  // A template already ending in the suffix gains nothing from re-asking.
  if (base.size() >= suffix.size() &&
      base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0)
    return base;
  return base + " " + suffix;
}

PersonaRegistry load_registry(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    fail(ErrorKind::IoFailure, "cannot open persona file " + path.string());

  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& err) {
    fail(ErrorKind::MalformedRecord,
         "persona file " + path.string() + ": " + err.what());
  }
  if (!doc.is_array() || doc.empty())
    fail(ErrorKind::MalformedRecord,
         "persona file must be a non-empty JSON array");

  PersonaRegistry registry;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& entry = doc[i];
    std::string where = "persona " + std::to_string(i);
    if (!entry.is_object())
      fail(ErrorKind::MalformedRecord, where + ": not a JSON object");
    for (const char* field :
         {"name", "category", "belief_template", "share_template"}) {
      if (!entry.contains(field) || !entry[field].is_string() ||
          entry[field].get<std::string>().empty())
        fail(ErrorKind::MalformedRecord,
             where + ": missing or empty field \"" + field + "\"");
    }

    Persona persona;
    persona.name = entry["name"].get<std::string>();
    persona.category =
        persona_category_from_string(entry["category"].get<std::string>());
    persona.belief_template = entry["belief_template"].get<std::string>();
    persona.share_template = entry["share_template"].get<std::string>();
    if (entry.contains("answer_suffix") && !entry["answer_suffix"].is_null()) {
      if (!entry["answer_suffix"].is_string())
        fail(ErrorKind::MalformedRecord,
             where + ": answer_suffix must be a string or null");
      persona.answer_suffix = entry["answer_suffix"].get<std::string>();
    }

    for (const auto* tpl : {&persona.belief_template, &persona.share_template}) {
      if (placeholder_count(*tpl) != 1)
        fail(ErrorKind::PlaceholderMissing,
             where + " (\"" + persona.name +
                 "\"): template must contain HEADLINE exactly once");
    }
    if (registry.find(persona.name))
      fail(ErrorKind::DuplicateName,
           "duplicate persona name \"" + persona.name + "\"");
    registry.personas.push_back(std::move(persona));
  }
  return registry;
}

}  // namespace sim
