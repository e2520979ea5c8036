#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sim/corpus.hpp"

namespace sim {

enum class PersonaCategory { Profession, Schema };

std::string to_string(PersonaCategory category);
PersonaCategory persona_category_from_string(const std::string& text);

enum class Question { Belief, Share };

std::string to_string(Question question);

/// A persona is a pair of prompt templates, each carrying the placeholder
/// token HEADLINE exactly once. answer_suffix is the textual fallback
/// constraint appended on re-ask (and up front when the backend has no
/// logit-bias support); it is kept separate so the template text stays
/// pristine.
struct Persona {
  std::string name;
  PersonaCategory category = PersonaCategory::Profession;
  std::string belief_template;
  std::string share_template;
  std::optional<std::string> answer_suffix;
};

struct PersonaRegistry {
  std::vector<Persona> personas;

  const Persona* find(const std::string& name) const;
  std::vector<std::string> names() const;
  /// Digest over a canonical serialization of all personas; feeds run_id.
  std::string digest() const;
};

/// The eight default personas: five professions (soldier, college,
/// retired, industrial, financial) and three mental schemas (conspiracy,
/// susceptible, standard). Belief templates are fixed verbatim; share
/// templates reuse each preamble with a 1-to-5 share question.
PersonaRegistry default_registry();

/// Substitutes the placeholder with the headline text in a single pass:
/// a literal "HEADLINE" inside the headline itself is not re-expanded.
/// Throws PlaceholderMissing if the template lacks the placeholder.
std::string render(const Persona& persona, const HeadlineRecord& headline,
                   Question question);

/// Renders the re-ask variant: base prompt plus the per-question answer
/// suffix separated by one space. Belief uses persona.answer_suffix;
/// share uses a fixed numeric instruction.
std::string render_reask(const Persona& persona,
                         const HeadlineRecord& headline, Question question);

/// Loads a custom registry: JSON array of {"name", "category",
/// "belief_template", "share_template", "answer_suffix"}. Throws
/// DuplicateName, PlaceholderMissing, BadCategory, MalformedRecord.
PersonaRegistry load_registry(const std::filesystem::path& path);

}  // namespace sim
