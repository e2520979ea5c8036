#include "sim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "sim/errors.hpp"
#include "json.hpp"

namespace sim {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

Agreement pairwise_agreement(const LabelSeq& a, const LabelSeq& b) {
  if (a.size() != b.size())
    fail(ErrorKind::SeriesLengthMismatch,
         "label sequences differ in length (" + std::to_string(a.size()) +
             " vs " + std::to_string(b.size()) + ")");
  std::size_t shared = 0;
  std::size_t matches = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i] || !b[i]) continue;
    ++shared;
    if (*a[i] == *b[i]) ++matches;
  }
  Agreement result;
  result.denominator = shared;
  if (shared > 0)
    result.value = static_cast<double>(matches) / static_cast<double>(shared);
  return result;
}

std::optional<double> cohen_kappa(const LabelSeq& a, const LabelSeq& b) {
  if (a.size() != b.size())
    fail(ErrorKind::SeriesLengthMismatch,
         "label sequences differ in length");
  std::size_t n = 0, matches = 0;
  std::size_t a_real = 0, b_real = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i] || !b[i]) continue;
    ++n;
    if (*a[i] == *b[i]) ++matches;
    if (*a[i] == BeliefLabel::Real) ++a_real;
    if (*b[i] == BeliefLabel::Real) ++b_real;
  }
  if (n == 0) return std::nullopt;
  double dn = static_cast<double>(n);
  double p_o = matches / dn;
  double p_e = (a_real / dn) * (b_real / dn) +
               ((n - a_real) / dn) * ((n - b_real) / dn);
  if (std::abs(1.0 - p_e) < 1e-12) return std::nullopt;  // degenerate margins
  return (p_o - p_e) / (1.0 - p_e);
}

std::optional<double> AgreementMatrix::at(const std::string& a,
                                          const std::string& b) const {
  auto index = [&](const std::string& name) -> std::size_t {
    auto it = std::find(annotators.begin(), annotators.end(), name);
    if (it == annotators.end())
      fail(ErrorKind::UnknownKey, "annotator \"" + name + "\" not in matrix");
    return static_cast<std::size_t>(it - annotators.begin());
  };
  return values[index(a)][index(b)];
}

namespace {

LabelSeq persona_seq(const ResponseMatrix& matrix,
                     const std::string& persona) {
  LabelSeq seq;
  seq.reserve(matrix.headlines.size());
  for (const auto& headline : matrix.headlines) {
    const ElicitedResponse* cell = matrix.cell(persona, headline);
    seq.push_back(cell ? cell->belief : std::nullopt);
  }
  return seq;
}

LabelSeq reference_seq(const ResponseMatrix& matrix, const Corpus& corpus,
                       Reference reference) {
  LabelSeq seq;
  seq.reserve(matrix.headlines.size());
  for (const auto& headline : matrix.headlines) {
    const HeadlineRecord* record = corpus.find(headline);
    if (!record)
      fail(ErrorKind::UnknownKey,
           "matrix headline \"" + headline + "\" not in corpus");
    if (reference == Reference::Gold)
      seq.push_back(record->gold);
    else
      seq.push_back(record->human_pred);
  }
  return seq;
}

struct AnnotatorSet {
  std::vector<std::string> names;
  std::vector<LabelSeq> sequences;
};

AnnotatorSet annotators_for(const ResponseMatrix& matrix, const Corpus& corpus,
                            bool include_gold, bool include_human_pred) {
  AnnotatorSet set;
  for (const auto& persona : matrix.personas) {
    set.names.push_back(persona);
    set.sequences.push_back(persona_seq(matrix, persona));
  }
  if (include_gold) {
    set.names.push_back("gold");
    set.sequences.push_back(reference_seq(matrix, corpus, Reference::Gold));
  }
  if (include_human_pred) {
    set.names.push_back("human_pred");
    set.sequences.push_back(
        reference_seq(matrix, corpus, Reference::HumanPred));
  }
  return set;
}

template <typename Pairwise>
AgreementMatrix build_matrix(const AnnotatorSet& set, Pairwise pairwise) {
  AgreementMatrix am;
  am.annotators = set.names;
  std::size_t n = set.names.size();
  am.values.assign(n, std::vector<std::optional<double>>(n));
  am.denominators.assign(n, std::vector<std::size_t>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      auto [value, denominator] = pairwise(set.sequences[i], set.sequences[j]);
      am.values[i][j] = value;
      am.values[j][i] = value;
      am.denominators[i][j] = denominator;
      am.denominators[j][i] = denominator;
    }
  }
  return am;
}

}  // namespace

AgreementMatrix agreement_matrix(const ResponseMatrix& matrix,
                                 const Corpus& corpus, bool include_gold,
                                 bool include_human_pred) {
  auto set = annotators_for(matrix, corpus, include_gold, include_human_pred);
  return build_matrix(set, [](const LabelSeq& a, const LabelSeq& b) {
    Agreement agreement = pairwise_agreement(a, b);
    return std::pair<std::optional<double>, std::size_t>(
        agreement.value, agreement.denominator);
  });
}

AgreementMatrix kappa_matrix(const ResponseMatrix& matrix,
                             const Corpus& corpus, bool include_gold,
                             bool include_human_pred) {
  auto set = annotators_for(matrix, corpus, include_gold, include_human_pred);
  return build_matrix(set, [](const LabelSeq& a, const LabelSeq& b) {
    return std::pair<std::optional<double>, std::size_t>(
        cohen_kappa(a, b), pairwise_agreement(a, b).denominator);
  });
}

AccuracyTable accuracy_vs_reference(const ResponseMatrix& matrix,
                                    const Corpus& corpus,
                                    Reference reference) {
  LabelSeq ref = reference_seq(matrix, corpus, reference);
  AccuracyTable table;
  for (const auto& persona : matrix.personas) {
    Agreement agreement = pairwise_agreement(persona_seq(matrix, persona), ref);
    table.push_back({persona, agreement.value, agreement.denominator});
  }
  return table;
}

LikertHistogram likert_distribution(const ResponseMatrix& matrix,
                                    const std::string& persona) {
  if (std::find(matrix.personas.begin(), matrix.personas.end(), persona) ==
      matrix.personas.end())
    fail(ErrorKind::UnknownKey, "persona \"" + persona + "\" not in matrix");
  LikertHistogram histogram;
  for (const auto& headline : matrix.headlines) {
    const ElicitedResponse* cell = matrix.cell(persona, headline);
    if (!cell || !cell->share) continue;
    ++histogram.counts[static_cast<std::size_t>(*cell->share - 1)];
    ++histogram.n;
  }
  if (histogram.n == 0)
    fail(ErrorKind::EmptyHistogram,
         "persona \"" + persona + "\" has no valid share ratings");
  return histogram;
}

LikertHistogram human_likert_distribution(const Corpus& corpus) {
  LikertHistogram histogram;
  for (const auto& record : corpus.records) {
    for (int rating : record.human_share) {
      ++histogram.counts[static_cast<std::size_t>(rating - 1)];
      ++histogram.n;
    }
  }
  if (histogram.n == 0)
    fail(ErrorKind::EmptyHistogram, "corpus carries no human share ratings");
  return histogram;
}

double tv_distance(const LikertHistogram& h1, const LikertHistogram& h2) {
  if (h1.n == 0 || h2.n == 0)
    fail(ErrorKind::EmptyHistogram,
         "total variation distance needs nonempty histograms");
  double sum = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    double p = static_cast<double>(h1.counts[i]) / static_cast<double>(h1.n);
    double q = static_cast<double>(h2.counts[i]) / static_cast<double>(h2.n);
    sum += std::abs(p - q);
  }
  return sum / 2.0;
}

GroupContrast group_agreement_contrast(const AgreementMatrix& am,
                                       const PersonaRegistry& registry) {
  std::vector<std::string> professions, schemas;
  for (const auto& persona : registry.personas) {
    (persona.category == PersonaCategory::Profession ? professions : schemas)
        .push_back(persona.name);
  }
  if (professions.size() < 2)
    fail(ErrorKind::GroupTooSmall,
         "need >= 2 profession personas, have " +
             std::to_string(professions.size()));
  if (schemas.size() < 2)
    fail(ErrorKind::GroupTooSmall,
         "need >= 2 schema personas, have " + std::to_string(schemas.size()));

  auto mean_over = [&](const std::vector<std::pair<std::string, std::string>>&
                           pairs) {
    double sum = 0;
    std::size_t count = 0;
    for (const auto& [a, b] : pairs) {
      std::optional<double> value = am.at(a, b);
      if (!value) continue;  // no valid overlap: excluded
      sum += *value;
      ++count;
    }
    if (count == 0)
      fail(ErrorKind::NoValidOverlap,
           "no present agreement values in a contrast group");
    return sum / static_cast<double>(count);
  };

  auto within = [&](const std::vector<std::string>& group) {
    std::vector<std::pair<std::string, std::string>> pairs;
    for (std::size_t i = 0; i < group.size(); ++i)
      for (std::size_t j = i + 1; j < group.size(); ++j)
        pairs.emplace_back(group[i], group[j]);
    return pairs;
  };

  std::vector<std::pair<std::string, std::string>> cross;
  for (const auto& p : professions)
    for (const auto& s : schemas) cross.emplace_back(p, s);

  GroupContrast contrast;
  contrast.mean_within_profession = mean_over(within(professions));
  contrast.mean_within_schema = mean_over(within(schemas));
  contrast.mean_cross_group = mean_over(cross);
  return contrast;
}

namespace {

ordered_json optional_json(const std::optional<double>& value) {
  return value ? ordered_json(*value) : ordered_json(nullptr);
}

ordered_json histogram_json(const LikertHistogram& histogram) {
  ordered_json doc;
  doc["counts"] = histogram.counts;
  doc["n"] = histogram.n;
  return doc;
}

ordered_json matrix_json(const AgreementMatrix& am, bool with_denominators) {
  ordered_json doc;
  doc["annotators"] = am.annotators;
  ordered_json values = ordered_json::array();
  for (const auto& row : am.values) {
    ordered_json out_row = ordered_json::array();
    for (const auto& value : row) out_row.push_back(optional_json(value));
    values.push_back(std::move(out_row));
  }
  doc["values"] = std::move(values);
  if (with_denominators) doc["denominators"] = am.denominators;
  return doc;
}

void write_json_file(const ordered_json& doc,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    fail(ErrorKind::IoFailure, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out)
    fail(ErrorKind::IoFailure, "short write to " + path.string());
}

}  // namespace

void write_metrics_files(const ResponseMatrix& matrix, const Corpus& corpus,
                         const PersonaRegistry& registry,
                         const MetricsOptions& options,
                         const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  AgreementMatrix am = agreement_matrix(matrix, corpus, options.include_gold,
                                        options.include_human_pred);
  {
    ordered_json doc;
    doc["run_id"] = matrix.run_id;
    ordered_json body = matrix_json(am, true);
    for (auto& [key, value] : body.items()) doc[key] = std::move(value);
    if (options.include_kappa) {
      AgreementMatrix km = kappa_matrix(matrix, corpus, options.include_gold,
                                        options.include_human_pred);
      doc["kappa"] = matrix_json(km, false)["values"];
    }
    write_json_file(doc, dir / "agreement.json");
  }

  {
    AccuracyTable vs_gold =
        accuracy_vs_reference(matrix, corpus, Reference::Gold);
    AccuracyTable vs_human =
        accuracy_vs_reference(matrix, corpus, Reference::HumanPred);
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < vs_gold.size(); ++i) {
      ordered_json row;
      row["persona"] = vs_gold[i].persona;
      row["accuracy_vs_gold"] = optional_json(vs_gold[i].accuracy);
      row["n_gold"] = vs_gold[i].n_valid;
      row["accuracy_vs_human"] = optional_json(vs_human[i].accuracy);
      row["n_human"] = vs_human[i].n_valid;
      rows.push_back(std::move(row));
    }
    ordered_json doc;
    doc["run_id"] = matrix.run_id;
    doc["personas"] = std::move(rows);
    write_json_file(doc, dir / "accuracy.json");
  }

  {
    std::optional<LikertHistogram> human;
    try {
      human = human_likert_distribution(corpus);
    } catch (const SimError&) {
      // corpus without human ratings: human_pool stays null
    }
    ordered_json personas = ordered_json::object();
    ordered_json tv = ordered_json::object();
    for (const auto& persona : matrix.personas) {
      std::optional<LikertHistogram> histogram;
      try {
        histogram = likert_distribution(matrix, persona);
      } catch (const SimError&) {
        // all-Invalid share column: reported as null
      }
      personas[persona] =
          histogram ? histogram_json(*histogram) : ordered_json(nullptr);
      tv[persona] = histogram && human
                        ? ordered_json(tv_distance(*histogram, *human))
                        : ordered_json(nullptr);
    }
    ordered_json doc;
    doc["run_id"] = matrix.run_id;
    doc["personas"] = std::move(personas);
    doc["human_pool"] =
        human ? histogram_json(*human) : ordered_json(nullptr);
    doc["tv_vs_human"] = std::move(tv);
    write_json_file(doc, dir / "likert.json");
  }

  {
    ordered_json doc;
    doc["run_id"] = matrix.run_id;
    try {
      GroupContrast contrast = group_agreement_contrast(am, registry);
      doc["mean_within_profession"] = contrast.mean_within_profession;
      doc["mean_within_schema"] = contrast.mean_within_schema;
      doc["mean_cross_group"] = contrast.mean_cross_group;
    } catch (const SimError&) {
      // registry too small for a contrast: explicit nulls keep the file set
      doc["mean_within_profession"] = nullptr;
      doc["mean_within_schema"] = nullptr;
      doc["mean_cross_group"] = nullptr;
    }
    write_json_file(doc, dir / "contrast.json");
  }
}

}  // namespace sim
