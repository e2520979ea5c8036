#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sim/corpus.hpp"
#include "sim/elicit.hpp"
#include "sim/personas.hpp"

namespace sim {

/// Label sequence aligned on a fixed headline order; nullopt = Invalid.
using LabelSeq = std::vector<std::optional<BeliefLabel>>;

struct Agreement {
  std::optional<double> value;  // absent when no valid overlap
  std::size_t denominator = 0;
};

/// Percent agreement over pairwise-complete cases: matches / shared valid
/// items. Symmetric; 1.0 against itself whenever >= 1 valid cell.
Agreement pairwise_agreement(const LabelSeq& a, const LabelSeq& b);

/// Chance-corrected agreement over the same pairwise-complete cases.
/// Reported separately from percent agreement, never substituted for it;
/// absent when undefined (no overlap, or expected agreement is 1).
std::optional<double> cohen_kappa(const LabelSeq& a, const LabelSeq& b);

struct AgreementMatrix {
  std::vector<std::string> annotators;
  std::vector<std::vector<std::optional<double>>> values;
  std::vector<std::vector<std::size_t>> denominators;

  std::optional<double> at(const std::string& a, const std::string& b) const;
};

/// All annotator pairs via pairwise_agreement. Annotators are the matrix
/// personas in order, then "gold" and "human_pred" when flagged (the
/// human_pred sequence is absent on tie rows).
AgreementMatrix agreement_matrix(const ResponseMatrix& matrix,
                                 const Corpus& corpus, bool include_gold,
                                 bool include_human_pred);

/// Same pair grid, Cohen kappa values.
AgreementMatrix kappa_matrix(const ResponseMatrix& matrix,
                             const Corpus& corpus, bool include_gold,
                             bool include_human_pred);

enum class Reference { Gold, HumanPred };

struct AccuracyRow {
  std::string persona;
  std::optional<double> accuracy;  // absent when denominator is 0
  std::size_t n_valid = 0;
};

using AccuracyTable = std::vector<AccuracyRow>;

/// Per persona: fraction of valid cells matching the reference label.
/// Headlines lacking the reference (human_pred ties) leave the denominator.
AccuracyTable accuracy_vs_reference(const ResponseMatrix& matrix,
                                    const Corpus& corpus, Reference reference);

struct LikertHistogram {
  std::array<std::size_t, 5> counts{};  // index 0 holds rating 1
  std::size_t n = 0;
};

/// Histogram of one persona's valid share ratings.
/// Throws EmptyHistogram when the persona has zero valid values.
LikertHistogram likert_distribution(const ResponseMatrix& matrix,
                                    const std::string& persona);

/// Pools every human_share value across the corpus (dispersion preserved;
/// no per-headline averaging). Throws EmptyHistogram when none exist.
LikertHistogram human_likert_distribution(const Corpus& corpus);

/// Total variation distance between the normalized histograms, in [0,1].
double tv_distance(const LikertHistogram& h1, const LikertHistogram& h2);

struct GroupContrast {
  double mean_within_profession = 0;
  double mean_within_schema = 0;
  double mean_cross_group = 0;
};

/// Means of pairwise agreement within profession pairs, within schema
/// pairs, and across the two groups; absent cells excluded. Throws
/// GroupTooSmall when either group has < 2 personas.
GroupContrast group_agreement_contrast(const AgreementMatrix& am,
                                       const PersonaRegistry& registry);

struct MetricsOptions {
  bool include_gold = true;
  bool include_human_pred = true;
  bool include_kappa = false;
};

/// Writes agreement.json, accuracy.json, likert.json, contrast.json into
/// dir. Deterministic bytes for a fixed matrix and corpus.
void write_metrics_files(const ResponseMatrix& matrix, const Corpus& corpus,
                         const PersonaRegistry& registry,
                         const MetricsOptions& options,
                         const std::filesystem::path& dir);

}  // namespace sim
