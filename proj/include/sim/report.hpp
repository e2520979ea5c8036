#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sim/metrics.hpp"

namespace sim {

/// Standalone SVG heatmap: one rect per cell (class "cell"), 2-decimal
/// annotations, row/column labels, absent cells hatched. Byte-deterministic.
void emit_heatmap_svg(const AgreementMatrix& am,
                      const std::filesystem::path& path);

enum class BarMode {
  Accuracy,   // values in [0,1], fixed unit axis
  Histogram,  // nonnegative counts, axis scaled to the data
};

struct BarSeries {
  std::string name;
  std::vector<double> values;  // NaN marks an absent value (no bar drawn)
};

/// Grouped bar chart with legend and axes. All series must match
/// bin_labels in length (SeriesLengthMismatch otherwise). In accuracy
/// mode an optional horizontal reference line is drawn at `baseline`.
void emit_bars_svg(const std::vector<BarSeries>& series,
                   const std::vector<std::string>& bin_labels, BarMode mode,
                   std::optional<double> baseline,
                   const std::filesystem::path& path);

/// One table row per headline, carrying every label for rendering.
/// disagreement_score = 1 - max label share among valid persona labels;
/// references are displayed but never scored.
struct ExemplarRow {
  std::string headline_id;
  std::string headline;
  BeliefLabel gold = BeliefLabel::Real;
  std::optional<BeliefLabel> human_pred;
  std::vector<std::pair<std::string, std::optional<BeliefLabel>>> labels;
  double disagreement_score = 0;
};

/// Top-k headlines by disagreement score, ties broken by corpus order.
/// Returns fewer rows when the corpus is smaller than k.
std::vector<ExemplarRow> disagreement_exemplars(const ResponseMatrix& matrix,
                                                const Corpus& corpus,
                                                std::size_t k);

struct LikertCsvRow {
  std::string name;
  std::optional<LikertHistogram> histogram;  // absent -> empty cells
};

/// Writes agreement.csv, accuracy.csv, likert.csv, exemplars.csv with
/// stable headers and column order. RFC 4180 quoting, CRLF rows.
void emit_tables_csv(const AgreementMatrix& am, const AccuracyTable& vs_gold,
                     const AccuracyTable& vs_human,
                     const std::vector<LikertCsvRow>& likert,
                     const std::vector<ExemplarRow>& exemplars,
                     const std::filesystem::path& dir);

}  // namespace sim
