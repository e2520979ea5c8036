#include "sim/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "sim/errors.hpp"

namespace sim {

namespace {

std::string fixed(double value, int decimals) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.*f", decimals, value);
  return buffer;
}

// Compact deterministic number: fixed 6 decimals with trailing zeros
// trimmed (at least one decimal kept), e.g. 0.2, 1.0, 0.333333.
std::string compact(double value) {
  std::string text = fixed(value, 6);
  std::size_t last = text.find_last_not_of('0');
  if (text[last] == '.') ++last;
  return text.substr(0, last + 1);
}

std::string xml_escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c; break;
    }
  }
  return out;
}

// White-to-blue ramp over [0,1].
std::string ramp_color(double value) {
  value = std::clamp(value, 0.0, 1.0);
  auto lerp = [&](int from, int to) {
    return static_cast<int>(std::lround(from + (to - from) * value));
  };
  std::ostringstream out;
  out << "rgb(" << lerp(247, 8) << ',' << lerp(251, 48) << ','
      << lerp(255, 107) << ')';
  return out.str();
}

void write_file(const std::string& content,
                const std::filesystem::path& path) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    fail(ErrorKind::IoFailure, "cannot write " + path.string());
  out << content;
  if (!out)
    fail(ErrorKind::IoFailure, "short write to " + path.string());
}

const char* const kPalette[] = {"#4e79a7", "#f28e2b", "#59a14f", "#e15759",
                                "#76b7b2", "#edc948", "#b07aa1", "#ff9da7"};

}  // namespace

void emit_heatmap_svg(const AgreementMatrix& am,
                      const std::filesystem::path& path) {
  std::size_t n = am.annotators.size();
  if (n == 0)
    fail(ErrorKind::BadConfig, "heatmap needs a nonempty matrix");

  const int cell = 56;
  const int left = 140, top = 140, pad = 20;
  int width = left + static_cast<int>(n) * cell + pad;
  int height = top + static_cast<int>(n) * cell + pad;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
      << height << "\">\n";
  svg << "  <defs>\n"
         "    <pattern id=\"hatch\" width=\"8\" height=\"8\" "
         "patternUnits=\"userSpaceOnUse\" patternTransform=\"rotate(45)\">\n"
         "      <rect width=\"8\" height=\"8\" fill=\"#f0f0f0\"/>\n"
         "      <line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"8\" stroke=\"#999999\" "
         "stroke-width=\"2\"/>\n"
         "    </pattern>\n"
         "  </defs>\n";
  svg << "  <rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";

  for (std::size_t j = 0; j < n; ++j) {
    int cx = left + static_cast<int>(j) * cell + cell / 2;
    svg << "  <text class=\"col-label\" x=\"" << cx << "\" y=\"" << top - 8
        << "\" text-anchor=\"start\" font-family=\"sans-serif\" "
           "font-size=\"12\" transform=\"rotate(-45 "
        << cx << ' ' << top - 8 << ")\">" << xml_escape(am.annotators[j])
        << "</text>\n";
  }
  for (std::size_t i = 0; i < n; ++i) {
    int cy = top + static_cast<int>(i) * cell + cell / 2 + 4;
    svg << "  <text class=\"row-label\" x=\"" << left - 8 << "\" y=\"" << cy
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"12\">"
        << xml_escape(am.annotators[i]) << "</text>\n";
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      int x = left + static_cast<int>(j) * cell;
      int y = top + static_cast<int>(i) * cell;
      const std::optional<double>& value = am.values[i][j];
      std::string fill = value ? ramp_color(*value) : "url(#hatch)";
      svg << "  <rect class=\"cell\" x=\"" << x << "\" y=\"" << y
          << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\""
          << fill << "\" stroke=\"white\" stroke-width=\"1\"/>\n";
      if (value) {
        std::string color = *value > 0.6 ? "#ffffff" : "#1a1a1a";
        svg << "  <text class=\"cell-value\" x=\"" << x + cell / 2
            << "\" y=\"" << y + cell / 2 + 4
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"12\" fill=\""
            << color << "\">" << fixed(*value, 2) << "</text>\n";
      }
    }
  }
  svg << "</svg>\n";
  write_file(svg.str(), path);
}

void emit_bars_svg(const std::vector<BarSeries>& series,
                   const std::vector<std::string>& bin_labels, BarMode mode,
                   std::optional<double> baseline,
                   const std::filesystem::path& path) {
  if (series.empty() || bin_labels.empty())
    fail(ErrorKind::BadConfig, "bar chart needs series and bin labels");
  for (const auto& s : series) {
    if (s.values.size() != bin_labels.size())
      fail(ErrorKind::SeriesLengthMismatch,
           "series \"" + s.name + "\" has " + std::to_string(s.values.size()) +
               " values for " + std::to_string(bin_labels.size()) + " bins");
  }

  double y_max = 1.0;
  if (mode == BarMode::Histogram) {
    y_max = 0.0;
    for (const auto& s : series)
      for (double v : s.values)
        if (!std::isnan(v)) y_max = std::max(y_max, v);
    if (y_max <= 0.0) y_max = 1.0;
  } else {
    for (const auto& s : series)
      for (double v : s.values)
        if (!std::isnan(v) && (v < 0.0 || v > 1.0))
          fail(ErrorKind::BadConfig,
               "accuracy values must lie in [0,1], got " + compact(v));
  }

  const int plot_w = 640, plot_h = 320;
  const int left = 64, top = 48, bottom = 96;
  const int right = 24 + 140;  // room for the legend
  int width = left + plot_w + right;
  int height = top + plot_h + bottom;

  std::size_t bins = bin_labels.size();
  std::size_t k = series.size();
  double group_w = static_cast<double>(plot_w) / static_cast<double>(bins);
  double bar_w = group_w * 0.8 / static_cast<double>(k);

  auto y_of = [&](double value) {
    return top + plot_h - static_cast<int>(std::lround(value / y_max * plot_h));
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
      << height << "\">\n";
  svg << "  <rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";

  // Horizontal gridlines and y tick labels at quarters of the axis.
  for (int tick = 0; tick <= 4; ++tick) {
    double value = y_max * tick / 4.0;
    int y = y_of(value);
    svg << "  <line class=\"grid\" x1=\"" << left << "\" y1=\"" << y
        << "\" x2=\"" << left + plot_w << "\" y2=\"" << y
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg << "  <text class=\"y-tick\" x=\"" << left - 8 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"12\">"
        << (mode == BarMode::Accuracy ? fixed(value, 2) : compact(value))
        << "</text>\n";
  }

  for (std::size_t b = 0; b < bins; ++b) {
    double group_x = left + group_w * static_cast<double>(b);
    for (std::size_t s = 0; s < k; ++s) {
      double v = series[s].values[b];
      if (std::isnan(v)) continue;
      double x = group_x + group_w * 0.1 + bar_w * static_cast<double>(s);
      int y = y_of(v);
      int bar_h = top + plot_h - y;
      svg << "  <rect class=\"bar\" x=\"" << fixed(x, 1) << "\" y=\"" << y
          << "\" width=\"" << fixed(bar_w, 1) << "\" height=\"" << bar_h
          << "\" fill=\"" << kPalette[s % 8] << "\"/>\n";
    }
    int lx = static_cast<int>(std::lround(group_x + group_w / 2));
    int ly = top + plot_h + 16;
    svg << "  <text class=\"x-label\" x=\"" << lx << "\" y=\"" << ly
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"12\" transform=\"rotate(-45 "
        << lx << ' ' << ly << ")\">" << xml_escape(bin_labels[b])
        << "</text>\n";
  }

  if (mode == BarMode::Accuracy && baseline) {
    int y = y_of(*baseline);
    svg << "  <line class=\"baseline\" x1=\"" << left << "\" y1=\"" << y
        << "\" x2=\"" << left + plot_w << "\" y2=\"" << y
        << "\" stroke=\"#d62728\" stroke-width=\"2\" "
           "stroke-dasharray=\"6 4\"/>\n";
    svg << "  <text class=\"baseline-label\" x=\"" << left + plot_w - 4
        << "\" y=\"" << y - 6
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"12\" fill=\"#d62728\">"
        << fixed(*baseline, 2) << "</text>\n";
  }

  // Axis frame.
  svg << "  <line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
      << "\" y2=\"" << top + plot_h
      << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  svg << "  <line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\""
      << left + plot_w << "\" y2=\"" << top + plot_h
      << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

  int legend_x = left + plot_w + 24;
  for (std::size_t s = 0; s < k; ++s) {
    int y = top + static_cast<int>(s) * 22;
    svg << "  <rect class=\"legend-swatch\" x=\"" << legend_x << "\" y=\"" << y
        << "\" width=\"14\" height=\"14\" fill=\"" << kPalette[s % 8]
        << "\"/>\n";
    svg << "  <text class=\"legend-label\" x=\"" << legend_x + 20 << "\" y=\""
        << y + 12 << "\" font-family=\"sans-serif\" font-size=\"12\">"
        << xml_escape(series[s].name) << "</text>\n";
  }

  svg << "</svg>\n";
  write_file(svg.str(), path);
}

std::vector<ExemplarRow> disagreement_exemplars(const ResponseMatrix& matrix,
                                                const Corpus& corpus,
                                                std::size_t k) {
  if (k == 0) fail(ErrorKind::BadConfig, "exemplar count must be >= 1");

  std::vector<ExemplarRow> rows;
  rows.reserve(matrix.headlines.size());
  for (const auto& headline_id : matrix.headlines) {
    const HeadlineRecord* record = corpus.find(headline_id);
    if (!record)
      fail(ErrorKind::UnknownKey,
           "matrix headline \"" + headline_id + "\" not in corpus");

    ExemplarRow row;
    row.headline_id = record->id;
    row.headline = record->headline;
    row.gold = record->gold;
    row.human_pred = record->human_pred;

    std::size_t real = 0, misinfo = 0;
    for (const auto& persona : matrix.personas) {
      const ElicitedResponse* cell = matrix.cell(persona, headline_id);
      std::optional<BeliefLabel> label = cell ? cell->belief : std::nullopt;
      row.labels.emplace_back(persona, label);
      if (!label) continue;
      (*label == BeliefLabel::Real ? real : misinfo) += 1;
    }
    std::size_t valid = real + misinfo;
    row.disagreement_score =
        valid == 0 ? 0.0
                   : 1.0 - static_cast<double>(std::max(real, misinfo)) /
                               static_cast<double>(valid);
    rows.push_back(std::move(row));
  }

  // Stable sort keeps corpus order among equal scores.
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ExemplarRow& a, const ExemplarRow& b) {
                     return a.disagreement_score > b.disagreement_score;
                   });
  if (rows.size() > k) rows.resize(k);
  return rows;
}

namespace {

std::string csv_field(const std::string& text) {
  bool needs_quotes = text.find_first_of(",\"\r\n") != std::string::npos;
  if (!needs_quotes) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  out += "\r\n";
  return out;
}

std::string label_text(const std::optional<BeliefLabel>& label) {
  return label ? to_string(*label) : "invalid";
}

}  // namespace

void emit_tables_csv(const AgreementMatrix& am, const AccuracyTable& vs_gold,
                     const AccuracyTable& vs_human,
                     const std::vector<LikertCsvRow>& likert,
                     const std::vector<ExemplarRow>& exemplars,
                     const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  {
    std::string csv;
    std::vector<std::string> header = {"annotator"};
    header.insert(header.end(), am.annotators.begin(), am.annotators.end());
    csv += csv_row(header);
    for (std::size_t i = 0; i < am.annotators.size(); ++i) {
      std::vector<std::string> row = {am.annotators[i]};
      for (const auto& value : am.values[i])
        row.push_back(value ? compact(*value) : "");
      csv += csv_row(row);
    }
    write_file(csv, dir / "agreement.csv");
  }

  {
    if (vs_gold.size() != vs_human.size())
      fail(ErrorKind::SeriesLengthMismatch,
           "accuracy tables cover different persona sets");
    std::string csv = csv_row(
        {"persona", "accuracy_vs_gold", "n_gold", "accuracy_vs_human",
         "n_human"});
    for (std::size_t i = 0; i < vs_gold.size(); ++i) {
      csv += csv_row({vs_gold[i].persona,
                      vs_gold[i].accuracy ? compact(*vs_gold[i].accuracy) : "",
                      std::to_string(vs_gold[i].n_valid),
                      vs_human[i].accuracy ? compact(*vs_human[i].accuracy)
                                           : "",
                      std::to_string(vs_human[i].n_valid)});
    }
    write_file(csv, dir / "accuracy.csv");
  }

  {
    std::string csv = csv_row({"series", "rating_1", "rating_2", "rating_3",
                               "rating_4", "rating_5", "n"});
    for (const auto& row : likert) {
      std::vector<std::string> fields = {row.name};
      if (row.histogram) {
        for (std::size_t i = 0; i < 5; ++i)
          fields.push_back(std::to_string(row.histogram->counts[i]));
        fields.push_back(std::to_string(row.histogram->n));
      } else {
        fields.insert(fields.end(), 6, "");
      }
      csv += csv_row(fields);
    }
    write_file(csv, dir / "likert.csv");
  }

  {
    std::vector<std::string> header = {"headline_id", "headline", "gold",
                                       "human_pred"};
    if (!exemplars.empty())
      for (const auto& [persona, label] : exemplars.front().labels) {
        (void)label;
        header.push_back(persona);
      }
    header.push_back("disagreement_score");

    std::string csv = csv_row(header);
    for (const auto& row : exemplars) {
      std::vector<std::string> fields = {
          row.headline_id, row.headline, to_string(row.gold),
          row.human_pred ? to_string(*row.human_pred) : ""};
      for (const auto& [persona, label] : row.labels) {
        (void)persona;
        fields.push_back(label_text(label));
      }
      fields.push_back(compact(row.disagreement_score));
      csv += csv_row(fields);
    }
    write_file(csv, dir / "exemplars.csv");
  }
}

}  // namespace sim
