#include "imb/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "imb/error.hpp"

namespace imb {

ReportFormat report_format_from_string(const std::string& text) {
  if (text == "csv") return ReportFormat::csv;
  if (text == "md" || text == "markdown") return ReportFormat::markdown;
  throw ValidationError("unknown report format '" + text + "' (csv | md)");
}

std::string format_number(double v) {
  if (std::isnan(v)) return "-";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string approach_title(Approach a) {
  switch (a) {
    case Approach::ce: return "CE";
    case Approach::focal: return "Focal Loss";
    case Approach::augment: return "Augment CE";
    case Approach::smote: return "SMOTE CE";
    case Approach::adasyn: return "ADASYN CE";
  }
  return "?";
}

std::string class_abbreviation(const std::string& name) {
  if (name == "pituitary") return "P";
  if (name == "meningioma") return "M";
  if (name == "glioma") return "G";
  if (name == "no-tumor") return "NT";
  return name;
}

AccuracyGrid accuracy_grid(const std::vector<ResultRow>& rows) {
  AccuracyGrid g;
  for (auto m : {ModelKind::cnn_head, ModelKind::mlp_head})
    if (std::any_of(rows.begin(), rows.end(), [&](const auto& r) { return r.model == m; }))
      g.models.push_back(m);
  for (auto a : kAllApproaches)
    if (std::any_of(rows.begin(), rows.end(), [&](const auto& r) { return r.approach == a; }))
      g.approaches.push_back(a);

  g.mean_accuracy.assign(g.models.size(),
                         std::vector<double>(g.approaches.size(),
                                             std::numeric_limits<double>::quiet_NaN()));
  for (std::size_t i = 0; i < g.models.size(); ++i)
    for (std::size_t j = 0; j < g.approaches.size(); ++j) {
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& r : rows)
        if (r.model == g.models[i] && r.approach == g.approaches[j]) {
          sum += r.metrics.accuracy;
          ++n;
        }
      if (n) g.mean_accuracy[i][j] = sum / static_cast<double>(n);
    }
  return g;
}

namespace {

std::string join_row(const std::vector<std::string>& cells, ReportFormat format) {
  std::string out;
  if (format == ReportFormat::markdown) {
    out = "|";
    for (const auto& c : cells) out += " " + c + " |";
  } else {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ",";
      const bool quote = cells[i].find_first_of(",\"\n") != std::string::npos;
      if (quote) {
        out += '"';
        for (char ch : cells[i]) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        out += '"';
      } else {
        out += cells[i];
      }
    }
  }
  return out + "\n";
}

std::string separator(std::size_t columns) {
  std::string out = "|";
  for (std::size_t i = 0; i < columns; ++i) out += "---|";
  return out + "\n";
}

void require_rows(const std::vector<ResultRow>& rows) {
  if (rows.empty()) throw ValidationError("cannot render a report from zero rows");
}

}  // namespace

std::string render_accuracy_grid(const std::vector<ResultRow>& rows, ReportFormat format) {
  require_rows(rows);
  const auto g = accuracy_grid(rows);
  std::vector<std::string> header{"Model"};
  for (auto a : g.approaches) header.push_back(approach_title(a));
  std::string out = join_row(header, format);
  if (format == ReportFormat::markdown) out += separator(header.size());
  for (std::size_t i = 0; i < g.models.size(); ++i) {
    std::vector<std::string> line{to_string(g.models[i])};
    for (double v : g.mean_accuracy[i]) line.push_back(format_number(v));
    out += join_row(line, format);
  }
  return out;
}

std::string render_long_form(const std::vector<ResultRow>& rows, ReportFormat format) {
  require_rows(rows);
  std::vector<std::string> labels;
  for (const auto& c : rows.front().metrics.per_class) labels.push_back(class_abbreviation(c.name));

  std::vector<std::string> header{"model", "approach", "seed", "lr", "parameters", "accuracy",
                                  "balanced_accuracy"};
  for (const char* metric : {"precision", "recall", "f1"})
    for (const auto& l : labels) header.push_back(std::string(metric) + "_" + l);
  std::string out = join_row(header, format);
  if (format == ReportFormat::markdown) out += separator(header.size());

  for (const auto& r : rows) {
    if (r.metrics.per_class.size() != labels.size())
      throw ValidationError("rows disagree on the number of classes");
    std::vector<std::string> line{to_string(r.model), to_string(r.approach), std::to_string(r.seed),
                                  format_number(r.learning_rate), std::to_string(r.parameters),
                                  format_number(r.metrics.accuracy),
                                  format_number(r.metrics.balanced_accuracy)};
    for (const auto& c : r.metrics.per_class) line.push_back(format_number(c.precision));
    for (const auto& c : r.metrics.per_class) line.push_back(format_number(c.recall));
    for (const auto& c : r.metrics.per_class) line.push_back(format_number(c.f1));
    out += join_row(line, format);
  }
  return out;
}

std::string render_report(const std::vector<ResultRow>& rows, ReportFormat format) {
  require_rows(rows);
  if (format == ReportFormat::csv)
    return render_accuracy_grid(rows, format) + "\n" + render_long_form(rows, format);
  return "## Test accuracy (mean over seeds)\n\n" + render_accuracy_grid(rows, format) +
         "\n## Per-class metrics\n\n" + render_long_form(rows, format);
}

}  // namespace imb
