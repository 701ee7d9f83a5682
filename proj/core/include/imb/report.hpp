#pragma once

#include <string>
#include <vector>

#include "imb/experiment.hpp"

namespace imb {

enum class ReportFormat { csv, markdown };

ReportFormat report_format_from_string(const std::string& text);

/// Mean test accuracy per (model, approach) over seeds. Models and
/// approaches keep their canonical order; absent cells are NaN.
struct AccuracyGrid {
  std::vector<ModelKind> models;
  std::vector<Approach> approaches;
  std::vector<std::vector<double>> mean_accuracy;  // [model][approach]
};

AccuracyGrid accuracy_grid(const std::vector<ResultRow>& rows);

/// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

/// Column header used for an approach in the accuracy grid.
std::string approach_title(Approach a);

/// Short class label: P, M, G, NT for the tumor classes, the name otherwise.
std::string class_abbreviation(const std::string& name);

/// markdown: accuracy grid (models x approaches) followed by a long-form
/// per-class table. csv: the accuracy grid, a blank line, then the
/// long-form table. Throws ValidationError on empty input.
std::string render_report(const std::vector<ResultRow>& rows, ReportFormat format);

/// Long-form table alone: one line per row with precision, recall and F1
/// per class in display order.
std::string render_long_form(const std::vector<ResultRow>& rows, ReportFormat format);

std::string render_accuracy_grid(const std::vector<ResultRow>& rows, ReportFormat format);

}  // namespace imb
