#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace imb {

/// Provenance of one synthetic sample. Parent and neighbor index the
/// original (pre-resampling) dataset.
///
/// method values:
///   smote, adasyn, adasyn_uniform   x = parent + lambda * (neighbor - parent) [+ jitter]
///   augment_brightness | augment_contrast | augment_sharpness
///                                   x = transform(parent) with intensity lambda
///   jitter                          x = parent + jitter
/// adasyn_uniform marks samples of a class whose neighbor ratios all vanished
/// and fell back to uniform allocation.
struct ResampleEntry {
  std::string method;
  std::uint32_t cls = 0;
  std::size_t parent = 0;
  std::optional<std::size_t> neighbor;
  double lambda = 0.0;
  std::optional<std::vector<double>> jitter;

  friend bool operator==(const ResampleEntry&, const ResampleEntry&) = default;
};

struct ResampleLog {
  std::vector<ResampleEntry> entries;

  std::size_t size() const noexcept { return entries.size(); }
  bool empty() const noexcept { return entries.empty(); }

  friend bool operator==(const ResampleLog&, const ResampleLog&) = default;
};

/// One JSON object per line, keys in the order
/// method, class, parent, neighbor, lambda, jitter (absent values are null).
/// Doubles round-trip exactly.
std::string to_jsonl(const ResampleLog& log);
ResampleLog log_from_jsonl(const std::string& text);

}  // namespace imb
