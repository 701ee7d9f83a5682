#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace imb {

/// K x K counts, rows are true classes and columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t num_classes = 0);

  std::size_t num_classes() const noexcept { return k_; }
  std::uint64_t at(std::size_t truth, std::size_t pred) const { return counts_.at(truth * k_ + pred); }
  void add(std::size_t truth, std::size_t pred, std::uint64_t n = 1);

  std::uint64_t total() const noexcept;
  std::uint64_t trace() const noexcept;
  std::uint64_t row_sum(std::size_t c) const;
  std::uint64_t col_sum(std::size_t c) const;

  // One-vs-rest reduction for class c.
  std::uint64_t true_positives(std::size_t c) const { return at(c, c); }
  std::uint64_t false_positives(std::size_t c) const { return col_sum(c) - at(c, c); }
  std::uint64_t false_negatives(std::size_t c) const { return row_sum(c) - at(c, c); }
  std::uint64_t true_negatives(std::size_t c) const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t k_ = 0;
  std::vector<std::uint64_t> counts_;
};

/// Throws ValidationError on length mismatch or labels outside [0, K).
ConfusionMatrix confusion(std::span<const std::uint32_t> preds,
                          std::span<const std::uint32_t> truth, std::size_t num_classes);

struct ClassMetrics {
  std::string name;
  std::size_t index = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
  // A metric whose denominator is zero is reported as 0 with its flag false.
  bool precision_defined = false;
  bool recall_defined = false;
  bool f1_defined = false;

  friend bool operator==(const ClassMetrics&, const ClassMetrics&) = default;
};

struct MetricsReport {
  double accuracy = 0.0;           // trace / total
  double balanced_accuracy = 0.0;  // mean recall over classes present in the truth
  std::vector<ClassMetrics> per_class;

  const ClassMetrics& for_class(std::size_t index) const;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Per-class rows come out in the order pituitary, meningioma, glioma,
/// no-tumor when the class names are exactly that set, else index order.
/// Missing names become class<i>.
MetricsReport report(const ConfusionMatrix& cm, const std::vector<std::string>& class_names = {});

/// {"accuracy", "balanced_accuracy", "per_class": [{"name", "precision", "recall", "f1"}]}
std::string to_json(const MetricsReport& r);

/// Display order of class indices for a set of names (see report()).
std::vector<std::size_t> class_display_order(const std::vector<std::string>& class_names);

}  // namespace imb
