#include "imb/metrics.hpp"

#include <algorithm>
#include <json.hpp>
#include <numeric>

#include "imb/error.hpp"

namespace imb {

ConfusionMatrix::ConfusionMatrix(std::size_t num_classes)
    : k_(num_classes), counts_(num_classes * num_classes, 0) {}

void ConfusionMatrix::add(std::size_t truth, std::size_t pred, std::uint64_t n) {
  if (truth >= k_ || pred >= k_) throw ValidationError("confusion entry outside [0, K)");
  counts_[truth * k_ + pred] += n;
}

std::uint64_t ConfusionMatrix::total() const noexcept {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::trace() const noexcept {
  std::uint64_t t = 0;
  for (std::size_t c = 0; c < k_; ++c) t += counts_[c * k_ + c];
  return t;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t c) const {
  std::uint64_t s = 0;
  for (std::size_t j = 0; j < k_; ++j) s += at(c, j);
  return s;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t c) const {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < k_; ++i) s += at(i, c);
  return s;
}

std::uint64_t ConfusionMatrix::true_negatives(std::size_t c) const {
  return total() - row_sum(c) - col_sum(c) + at(c, c);
}

ConfusionMatrix confusion(std::span<const std::uint32_t> preds,
                          std::span<const std::uint32_t> truth, std::size_t num_classes) {
  if (preds.size() != truth.size())
    throw ValidationError("confusion: " + std::to_string(preds.size()) + " predictions vs " +
                          std::to_string(truth.size()) + " labels");
  ConfusionMatrix cm(num_classes);
  for (std::size_t i = 0; i < preds.size(); ++i) cm.add(truth[i], preds[i]);
  return cm;
}

const ClassMetrics& MetricsReport::for_class(std::size_t index) const {
  for (const auto& c : per_class)
    if (c.index == index) return c;
  throw ValidationError("no metrics for class " + std::to_string(index));
}

std::vector<std::size_t> class_display_order(const std::vector<std::string>& class_names) {
  static const std::vector<std::string> paper_order = {"pituitary", "meningioma", "glioma",
                                                       "no-tumor"};
  std::vector<std::size_t> order(class_names.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (class_names.size() != paper_order.size()) return order;
  for (std::size_t i = 0; i < paper_order.size(); ++i) {
    auto it = std::find(class_names.begin(), class_names.end(), paper_order[i]);
    if (it == class_names.end()) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      return order;
    }
    order[i] = static_cast<std::size_t>(it - class_names.begin());
  }
  return order;
}

MetricsReport report(const ConfusionMatrix& cm, const std::vector<std::string>& class_names) {
  const std::size_t k = cm.num_classes();
  std::vector<std::string> names = class_names;
  for (std::size_t c = names.size(); c < k; ++c) names.push_back("class" + std::to_string(c));
  names.resize(k);

  MetricsReport r;
  const auto total = cm.total();
  r.accuracy = total ? static_cast<double>(cm.trace()) / static_cast<double>(total) : 0.0;

  std::vector<ClassMetrics> rows(k);
  double recall_sum = 0.0;
  std::size_t recall_count = 0;
  for (std::size_t c = 0; c < k; ++c) {
    ClassMetrics& m = rows[c];
    m.name = names[c];
    m.index = c;
    const auto tp = cm.true_positives(c), fp = cm.false_positives(c), fn = cm.false_negatives(c);
    m.support = tp + fn;
    if (tp + fp > 0) {
      m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
      m.precision_defined = true;
    }
    if (tp + fn > 0) {
      m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
      m.recall_defined = true;
      recall_sum += m.recall;
      ++recall_count;
    }
    if (m.precision_defined && m.recall_defined && m.precision + m.recall > 0.0) {
      m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
      m.f1_defined = true;
    }
  }
  r.balanced_accuracy = recall_count ? recall_sum / static_cast<double>(recall_count) : 0.0;
  for (auto c : class_display_order(names)) r.per_class.push_back(rows[c]);
  return r;
}

std::string to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["accuracy"] = r.accuracy;
  j["balanced_accuracy"] = r.balanced_accuracy;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& c : r.per_class)
    rows.push_back({{"name", c.name}, {"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}});
  j["per_class"] = std::move(rows);
  return j.dump();
}

}  // namespace imb
