#include "imb/knn.hpp"

#include <algorithm>
#include <utility>

#include "imb/error.hpp"

namespace imb {

double squared_distance(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size())
    throw ValidationError("distance between tensors of different sizes");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

std::vector<std::size_t> knn_among(std::span<const Tensor> points,
                                   std::span<const std::size_t> candidates,
                                   std::size_t query, std::size_t k) {
  if (query >= points.size()) throw ValidationError("knn query index out of range");
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(candidates.size());
  for (auto j : candidates) {
    if (j == query) continue;
    if (j >= points.size()) throw ValidationError("knn candidate index out of range");
    scored.emplace_back(squared_distance(points[query], points[j]), j);
  }
  if (k == 0 || k > scored.size())
    throw ValidationError("knn needs 0 < k <= " + std::to_string(scored.size()) +
                          " eligible neighbors, got k = " + std::to_string(k));
  const auto mid = scored.begin() + static_cast<std::ptrdiff_t>(k);
  std::partial_sort(scored.begin(), mid, scored.end());
  std::vector<std::size_t> out;
  out.reserve(k);
  for (auto it = scored.begin(); it != mid; ++it) out.push_back(it->second);
  return out;
}

std::vector<std::size_t> knn_indices(std::span<const Tensor> points,
                                     std::size_t query, std::size_t k) {
  if (k >= points.size())
    throw ValidationError("knn needs k < number of points (k = " + std::to_string(k) +
                          ", n = " + std::to_string(points.size()) + ")");
  std::vector<std::size_t> all(points.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return knn_among(points, all, query, k);
}

}  // namespace imb
