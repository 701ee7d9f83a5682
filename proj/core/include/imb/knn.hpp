#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "imb/tensor.hpp"

namespace imb {

/// Exact brute-force k nearest neighbors of points[query] by Euclidean
/// distance, excluding the query itself. Ties go to the lower index.
/// Result is ordered nearest first. Requires k < points.size().
std::vector<std::size_t> knn_indices(std::span<const Tensor> points,
                                     std::size_t query, std::size_t k);

/// Same search restricted to `candidates` (indices into points). The query
/// is skipped if it appears among the candidates. Requires k not larger
/// than the number of eligible candidates.
std::vector<std::size_t> knn_among(std::span<const Tensor> points,
                                   std::span<const std::size_t> candidates,
                                   std::size_t query, std::size_t k);

double squared_distance(const Tensor& a, const Tensor& b);

}  // namespace imb
