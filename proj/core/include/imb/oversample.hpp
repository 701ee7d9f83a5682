#pragma once

#include <cstddef>
#include <vector>

#include "imb/augment.hpp"
#include "imb/dataset.hpp"
#include "imb/resample_log.hpp"
#include "imb/rng.hpp"

namespace imb {

struct SmoteParams {
  std::size_t k = 5;
};

struct AdasynParams {
  std::size_t k = 5;
  /// Fraction of each class's gap to the majority that gets filled.
  double beta = 1.0;
  /// Jitter standard deviation per feature, as a multiple of the class's
  /// feature standard deviation.
  double jitter_scale = 0.01;
};

/// Balances every class to the majority count by interpolating a random
/// class member toward one of its k nearest same-class neighbors with
/// lambda ~ U[0, 1). Classes that need samples must have more than k
/// members.
Resampled smote(const Dataset& ds, const SmoteParams& p, RngStream& stream);

/// Adaptive synthetic sampling. For each non-majority class c, member i gets
/// weight r_i = (# of its k nearest neighbors, over all classes, outside c) / k.
/// G = round(beta * (N_majority - N_c)) samples are split in proportion to
/// r_i by largest-remainder rounding, each an interpolation toward a random
/// same-class neighbor plus Gaussian jitter. A class with sum(r) == 0 is
/// allocated uniformly and logged as adasyn_uniform.
Resampled adasyn(const Dataset& ds, const AdasynParams& p, RngStream& stream);

/// Per-member neighbor ratios r_i for class c, in class member order.
std::vector<double> adasyn_ratios(const Dataset& ds, std::uint32_t cls, std::size_t k);

/// Hamilton apportionment: floor of each quota total * w_i / sum(w), then
/// leftover units to the largest fractional remainders (ties to the lower
/// index). All weights equal to zero means uniform weights.
std::vector<std::size_t> largest_remainder(const std::vector<double>& weights,
                                           std::size_t total);

/// x = parent + lambda * (neighbor - parent), plus jitter when given.
Tensor interpolate(const Tensor& parent, const Tensor& neighbor, double lambda,
                   const std::vector<double>* jitter = nullptr);

/// Rebuilds the resampled dataset from the original and its log: originals
/// first, then one synthetic sample per log entry, in order.
Dataset replay(const Dataset& original, const ResampleLog& log);

}  // namespace imb
