#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "imb/tensor.hpp"

namespace imb {

/// Mean loss over the batch and its gradient with respect to the logits.
struct LossValue {
  double loss = 0.0;
  Tensor grad;
};

struct FocalParams {
  double gamma = 2.0;
  /// Per-class weights alpha_t; empty means all ones.
  std::vector<double> alpha;
};

/// Probabilities are never evaluated below this inside a log.
inline constexpr double kMinProbability = 1e-12;

/// Max-shifted softmax of one row.
std::vector<double> softmax(std::span<const double> logits);

/// Row-wise softmax of a (B, K) tensor.
Tensor softmax_rows(const Tensor& logits);

/// Mean of -log p_y; gradient (p - onehot(y)) / B.
LossValue cross_entropy(const Tensor& logits, std::span<const std::uint32_t> labels);

/// Mean of -alpha_y (1 - p_y)^gamma log p_y, p_y the softmax probability of
/// the true class. gamma = 0 with unit alpha is cross-entropy.
LossValue focal(const Tensor& logits, std::span<const std::uint32_t> labels,
                const FocalParams& params);

/// Per-sample focal loss for a given true-class probability.
double focal_term(double p_true, double gamma, double alpha = 1.0);

}  // namespace imb
