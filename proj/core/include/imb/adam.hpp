#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "imb/tensor.hpp"

namespace imb {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moment estimates, one tensor per parameter, plus the step
/// counter. Lazily sized on the first step.
struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::uint64_t step = 0;
};

/// One bias-corrected Adam update: p -= lr * m_hat / (sqrt(v_hat) + eps).
void adam_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state,
               double learning_rate, const AdamConfig& cfg = {});

}  // namespace imb
