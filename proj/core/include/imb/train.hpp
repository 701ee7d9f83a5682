#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "imb/adam.hpp"
#include "imb/dataset.hpp"
#include "imb/loss.hpp"
#include "imb/model.hpp"

namespace imb {

enum class LossKind { cross_entropy, focal };

struct TrainConfig {
  std::size_t batch_size = 20;
  std::size_t epochs = 8;
  double learning_rate = 1e-3;
  bool shuffle = true;
  AdamConfig adam;
  LossKind loss = LossKind::cross_entropy;
  FocalParams focal;
  std::uint64_t seed = 0;
};

struct History {
  std::vector<double> epoch_loss;      // sample-weighted mean loss per epoch
  std::vector<double> epoch_accuracy;  // training accuracy seen during the epoch

  friend bool operator==(const History&, const History&) = default;
};

std::size_t steps_per_epoch(std::size_t train_size, std::size_t batch_size);

/// Mini-batch Adam on `model` in place: epochs * ceil(n / batch) steps,
/// reshuffling each epoch from make_rng(cfg.seed).derive("shuffle") when
/// cfg.shuffle is set.
History train(Model& model, const Dataset& data, const TrainConfig& cfg);

/// Loss and gradient for one batch under the configured loss.
LossValue batch_loss(const Tensor& logits, std::span<const std::uint32_t> labels,
                     const TrainConfig& cfg);

/// Argmax predictions, evaluated in batches of `batch_size`.
std::vector<std::uint32_t> predict(const Model& model, const Dataset& data,
                                   std::size_t batch_size = 64);

}  // namespace imb
