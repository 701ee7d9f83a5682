#include "imb/train.hpp"

#include <algorithm>
#include <numeric>

#include "imb/error.hpp"

namespace imb {

std::size_t steps_per_epoch(std::size_t train_size, std::size_t batch_size) {
  if (batch_size == 0) throw ValidationError("batch size must be positive");
  return (train_size + batch_size - 1) / batch_size;
}

LossValue batch_loss(const Tensor& logits, std::span<const std::uint32_t> labels,
                     const TrainConfig& cfg) {
  return cfg.loss == LossKind::focal ? focal(logits, labels, cfg.focal)
                                     : cross_entropy(logits, labels);
}

History train(Model& model, const Dataset& data, const TrainConfig& cfg) {
  if (data.size() == 0) throw ValidationError("cannot train on an empty dataset");
  if (!model.accepts(data.sample_shape()))
    throw ValidationError("dataset sample shape " + shape_to_string(data.sample_shape()) +
                          " does not fit model input " + shape_to_string(model.input_shape()));
  if (data.num_classes() != model.num_classes())
    throw ValidationError("dataset has " + std::to_string(data.num_classes()) +
                          " classes, model outputs " + std::to_string(model.num_classes()));
  if (cfg.batch_size == 0) throw ValidationError("batch size must be positive");
  if (!(cfg.learning_rate >= 0.0)) throw ValidationError("learning rate must be >= 0");

  RngStream shuffle_rng = make_rng(cfg.seed).derive("shuffle");
  AdamState state;
  History history;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t steps = steps_per_epoch(data.size(), cfg.batch_size);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle)
      for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[shuffle_rng.uniform_index(i)]);

    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t s = 0; s < steps; ++s) {
      const std::size_t begin = s * cfg.batch_size;
      const std::size_t end = std::min(begin + cfg.batch_size, order.size());
      const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                         order.begin() + static_cast<std::ptrdiff_t>(end));
      std::vector<std::uint32_t> labels;
      labels.reserve(idx.size());
      for (auto i : idx) labels.push_back(data.labels[i]);

      const Tensor logits = model.forward_train(stack_batch(data, idx));
      const LossValue lv = batch_loss(logits, labels, cfg);
      const auto grads = model.backward(lv.grad);
      adam_step(model.params(), grads, state, cfg.learning_rate, cfg.adam);

      loss_sum += lv.loss * static_cast<double>(idx.size());
      const auto pred = argmax_rows(logits);
      for (std::size_t b = 0; b < pred.size(); ++b) correct += pred[b] == labels[b];
    }
    model.clear_cache();
    history.epoch_loss.push_back(loss_sum / static_cast<double>(data.size()));
    history.epoch_accuracy.push_back(static_cast<double>(correct) /
                                     static_cast<double>(data.size()));
  }
  return history;
}

std::vector<std::uint32_t> predict(const Model& model, const Dataset& data,
                                   std::size_t batch_size) {
  if (batch_size == 0) throw ValidationError("batch size must be positive");
  std::vector<std::uint32_t> out;
  out.reserve(data.size());
  for (std::size_t begin = 0; begin < data.size(); begin += batch_size) {
    const std::size_t end = std::min(begin + batch_size, data.size());
    std::vector<std::size_t> idx(end - begin);
    std::iota(idx.begin(), idx.end(), begin);
    const auto pred = argmax_rows(model.forward(stack_batch(data, idx)));
    out.insert(out.end(), pred.begin(), pred.end());
  }
  return out;
}

}  // namespace imb
