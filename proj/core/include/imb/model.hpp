#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "imb/rng.hpp"
#include "imb/tensor.hpp"

namespace imb {

enum class LayerKind { conv2d, maxpool, flatten, dense };
enum class Activation { none, relu, softmax };

std::string to_string(LayerKind kind);
std::string to_string(Activation act);
LayerKind layer_kind_from_string(const std::string& text);
Activation activation_from_string(const std::string& text);

/// conv2d: 3x3 kernel, valid padding, stride 1, `units` output channels.
/// maxpool: 2x2 window, stride 2, floor on odd sides.
/// dense: `units` outputs.
/// A softmax activation marks the output layer; forward() still returns
/// logits and the loss applies the softmax.
struct LayerSpec {
  LayerKind kind = LayerKind::dense;
  std::size_t units = 0;
  Activation activation = Activation::none;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Sequential network over NHWC images or flat vectors. Conv weights are
/// (3, 3, C_in, C_out), dense weights (in, out); each layer with weights
/// owns a (weight, bias) pair in params().
class Model {
 public:
  Model() = default;

  /// Weights He-uniform from init.derive("init"), biases zero.
  Model(Shape input_shape, std::vector<LayerSpec> layers, const RngStream& init);

  const Shape& input_shape() const noexcept { return input_shape_; }
  const std::vector<LayerSpec>& layers() const noexcept { return layers_; }
  std::size_t num_classes() const;

  std::vector<Tensor>& params() noexcept { return params_; }
  const std::vector<Tensor>& params() const noexcept { return params_; }
  std::size_t parameter_count() const;

  /// Per-sample output shape after each layer.
  std::vector<Shape> layer_output_shapes() const;

  /// True when a sample of this shape can be fed, either exactly or
  /// flattened into a vector input of equal size.
  bool accepts(const Shape& sample_shape) const;

  /// Batch is (n, input_shape...) or, for vector inputs, any (n, ...) with
  /// matching per-sample size. Returns (n, K) logits.
  Tensor forward(const Tensor& batch) const;

  /// forward() that keeps the activations needed by backward().
  Tensor forward_train(const Tensor& batch);

  /// Parameter gradients (congruent with params()) of sum_b <dlogits_b, logits_b>.
  /// Requires a preceding forward_train(); throws std::logic_error otherwise.
  std::vector<Tensor> backward(const Tensor& dlogits);

  void clear_cache() noexcept { cache_.reset(); }

  /// Replace all parameters; shapes must match.
  void set_params(std::vector<Tensor> params);

 private:
  struct Cache {
    std::vector<Tensor> outputs;  // outputs[0] = input, outputs[i+1] = layer i output
    std::vector<std::vector<std::size_t>> argmax;  // per pool layer
  };

  Tensor run(const Tensor& batch, Cache* cache) const;
  Tensor prepare_input(const Tensor& batch) const;
  void check_layers() const;

  Shape input_shape_;
  std::vector<LayerSpec> layers_;
  std::vector<Tensor> params_;
  std::vector<std::optional<std::size_t>> param_slot_;  // per layer, index of weight in params_
  std::optional<Cache> cache_;
};

/// Conv32 > Pool > Conv64 > Pool > Conv32 > Flatten > Dense16+ReLU >
/// DenseK+Softmax, ReLU after each conv. Needs side >= 18.
Model build_cnn_head(std::size_t side, std::size_t channels, std::size_t num_classes,
                     const RngStream& init);

/// Dense16+ReLU > DenseK+Softmax over d-dimensional inputs.
Model build_mlp_head(std::size_t dimension, std::size_t num_classes, const RngStream& init);

inline constexpr std::size_t kMinCnnSide = 18;

/// Valid 3x3 conv output side.
constexpr std::size_t conv_out(std::size_t side) { return side >= 3 ? side - 2 : 0; }
/// 2x2 stride-2 pool output side.
constexpr std::size_t pool_out(std::size_t side) { return side / 2; }

/// Argmax of each logit row, ties to the lower class index.
std::vector<std::uint32_t> argmax_rows(const Tensor& logits);

}  // namespace imb
