#include "imb/model.hpp"

#include <cmath>
#include <stdexcept>

#include "imb/error.hpp"

namespace imb {

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::maxpool: return "maxpool";
    case LayerKind::flatten: return "flatten";
    case LayerKind::dense: return "dense";
  }
  return "?";
}

std::string to_string(Activation act) {
  switch (act) {
    case Activation::none: return "none";
    case Activation::relu: return "relu";
    case Activation::softmax: return "softmax";
  }
  return "?";
}

LayerKind layer_kind_from_string(const std::string& text) {
  if (text == "conv2d") return LayerKind::conv2d;
  if (text == "maxpool") return LayerKind::maxpool;
  if (text == "flatten") return LayerKind::flatten;
  if (text == "dense") return LayerKind::dense;
  throw ValidationError("unknown layer kind '" + text + "'");
}

Activation activation_from_string(const std::string& text) {
  if (text == "none") return Activation::none;
  if (text == "relu") return Activation::relu;
  if (text == "softmax") return Activation::softmax;
  throw ValidationError("unknown activation '" + text + "'");
}

namespace {

Shape next_shape(const Shape& in, const LayerSpec& layer) {
  switch (layer.kind) {
    case LayerKind::conv2d:
      if (in.size() != 3 || in[0] < 3 || in[1] < 3)
        throw ValidationError("conv2d needs an (H>=3, W>=3, C) input, got " +
                              shape_to_string(in));
      if (layer.units == 0) throw ValidationError("conv2d needs at least one filter");
      return {in[0] - 2, in[1] - 2, layer.units};
    case LayerKind::maxpool:
      if (in.size() != 3 || in[0] < 2 || in[1] < 2)
        throw ValidationError("maxpool needs an (H>=2, W>=2, C) input, got " +
                              shape_to_string(in));
      return {in[0] / 2, in[1] / 2, in[2]};
    case LayerKind::flatten:
      return {shape_size(in)};
    case LayerKind::dense:
      if (in.size() != 1) throw ValidationError("dense needs a flat input, got " + shape_to_string(in));
      if (layer.units == 0) throw ValidationError("dense needs at least one unit");
      return {layer.units};
  }
  throw ValidationError("bad layer kind");
}

void apply_relu(Tensor& t) {
  for (auto& v : t.values())
    if (v < 0.0) v = 0.0;
}

}  // namespace

Model::Model(Shape input_shape, std::vector<LayerSpec> layers, const RngStream& init)
    : input_shape_(std::move(input_shape)), layers_(std::move(layers)) {
  if (input_shape_.empty()) throw ValidationError("model input shape is empty");
  check_layers();
  RngStream rng = init.derive("init");
  Shape shape = input_shape_;
  param_slot_.assign(layers_.size(), std::nullopt);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& layer = layers_[i];
    if (layer.kind == LayerKind::conv2d || layer.kind == LayerKind::dense) {
      Shape wshape = layer.kind == LayerKind::conv2d
                         ? Shape{3, 3, shape[2], layer.units}
                         : Shape{shape[0], layer.units};
      const std::size_t fan_in = shape_size(wshape) / layer.units;
      const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
      Tensor w(wshape);
      for (auto& v : w.values()) v = rng.uniform(-limit, limit);
      param_slot_[i] = params_.size();
      params_.push_back(std::move(w));
      params_.emplace_back(Shape{layer.units});
    }
    shape = next_shape(shape, layer);
  }
}

void Model::check_layers() const {
  if (layers_.empty()) throw ValidationError("model has no layers");
  if (layers_.back().kind != LayerKind::dense)
    throw ValidationError("the last layer must be dense");
  for (std::size_t i = 0; i + 1 < layers_.size(); ++i)
    if (layers_[i].activation == Activation::softmax)
      throw ValidationError("softmax is only allowed on the output layer");
  if (layers_.back().activation == Activation::relu)
    throw ValidationError("the output layer produces logits; relu is not allowed there");
  Shape shape = input_shape_;
  for (const auto& layer : layers_) shape = next_shape(shape, layer);
}

std::size_t Model::num_classes() const { return layers_.back().units; }

std::size_t Model::parameter_count() const {
  std::size_t total = 0;
  for (const auto& p : params_) total += p.size();
  return total;
}

std::vector<Shape> Model::layer_output_shapes() const {
  std::vector<Shape> out;
  Shape shape = input_shape_;
  for (const auto& layer : layers_) {
    shape = next_shape(shape, layer);
    out.push_back(shape);
  }
  return out;
}

bool Model::accepts(const Shape& sample_shape) const {
  if (sample_shape == input_shape_) return true;
  return input_shape_.size() == 1 && !sample_shape.empty() &&
         shape_size(sample_shape) == input_shape_[0];
}

void Model::set_params(std::vector<Tensor> params) {
  if (params.size() != params_.size())
    throw ValidationError("parameter list length does not match the model");
  for (std::size_t i = 0; i < params.size(); ++i)
    if (params[i].shape() != params_[i].shape())
      throw ValidationError("parameter " + std::to_string(i) + " has shape " +
                            shape_to_string(params[i].shape()) + ", expected " +
                            shape_to_string(params_[i].shape()));
  params_ = std::move(params);
  cache_.reset();
}

Tensor Model::prepare_input(const Tensor& batch) const {
  if (batch.rank() < 2) throw ValidationError("batch needs a leading batch dimension");
  const Shape sample(batch.shape().begin() + 1, batch.shape().end());
  if (sample == input_shape_) return batch;
  if (accepts(sample)) return batch.reshaped({batch.dim(0), input_shape_[0]});
  throw ValidationError("batch sample shape " + shape_to_string(sample) +
                        " does not match model input " + shape_to_string(input_shape_));
}

Tensor Model::forward(const Tensor& batch) const { return run(batch, nullptr); }

Tensor Model::forward_train(const Tensor& batch) {
  Cache cache;
  Tensor out = run(batch, &cache);
  cache_ = std::move(cache);
  return out;
}

Tensor Model::run(const Tensor& batch, Cache* cache) const {
  Tensor x = prepare_input(batch);
  const std::size_t n = x.dim(0);
  if (cache) {
    cache->outputs.clear();
    cache->argmax.assign(layers_.size(), {});
    cache->outputs.push_back(x);
  }

  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const auto& layer = layers_[li];
    Tensor y;
    switch (layer.kind) {
      case LayerKind::conv2d: {
        const Tensor& w = params_[*param_slot_[li]];
        const Tensor& bias = params_[*param_slot_[li] + 1];
        const std::size_t h = x.dim(1), wd = x.dim(2), c = x.dim(3);
        const std::size_t ho = h - 2, wo = wd - 2, co = layer.units;
        y = Tensor({n, ho, wo, co});
        const double* xp = x.data();
        const double* wp = w.data();
        double* yp = y.data();
        for (std::size_t b = 0; b < n; ++b)
          for (std::size_t oy = 0; oy < ho; ++oy)
            for (std::size_t ox = 0; ox < wo; ++ox) {
              double* o = yp + ((b * ho + oy) * wo + ox) * co;
              for (std::size_t k = 0; k < co; ++k) o[k] = bias[k];
              for (std::size_t ky = 0; ky < 3; ++ky)
                for (std::size_t kx = 0; kx < 3; ++kx) {
                  const double* xin = xp + ((b * h + oy + ky) * wd + ox + kx) * c;
                  const double* wrow = wp + (ky * 3 + kx) * c * co;
                  for (std::size_t ci = 0; ci < c; ++ci) {
                    const double xv = xin[ci];
                    const double* wr = wrow + ci * co;
                    for (std::size_t k = 0; k < co; ++k) o[k] += xv * wr[k];
                  }
                }
            }
        break;
      }
      case LayerKind::maxpool: {
        const std::size_t h = x.dim(1), wd = x.dim(2), c = x.dim(3);
        const std::size_t ho = h / 2, wo = wd / 2;
        y = Tensor({n, ho, wo, c});
        std::vector<std::size_t> arg(y.size());
        for (std::size_t b = 0; b < n; ++b)
          for (std::size_t oy = 0; oy < ho; ++oy)
            for (std::size_t ox = 0; ox < wo; ++ox)
              for (std::size_t ch = 0; ch < c; ++ch) {
                std::size_t best = ((b * h + 2 * oy) * wd + 2 * ox) * c + ch;
                for (std::size_t dy = 0; dy < 2; ++dy)
                  for (std::size_t dx = 0; dx < 2; ++dx) {
                    const std::size_t idx = ((b * h + 2 * oy + dy) * wd + 2 * ox + dx) * c + ch;
                    if (x[idx] > x[best]) best = idx;
                  }
                const std::size_t out_idx = ((b * ho + oy) * wo + ox) * c + ch;
                y[out_idx] = x[best];
                arg[out_idx] = best;
              }
        if (cache) cache->argmax[li] = std::move(arg);
        break;
      }
      case LayerKind::flatten:
        y = x.reshaped({n, x.size() / n});
        break;
      case LayerKind::dense: {
        const Tensor& w = params_[*param_slot_[li]];
        const Tensor& bias = params_[*param_slot_[li] + 1];
        const std::size_t d = x.dim(1), u = layer.units;
        y = Tensor({n, u});
        for (std::size_t b = 0; b < n; ++b) {
          double* o = y.data() + b * u;
          for (std::size_t k = 0; k < u; ++k) o[k] = bias[k];
          const double* xin = x.data() + b * d;
          for (std::size_t i = 0; i < d; ++i) {
            const double xv = xin[i];
            const double* wr = w.data() + i * u;
            for (std::size_t k = 0; k < u; ++k) o[k] += xv * wr[k];
          }
        }
        break;
      }
    }
    if (layer.activation == Activation::relu) apply_relu(y);
    if (cache) cache->outputs.push_back(y);
    x = std::move(y);
  }
  return x;
}

std::vector<Tensor> Model::backward(const Tensor& dlogits) {
  if (!cache_) throw std::logic_error("backward() called without a cached forward_train()");
  const Cache& cache = *cache_;
  const Tensor& logits = cache.outputs.back();
  if (dlogits.shape() != logits.shape())
    throw ValidationError("upstream gradient shape " + shape_to_string(dlogits.shape()) +
                          " does not match logits " + shape_to_string(logits.shape()));

  std::vector<Tensor> grads;
  grads.reserve(params_.size());
  for (const auto& p : params_) grads.push_back(Tensor::zeros_like(p));

  Tensor g = dlogits;
  const std::size_t n = g.dim(0);
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const auto& layer = layers_[li];
    const Tensor& x = cache.outputs[li];
    const Tensor& y = cache.outputs[li + 1];
    if (layer.activation == Activation::relu)
      for (std::size_t i = 0; i < g.size(); ++i)
        if (!(y[i] > 0.0)) g[i] = 0.0;
    const bool need_input_grad = li > 0;

    switch (layer.kind) {
      case LayerKind::dense: {
        const Tensor& w = params_[*param_slot_[li]];
        Tensor& dw = grads[*param_slot_[li]];
        Tensor& db = grads[*param_slot_[li] + 1];
        const std::size_t d = x.dim(1), u = layer.units;
        Tensor dx = need_input_grad ? Tensor({n, d}) : Tensor();
        for (std::size_t b = 0; b < n; ++b) {
          const double* gb = g.data() + b * u;
          const double* xb = x.data() + b * d;
          for (std::size_t k = 0; k < u; ++k) db[k] += gb[k];
          for (std::size_t i = 0; i < d; ++i) {
            double* dwr = dw.data() + i * u;
            const double* wr = w.data() + i * u;
            const double xv = xb[i];
            double acc = 0.0;
            for (std::size_t k = 0; k < u; ++k) {
              dwr[k] += xv * gb[k];
              acc += wr[k] * gb[k];
            }
            if (need_input_grad) dx[b * d + i] = acc;
          }
        }
        g = std::move(dx);
        break;
      }
      case LayerKind::flatten:
        if (need_input_grad) g = g.reshaped(x.shape());
        break;
      case LayerKind::maxpool: {
        if (!need_input_grad) break;
        Tensor dx(x.shape());
        const auto& arg = cache.argmax[li];
        for (std::size_t i = 0; i < g.size(); ++i) dx[arg[i]] += g[i];
        g = std::move(dx);
        break;
      }
      case LayerKind::conv2d: {
        const Tensor& w = params_[*param_slot_[li]];
        Tensor& dw = grads[*param_slot_[li]];
        Tensor& db = grads[*param_slot_[li] + 1];
        const std::size_t h = x.dim(1), wd = x.dim(2), c = x.dim(3);
        const std::size_t ho = h - 2, wo = wd - 2, co = layer.units;
        Tensor dx = need_input_grad ? Tensor(x.shape()) : Tensor();
        for (std::size_t b = 0; b < n; ++b)
          for (std::size_t oy = 0; oy < ho; ++oy)
            for (std::size_t ox = 0; ox < wo; ++ox) {
              const double* go = g.data() + ((b * ho + oy) * wo + ox) * co;
              for (std::size_t k = 0; k < co; ++k) db[k] += go[k];
              for (std::size_t ky = 0; ky < 3; ++ky)
                for (std::size_t kx = 0; kx < 3; ++kx) {
                  const std::size_t in_base = ((b * h + oy + ky) * wd + ox + kx) * c;
                  const double* xin = x.data() + in_base;
                  const std::size_t w_base = (ky * 3 + kx) * c * co;
                  for (std::size_t ci = 0; ci < c; ++ci) {
                    const double xv = xin[ci];
                    double* dwr = dw.data() + w_base + ci * co;
                    const double* wr = w.data() + w_base + ci * co;
                    double acc = 0.0;
                    for (std::size_t k = 0; k < co; ++k) {
                      dwr[k] += xv * go[k];
                      acc += wr[k] * go[k];
                    }
                    if (need_input_grad) dx[in_base + ci] += acc;
                  }
                }
            }
        g = std::move(dx);
        break;
      }
    }
  }
  return grads;
}

Model build_cnn_head(std::size_t side, std::size_t channels, std::size_t num_classes,
                     const RngStream& init) {
  if (side < kMinCnnSide)
    throw ValidationError("cnn head needs input side >= " + std::to_string(kMinCnnSide) +
                          ", got " + std::to_string(side));
  if (channels == 0 || num_classes < 2)
    throw ValidationError("cnn head needs channels >= 1 and at least 2 classes");
  return Model({side, side, channels},
               {
                   {LayerKind::conv2d, 32, Activation::relu},
                   {LayerKind::maxpool, 0, Activation::none},
                   {LayerKind::conv2d, 64, Activation::relu},
                   {LayerKind::maxpool, 0, Activation::none},
                   {LayerKind::conv2d, 32, Activation::relu},
                   {LayerKind::flatten, 0, Activation::none},
                   {LayerKind::dense, 16, Activation::relu},
                   {LayerKind::dense, num_classes, Activation::softmax},
               },
               init);
}

Model build_mlp_head(std::size_t dimension, std::size_t num_classes, const RngStream& init) {
  if (dimension == 0) throw ValidationError("mlp head needs input dimension >= 1");
  if (num_classes < 2) throw ValidationError("mlp head needs at least 2 classes");
  return Model({dimension},
               {
                   {LayerKind::dense, 16, Activation::relu},
                   {LayerKind::dense, num_classes, Activation::softmax},
               },
               init);
}

std::vector<std::uint32_t> argmax_rows(const Tensor& logits) {
  if (logits.rank() != 2) throw ValidationError("argmax_rows expects (batch, classes)");
  const std::size_t k = logits.dim(1);
  std::vector<std::uint32_t> out(logits.dim(0));
  for (std::size_t b = 0; b < out.size(); ++b) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < k; ++j)
      if (logits[b * k + j] > logits[b * k + best]) best = j;
    out[b] = static_cast<std::uint32_t>(best);
  }
  return out;
}

}  // namespace imb
