#include "imb/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numbers>

#include "imb/error.hpp"

namespace imb {

std::string to_string(DataKind kind) {
  return kind == DataKind::image ? "image" : "embedding";
}

DataKind data_kind_from_string(const std::string& text) {
  if (text == "image") return DataKind::image;
  if (text == "embedding") return DataKind::embedding;
  throw ValidationError("unknown dataset kind '" + text + "'");
}

Shape Dataset::sample_shape() const {
  return samples.empty() ? Shape{} : samples.front().shape();
}

void Dataset::validate() const {
  if (samples.size() != labels.size())
    throw ValidationError("dataset has " + std::to_string(samples.size()) +
                          " samples but " + std::to_string(labels.size()) +
                          " labels");
  if (class_names.empty()) throw ValidationError("dataset has no class names");
  const auto shape = sample_shape();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].shape() != shape)
      throw ValidationError("sample " + std::to_string(i) + " has shape " +
                            shape_to_string(samples[i].shape()) + ", expected " +
                            shape_to_string(shape));
    if (labels[i] >= class_names.size())
      throw ValidationError("label " + std::to_string(labels[i]) +
                            " out of range for " +
                            std::to_string(class_names.size()) + " classes");
  }
  if (!samples.empty()) {
    const bool image_shape = shape.size() == 3;
    if ((kind == DataKind::image) != image_shape)
      throw ValidationError("sample shape " + shape_to_string(shape) +
                            " inconsistent with kind " + to_string(kind));
  }
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  Dataset out;
  out.class_names = class_names;
  out.kind = kind;
  out.samples.reserve(indices.size());
  out.labels.reserve(indices.size());
  for (auto i : indices) {
    out.samples.push_back(samples.at(i));
    out.labels.push_back(labels.at(i));
  }
  return out;
}

std::vector<std::size_t> class_histogram(const Dataset& ds) {
  std::vector<std::size_t> counts(ds.num_classes(), 0);
  for (auto y : ds.labels) {
    if (y >= counts.size()) counts.resize(y + 1, 0);
    ++counts[y];
  }
  return counts;
}

std::vector<std::vector<std::size_t>> class_members(const Dataset& ds) {
  std::vector<std::vector<std::size_t>> members(ds.num_classes());
  for (std::size_t i = 0; i < ds.labels.size(); ++i) {
    if (ds.labels[i] >= members.size()) members.resize(ds.labels[i] + 1);
    members[ds.labels[i]].push_back(i);
  }
  return members;
}

namespace {

void shuffle(std::vector<std::size_t>& v, RngStream& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_index(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

Split stratified_split(const Dataset& ds, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw ValidationError("train_fraction must lie in (0, 1)");
  RngStream rng = make_rng(spec.seed).derive("split");

  Split out;
  if (spec.stratified) {
    const auto members = class_members(ds);
    for (std::size_t c = 0; c < members.size(); ++c) {
      auto idx = members[c];
      if (idx.size() < 2)
        throw ValidationError("class " + std::to_string(c) + " has " +
                              std::to_string(idx.size()) +
                              " samples; stratified split needs at least 2");
      shuffle(idx, rng);
      const auto n_train = static_cast<std::size_t>(
          std::floor(spec.train_fraction * static_cast<double>(idx.size())));
      out.train_indices.insert(out.train_indices.end(), idx.begin(),
                               idx.begin() + static_cast<std::ptrdiff_t>(n_train));
      out.test_indices.insert(out.test_indices.end(),
                              idx.begin() + static_cast<std::ptrdiff_t>(n_train),
                              idx.end());
    }
  } else {
    std::vector<std::size_t> idx(ds.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    shuffle(idx, rng);
    const auto n_train = static_cast<std::size_t>(
        std::floor(spec.train_fraction * static_cast<double>(idx.size())));
    out.train_indices.assign(idx.begin(),
                             idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.test_indices.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train),
                            idx.end());
  }
  std::sort(out.train_indices.begin(), out.train_indices.end());
  std::sort(out.test_indices.begin(), out.test_indices.end());
  out.train = ds.subset(out.train_indices);
  out.test = ds.subset(out.test_indices);
  return out;
}

Dataset synth_blobs(const BlobSpec& spec, RngStream& stream) {
  const std::size_t k = spec.class_counts.size();
  if (k < 2) throw ValidationError("synth_blobs needs at least 2 classes");
  for (auto n : spec.class_counts)
    if (n == 0) throw ValidationError("synth_blobs class counts must be >= 1");
  if (spec.sigma < 0.0 || !std::isfinite(spec.sigma) ||
      !std::isfinite(spec.separation))
    throw ValidationError("synth_blobs needs finite separation and sigma >= 0");

  Dataset ds;
  for (std::size_t c = 0; c < k; ++c)
    ds.class_names.push_back("class" + std::to_string(c));

  std::vector<Tensor> centers;
  if (spec.image_side > 0) {
    ds.kind = DataKind::image;
    const std::size_t s = spec.image_side;
    for (std::size_t c = 0; c < k; ++c) {
      Tensor center({s, s, 1});
      for (std::size_t y = 0; y < s; ++y)
        for (std::size_t x = 0; x < s; ++x) {
          const double phase =
              2.0 * std::numbers::pi *
              (static_cast<double>((c + 1) * x) + static_cast<double>(c * y)) /
              static_cast<double>(s);
          center[y * s + x] = 0.5 + 0.25 * spec.separation * std::sin(phase);
        }
      centers.push_back(std::move(center));
    }
  } else {
    if (spec.dimension == 0) throw ValidationError("synth_blobs dimension must be >= 1");
    ds.kind = DataKind::embedding;
    const std::size_t d = spec.dimension;
    RngStream center_rng = stream.derive("centers");
    for (std::size_t c = 0; c < k; ++c) {
      Tensor center({d});
      if (k <= d) {
        center[c] = spec.separation;
      } else {
        double norm = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          center[j] = center_rng.normal();
          norm += center[j] * center[j];
        }
        norm = std::sqrt(norm);
        for (std::size_t j = 0; j < d; ++j)
          center[j] = norm > 0.0 ? spec.separation * center[j] / norm : 0.0;
      }
      centers.push_back(std::move(center));
    }
  }

  RngStream noise = stream.derive("noise");
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < spec.class_counts[c]; ++i) {
      Tensor x = centers[c];
      for (auto& v : x.values()) {
        v += spec.sigma * noise.normal();
        if (ds.kind == DataKind::image) v = std::clamp(v, 0.0, 1.0);
      }
      ds.samples.push_back(std::move(x));
      ds.labels.push_back(static_cast<std::uint32_t>(c));
    }
  }
  return ds;
}

namespace {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::uint8_t bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(std::begin(bytes), std::end(bytes));
  out.insert(out.end(), std::begin(bytes), std::end(bytes));
}

}  // namespace

std::vector<std::uint8_t> serialize_samples(const Dataset& ds) {
  std::vector<std::uint8_t> out;
  put_le<std::uint64_t>(out, ds.size());
  const auto shape = ds.sample_shape();
  put_le<std::uint64_t>(out, shape.size());
  for (auto d : shape) put_le<std::uint64_t>(out, d);
  for (auto y : ds.labels) put_le<std::uint32_t>(out, y);
  for (const auto& s : ds.samples)
    for (double v : s.values()) put_le<double>(out, v);
  return out;
}

Tensor stack_batch(const Dataset& ds, const std::vector<std::size_t>& indices) {
  if (indices.empty()) throw ValidationError("cannot stack an empty batch");
  Shape shape{indices.size()};
  const auto sample_shape = ds.sample_shape();
  shape.insert(shape.end(), sample_shape.begin(), sample_shape.end());
  const std::size_t per = shape_size(sample_shape);
  std::vector<double> data(indices.size() * per);
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const auto& s = ds.samples.at(indices[b]);
    std::copy(s.values().begin(), s.values().end(),
              data.begin() + static_cast<std::ptrdiff_t>(b * per));
  }
  return Tensor(std::move(shape), std::move(data));
}

}  // namespace imb
