#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "imb/rng.hpp"
#include "imb/tensor.hpp"

namespace imb {

enum class DataKind { image, embedding };

std::string to_string(DataKind kind);
DataKind data_kind_from_string(const std::string& text);

/// Labeled samples sharing one shape: images are (H, W, C) in [0, 1],
/// embeddings are (d).
struct Dataset {
  std::vector<Tensor> samples;
  std::vector<std::uint32_t> labels;
  std::vector<std::string> class_names;
  DataKind kind = DataKind::embedding;

  std::size_t size() const noexcept { return samples.size(); }
  std::size_t num_classes() const noexcept { return class_names.size(); }
  /// Shape shared by all samples; empty when the dataset is empty.
  Shape sample_shape() const;

  /// Throws ValidationError if labels, shapes or class names disagree.
  void validate() const;

  /// New dataset with the given samples, in order.
  Dataset subset(const std::vector<std::size_t>& indices) const;
};

std::vector<std::size_t> class_histogram(const Dataset& ds);

/// Index sets of each class, ascending.
std::vector<std::vector<std::size_t>> class_members(const Dataset& ds);

struct SplitSpec {
  double train_fraction = 0.9;
  bool stratified = true;
  std::uint64_t seed = 0;
};

struct Split {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};

/// Stratified: each class c keeps floor(fraction * n_c) shuffled members in
/// train and the rest in test; every class needs at least 2 samples.
/// Unstratified: floor(fraction * n) of a global shuffle go to train.
/// Index lists come back sorted so subsets keep the original order.
Split stratified_split(const Dataset& ds, const SplitSpec& spec);

struct BlobSpec {
  std::vector<std::size_t> class_counts;
  /// Embedding length; ignored when image_side > 0.
  std::size_t dimension = 2;
  /// When positive, samples are image_side x image_side x 1 images clamped
  /// to [0, 1].
  std::size_t image_side = 0;
  double separation = 3.0;
  double sigma = 1.0;
};

/// Isotropic Gaussian clusters, one per class, with histogram equal to
/// class_counts. Embedding centers sit at separation * e_c (padded into a
/// random rotation-free layout when K > dimension); image centers are
/// per-class smooth intensity patterns scaled by separation.
Dataset synth_blobs(const BlobSpec& spec, RngStream& stream);

/// Canonical byte serialization (labels then float64 samples, little
/// endian). Used for hashing and bit-exact comparisons.
std::vector<std::uint8_t> serialize_samples(const Dataset& ds);

/// Samples stacked into a batch tensor: (n, H, W, C) or (n, d).
Tensor stack_batch(const Dataset& ds, const std::vector<std::size_t>& indices);

}  // namespace imb
