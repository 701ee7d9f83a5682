#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "imb/dataset.hpp"
#include "imb/loss.hpp"
#include "imb/metrics.hpp"

namespace imb {

enum class Approach { ce, focal, augment, smote, adasyn };
enum class ModelKind { cnn_head, mlp_head };

std::string to_string(Approach a);
std::string to_string(ModelKind m);
Approach approach_from_string(const std::string& text);
ModelKind model_kind_from_string(const std::string& text);

/// Canonical column order of the accuracy grid.
inline constexpr Approach kAllApproaches[] = {Approach::ce, Approach::focal, Approach::augment,
                                              Approach::smote, Approach::adasyn};

struct DatasetSource {
  enum class Kind { idx, femb, blob };
  Kind kind = Kind::blob;
  /// idx: dataset directory (manifest.json) or directory holding
  /// images.idx/labels.idx; femb: .femb file or dataset directory.
  std::filesystem::path path;
  BlobSpec blob;
  /// Blob data is regenerated per run seed unless pinned here.
  std::optional<std::uint64_t> blob_seed;
};

/// Declarative grid: every (model, approach, seed) triple is one cell.
struct ExperimentConfig {
  DatasetSource dataset;
  std::vector<ModelKind> models;
  std::vector<Approach> approaches;
  std::vector<std::uint64_t> seeds;

  std::size_t batch_size = 20;
  std::size_t epochs = 8;
  /// Learning rate per model; falls back to default_lr.
  std::map<ModelKind, double> lr;
  double default_lr = 1e-3;

  FocalParams focal;
  std::size_t smote_k = 5;
  std::size_t adasyn_k = 5;
  double adasyn_beta = 1.0;
  double adasyn_jitter = 0.01;
  /// Noise scale of the embedding-space augmentation stand-in.
  double augment_jitter = 0.1;

  double split_fraction = 0.9;
  bool split_stratified = true;

  std::size_t image_side = 128;
  std::size_t image_channels = 1;

  double learning_rate(ModelKind m) const;
  std::size_t grid_size() const { return models.size() * approaches.size() * seeds.size(); }
};

/// Strict parser: unknown keys and ill-typed values raise ValidationError.
/// Relative dataset paths resolve against base_dir.
ExperimentConfig parse_config(const std::string& json_text,
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

struct ResultRow {
  ModelKind model = ModelKind::mlp_head;
  Approach approach = Approach::ce;
  std::uint64_t seed = 0;
  double learning_rate = 0.0;
  double seconds = 0.0;  // wall clock; kept out of results.jsonl
  std::size_t parameters = 0;
  std::size_t train_size = 0;  // after the approach ran
  MetricsReport metrics;
};

/// Deterministic JSON line for results.jsonl, keys in the order
/// model, approach, seed, learning_rate, parameters, train_size, metrics.
std::string to_json_line(const ResultRow& row);
ResultRow row_from_json_line(const std::string& line);

/// Observation hooks for one cell, used to audit test-split hygiene.
struct CellTrace {
  Dataset test_before;  // test split as produced by the split
  Dataset test_after;   // test split as evaluated, after training
  Dataset train_before;
  Dataset train_after;  // after the approach
};

/// Dataset for a given run seed (blob sources are generated per seed),
/// with images preprocessed to the configured side.
Dataset materialize_dataset(const ExperimentConfig& cfg, std::uint64_t seed);

/// Applies an imbalance approach to a training split. Loss-only approaches
/// return the input unchanged.
Dataset apply_approach(const Dataset& train, Approach approach, const ExperimentConfig& cfg,
                       RngStream& stream);

/// One grid cell: split 90:10, approach on train only, train, evaluate on
/// the untouched test split.
ResultRow run_cell(const ExperimentConfig& cfg, const Dataset& data, ModelKind model,
                   Approach approach, std::uint64_t seed, CellTrace* trace = nullptr);

/// Convenience overload that materializes the dataset itself.
ResultRow run_cell(const ExperimentConfig& cfg, ModelKind model, Approach approach,
                   std::uint64_t seed);

/// All cells in model-major, approach, seed order. Cells run on
/// `threads` workers (0 = IMB_BENCH_THREADS or the hardware concurrency);
/// results do not depend on the thread count.
std::vector<ResultRow> run_grid(const ExperimentConfig& cfg, std::size_t threads = 0);

std::size_t bench_threads_from_env();

}  // namespace imb
