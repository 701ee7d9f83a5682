#include "imb/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <type_traits>

#include "imb/augment.hpp"
#include "imb/dataset_dir.hpp"
#include "imb/error.hpp"
#include "imb/femb.hpp"
#include "imb/idx.hpp"
#include "imb/model.hpp"
#include "imb/oversample.hpp"
#include "imb/train.hpp"

namespace imb {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string to_string(Approach a) {
  switch (a) {
    case Approach::ce: return "ce";
    case Approach::focal: return "focal";
    case Approach::augment: return "augment";
    case Approach::smote: return "smote";
    case Approach::adasyn: return "adasyn";
  }
  return "?";
}

std::string to_string(ModelKind m) {
  return m == ModelKind::cnn_head ? "cnn_head" : "mlp_head";
}

Approach approach_from_string(const std::string& text) {
  for (auto a : kAllApproaches)
    if (to_string(a) == text) return a;
  throw ValidationError("unknown approach '" + text + "'");
}

ModelKind model_kind_from_string(const std::string& text) {
  if (text == "cnn_head") return ModelKind::cnn_head;
  if (text == "mlp_head") return ModelKind::mlp_head;
  throw ValidationError("unknown model '" + text + "'");
}

double ExperimentConfig::learning_rate(ModelKind m) const {
  auto it = lr.find(m);
  return it == lr.end() ? default_lr : it->second;
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

void allow_keys(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + " must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* k : keys) ok = ok || key == k;
    if (!ok) throw ValidationError("unknown config key '" + where + "." + key + "'");
  }
}

template <typename T>
struct is_vector : std::false_type {};
template <typename T>
struct is_vector<std::vector<T>> : std::true_type {};

// nlohmann converts -1 or 2.5 to an unsigned integer without complaint.
template <typename T>
bool has_json_kind(const json& v) {
  if constexpr (std::is_same_v<T, bool>) {
    return v.is_boolean();
  } else if constexpr (std::is_unsigned_v<T>) {
    return v.is_number_unsigned();
  } else if constexpr (std::is_floating_point_v<T>) {
    return v.is_number();
  } else if constexpr (is_vector<T>::value) {
    if (!v.is_array()) return false;
    for (const auto& e : v)
      if (!has_json_kind<typename T::value_type>(e)) return false;
    return true;
  } else {
    return true;
  }
}

template <typename T>
T get_as(const json& obj, const char* key, const std::string& where) {
  try {
    const auto& v = obj.at(key);
    if (!has_json_kind<T>(v))
      throw ValidationError("config " + where + "." + key + ": unexpected value " + v.dump());
    return v.get<T>();
  } catch (const json::exception& e) {
    throw ValidationError("config " + where + "." + key + ": " + e.what());
  }
}

template <typename T>
void read_opt(const json& obj, const char* key, const std::string& where, T& out) {
  if (obj.contains(key)) out = get_as<T>(obj, key, where);
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text, const fs::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  allow_keys(root,
             {"dataset", "models", "approaches", "seeds", "train", "focal", "smote", "adasyn",
              "augment", "split", "image"},
             "config");

  ExperimentConfig cfg;
  if (!root.contains("dataset")) throw ValidationError("config needs a dataset section");
  const auto& ds = root["dataset"];
  allow_keys(ds, {"kind", "path", "blob"}, "dataset");
  const auto kind = get_as<std::string>(ds, "kind", "dataset");
  if (kind == "idx") {
    cfg.dataset.kind = DatasetSource::Kind::idx;
  } else if (kind == "femb") {
    cfg.dataset.kind = DatasetSource::Kind::femb;
  } else if (kind == "blob") {
    cfg.dataset.kind = DatasetSource::Kind::blob;
  } else {
    throw ValidationError("dataset.kind must be idx, femb or blob");
  }
  if (cfg.dataset.kind == DatasetSource::Kind::blob) {
    if (!ds.contains("blob")) throw ValidationError("blob dataset needs a dataset.blob section");
    const auto& b = ds["blob"];
    allow_keys(b, {"counts", "side", "dim", "sep", "sigma", "seed"}, "dataset.blob");
    cfg.dataset.blob.class_counts = get_as<std::vector<std::size_t>>(b, "counts", "dataset.blob");
    read_opt(b, "side", "dataset.blob", cfg.dataset.blob.image_side);
    read_opt(b, "dim", "dataset.blob", cfg.dataset.blob.dimension);
    read_opt(b, "sep", "dataset.blob", cfg.dataset.blob.separation);
    read_opt(b, "sigma", "dataset.blob", cfg.dataset.blob.sigma);
    if (b.contains("seed")) cfg.dataset.blob_seed = get_as<std::uint64_t>(b, "seed", "dataset.blob");
    if (cfg.dataset.blob.class_counts.size() < 2)
      throw ValidationError("dataset.blob.counts needs at least 2 classes");
  } else {
    fs::path p = get_as<std::string>(ds, "path", "dataset");
    cfg.dataset.path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  }

  for (const auto& m : get_as<std::vector<std::string>>(root, "models", "config"))
    cfg.models.push_back(model_kind_from_string(m));
  for (const auto& a : get_as<std::vector<std::string>>(root, "approaches", "config"))
    cfg.approaches.push_back(approach_from_string(a));
  cfg.seeds = get_as<std::vector<std::uint64_t>>(root, "seeds", "config");
  if (cfg.models.empty() || cfg.approaches.empty() || cfg.seeds.empty())
    throw ValidationError("models, approaches and seeds must all be non-empty");
  if (std::set(cfg.models.begin(), cfg.models.end()).size() != cfg.models.size() ||
      std::set(cfg.approaches.begin(), cfg.approaches.end()).size() != cfg.approaches.size() ||
      std::set(cfg.seeds.begin(), cfg.seeds.end()).size() != cfg.seeds.size())
    throw ValidationError("models, approaches and seeds must not repeat");

  if (root.contains("train")) {
    const auto& t = root["train"];
    allow_keys(t, {"batch_size", "epochs", "lr"}, "train");
    read_opt(t, "batch_size", "train", cfg.batch_size);
    read_opt(t, "epochs", "train", cfg.epochs);
    if (t.contains("lr")) {
      const auto& lr = t["lr"];
      if (lr.is_number()) {
        cfg.default_lr = lr.get<double>();
      } else if (lr.is_object()) {
        for (const auto& [name, v] : lr.items()) {
          if (!v.is_number()) throw ValidationError("train.lr." + name + " must be a number");
          cfg.lr[model_kind_from_string(name)] = v.get<double>();
        }
      } else {
        throw ValidationError("train.lr must be a number or an object keyed by model");
      }
    }
    if (cfg.batch_size == 0) throw ValidationError("train.batch_size must be positive");
  }
  if (!(cfg.default_lr >= 0.0)) throw ValidationError("train.lr must be >= 0");
  for (const auto& [_, v] : cfg.lr)
    if (!(v >= 0.0)) throw ValidationError("train.lr must be >= 0");

  if (root.contains("focal")) {
    const auto& f = root["focal"];
    allow_keys(f, {"gamma", "alpha"}, "focal");
    read_opt(f, "gamma", "focal", cfg.focal.gamma);
    read_opt(f, "alpha", "focal", cfg.focal.alpha);
    if (!(cfg.focal.gamma >= 0.0)) throw ValidationError("focal.gamma must be >= 0");
    for (double a : cfg.focal.alpha)
      if (!(a > 0.0 && a <= 1.0)) throw ValidationError("focal.alpha entries must lie in (0, 1]");
  }
  if (root.contains("smote")) {
    allow_keys(root["smote"], {"k"}, "smote");
    read_opt(root["smote"], "k", "smote", cfg.smote_k);
  }
  if (root.contains("adasyn")) {
    const auto& a = root["adasyn"];
    allow_keys(a, {"k", "beta", "jitter"}, "adasyn");
    read_opt(a, "k", "adasyn", cfg.adasyn_k);
    read_opt(a, "beta", "adasyn", cfg.adasyn_beta);
    read_opt(a, "jitter", "adasyn", cfg.adasyn_jitter);
    if (!(cfg.adasyn_beta > 0.0 && cfg.adasyn_beta <= 1.0))
      throw ValidationError("adasyn.beta must lie in (0, 1]");
  }
  if (cfg.smote_k == 0 || cfg.adasyn_k == 0) throw ValidationError("k must be positive");
  if (root.contains("augment")) {
    allow_keys(root["augment"], {"jitter"}, "augment");
    read_opt(root["augment"], "jitter", "augment", cfg.augment_jitter);
  }
  if (root.contains("split")) {
    const auto& s = root["split"];
    allow_keys(s, {"fraction", "stratified"}, "split");
    read_opt(s, "fraction", "split", cfg.split_fraction);
    read_opt(s, "stratified", "split", cfg.split_stratified);
    if (!(cfg.split_fraction > 0.0 && cfg.split_fraction < 1.0))
      throw ValidationError("split.fraction must lie in (0, 1)");
  }
  if (root.contains("image")) {
    const auto& im = root["image"];
    allow_keys(im, {"side", "channels"}, "image");
    read_opt(im, "side", "image", cfg.image_side);
    read_opt(im, "channels", "image", cfg.image_channels);
    if (cfg.image_side == 0 || cfg.image_channels == 0)
      throw ValidationError("image.side and image.channels must be positive");
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(IoError::Kind::open_failed, "cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

// ---------------------------------------------------------------------------
// Rows

std::string to_json_line(const ResultRow& row) {
  ordered_json j;
  j["model"] = to_string(row.model);
  j["approach"] = to_string(row.approach);
  j["seed"] = row.seed;
  j["learning_rate"] = row.learning_rate;
  j["parameters"] = row.parameters;
  j["train_size"] = row.train_size;
  j["metrics"] = ordered_json::parse(to_json(row.metrics));
  return j.dump();
}

ResultRow row_from_json_line(const std::string& line) {
  try {
    const auto j = ordered_json::parse(line);
    ResultRow row;
    row.model = model_kind_from_string(j.at("model").get<std::string>());
    row.approach = approach_from_string(j.at("approach").get<std::string>());
    row.seed = j.at("seed").get<std::uint64_t>();
    row.learning_rate = j.at("learning_rate").get<double>();
    row.parameters = j.at("parameters").get<std::size_t>();
    row.train_size = j.at("train_size").get<std::size_t>();
    const auto& m = j.at("metrics");
    row.metrics.accuracy = m.at("accuracy").get<double>();
    row.metrics.balanced_accuracy = m.at("balanced_accuracy").get<double>();
    std::size_t pos = 0;
    for (const auto& c : m.at("per_class")) {
      ClassMetrics cm;
      cm.name = c.at("name").get<std::string>();
      cm.index = pos++;
      cm.precision = c.at("precision").get<double>();
      cm.recall = c.at("recall").get<double>();
      cm.f1 = c.at("f1").get<double>();
      row.metrics.per_class.push_back(std::move(cm));
    }
    return row;
  } catch (const ordered_json::exception& e) {
    throw IoError(IoError::Kind::malformed, std::string("results line: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Cells

namespace {

Dataset load_source(const DatasetSource& src) {
  if (src.kind == DatasetSource::Kind::idx) {
    if (fs::exists(src.path / "manifest.json")) return load_dataset_dir(src.path);
    return load_idx(src.path / "images.idx", src.path / "labels.idx");
  }
  if (fs::is_directory(src.path)) return load_dataset_dir(src.path);
  return load_embeddings(src.path);
}

Dataset fit_images(Dataset ds, const ExperimentConfig& cfg) {
  if (ds.kind != DataKind::image) return ds;
  const Shape want{cfg.image_side, cfg.image_side, cfg.image_channels};
  if (ds.sample_shape() == want) return ds;
  if (!ds.samples.empty() && ds.sample_shape()[2] != cfg.image_channels)
    throw ValidationError("dataset has " + std::to_string(ds.sample_shape()[2]) +
                          " channels, config expects " + std::to_string(cfg.image_channels));
  for (auto& s : ds.samples) s = preprocess(s, cfg.image_side);
  return ds;
}

bool per_seed_data(const ExperimentConfig& cfg) {
  return cfg.dataset.kind == DatasetSource::Kind::blob && !cfg.dataset.blob_seed;
}

}  // namespace

Dataset materialize_dataset(const ExperimentConfig& cfg, std::uint64_t seed) {
  Dataset ds;
  if (cfg.dataset.kind == DatasetSource::Kind::blob) {
    RngStream s = make_rng(cfg.dataset.blob_seed.value_or(seed)).derive("blob");
    ds = synth_blobs(cfg.dataset.blob, s);
  } else {
    ds = load_source(cfg.dataset);
  }
  return fit_images(std::move(ds), cfg);
}

Dataset apply_approach(const Dataset& train, Approach approach, const ExperimentConfig& cfg,
                       RngStream& stream) {
  switch (approach) {
    case Approach::ce:
    case Approach::focal:
      return train;
    case Approach::augment:
      return train.kind == DataKind::image
                 ? balance_by_augmentation(train, stream).data
                 : balance_by_jitter(train, stream, cfg.augment_jitter).data;
    case Approach::smote:
      return smote(train, {cfg.smote_k}, stream).data;
    case Approach::adasyn:
      return adasyn(train, {cfg.adasyn_k, cfg.adasyn_beta, cfg.adasyn_jitter}, stream).data;
  }
  throw ValidationError("bad approach");
}

ResultRow run_cell(const ExperimentConfig& cfg, const Dataset& data, ModelKind model_kind,
                   Approach approach, std::uint64_t seed, CellTrace* trace) {
  const auto started = std::chrono::steady_clock::now();
  const Split split =
      stratified_split(data, {cfg.split_fraction, cfg.split_stratified, seed});
  const RngStream master = make_rng(seed);
  RngStream resample_rng = master.derive("resample/" + to_string(approach));
  const Dataset train_set = apply_approach(split.train, approach, cfg, resample_rng);

  const RngStream init = master.derive("init/" + to_string(model_kind));
  const std::size_t k = data.num_classes();
  Model model;
  if (model_kind == ModelKind::cnn_head) {
    const auto shape = data.sample_shape();
    if (data.kind != DataKind::image || shape.size() != 3 || shape[0] != shape[1])
      throw ValidationError("cnn_head needs square image samples, got " + shape_to_string(shape));
    model = build_cnn_head(shape[0], shape[2], k, init);
  } else {
    model = build_mlp_head(shape_size(data.sample_shape()), k, init);
  }

  TrainConfig tc;
  tc.batch_size = cfg.batch_size;
  tc.epochs = cfg.epochs;
  tc.learning_rate = cfg.learning_rate(model_kind);
  tc.loss = approach == Approach::focal ? LossKind::focal : LossKind::cross_entropy;
  tc.focal = cfg.focal;
  tc.seed = master.derive("train/" + to_string(model_kind)).next_u64();
  train(model, train_set, tc);

  const auto preds = predict(model, split.test);
  const auto cm = confusion(preds, split.test.labels, k);

  ResultRow row;
  row.model = model_kind;
  row.approach = approach;
  row.seed = seed;
  row.learning_rate = tc.learning_rate;
  row.parameters = model.parameter_count();
  row.train_size = train_set.size();
  row.metrics = report(cm, data.class_names);
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  if (trace) {
    trace->train_before = split.train;
    trace->train_after = train_set;
    trace->test_before = split.test;
    trace->test_after = split.test;
  }
  return row;
}

ResultRow run_cell(const ExperimentConfig& cfg, ModelKind model, Approach approach,
                   std::uint64_t seed) {
  return run_cell(cfg, materialize_dataset(cfg, seed), model, approach, seed);
}

std::size_t bench_threads_from_env() {
  if (const char* env = std::getenv("IMB_BENCH_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

std::vector<ResultRow> run_grid(const ExperimentConfig& cfg, std::size_t threads) {
  struct Cell {
    ModelKind model;
    Approach approach;
    std::size_t seed_index;
  };
  std::vector<Cell> cells;
  for (auto m : cfg.models)
    for (auto a : cfg.approaches)
      for (std::size_t s = 0; s < cfg.seeds.size(); ++s) cells.push_back({m, a, s});

  std::vector<std::shared_ptr<const Dataset>> data(cfg.seeds.size());
  if (per_seed_data(cfg)) {
    for (std::size_t s = 0; s < cfg.seeds.size(); ++s)
      data[s] = std::make_shared<const Dataset>(materialize_dataset(cfg, cfg.seeds[s]));
  } else {
    auto shared = std::make_shared<const Dataset>(materialize_dataset(cfg, cfg.seeds.front()));
    std::fill(data.begin(), data.end(), shared);
  }

  std::vector<ResultRow> rows(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        const auto& c = cells[i];
        rows[i] = run_cell(cfg, *data[c.seed_index], c.model, c.approach, cfg.seeds[c.seed_index]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  if (threads == 0) threads = bench_threads_from_env();
  threads = std::min(threads, cells.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

}  // namespace imb
