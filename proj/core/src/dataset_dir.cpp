#include "imb/dataset_dir.hpp"

#include <fstream>
#include <json.hpp>

#include "imb/error.hpp"
#include "imb/femb.hpp"
#include "imb/idx.hpp"

namespace imb {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void store_dataset_dir(const fs::path& dir, const Dataset& ds) {
  ds.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(IoError::Kind::open_failed, "cannot create " + dir.string());

  ordered_json manifest;
  manifest["class_names"] = ds.class_names;
  manifest["kind"] = to_string(ds.kind);
  if (ds.kind == DataKind::image) {
    write_idx_images(dir / "images.idx", ds.samples);
    write_idx_labels(dir / "labels.idx", ds.labels);
    manifest["sources"] = {{"images", "images.idx"}, {"labels", "labels.idx"}};
  } else {
    store_embeddings(dir / "data.femb", ds);
    manifest["sources"] = {{"embeddings", "data.femb"}};
  }
  std::ofstream out(dir / "manifest.json");
  if (!out) throw IoError(IoError::Kind::open_failed, "cannot write manifest in " + dir.string());
  out << manifest.dump(2) << '\n';
}

Dataset load_dataset_dir(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw IoError(IoError::Kind::open_failed, "no manifest.json in " + dir.string());
  ordered_json manifest;
  try {
    manifest = ordered_json::parse(in);
  } catch (const ordered_json::exception& e) {
    throw IoError(IoError::Kind::malformed, "manifest.json: " + std::string(e.what()));
  }

  try {
    const auto kind = data_kind_from_string(manifest.at("kind").get<std::string>());
    auto names = manifest.at("class_names").get<std::vector<std::string>>();
    const auto& sources = manifest.at("sources");
    Dataset ds;
    if (kind == DataKind::image) {
      ds = load_idx(dir / sources.at("images").get<std::string>(),
                    dir / sources.at("labels").get<std::string>(), names);
    } else {
      ds = load_embeddings(dir / sources.at("embeddings").get<std::string>());
      if (names.size() != ds.num_classes())
        throw IoError(IoError::Kind::count_mismatch,
                      "manifest lists " + std::to_string(names.size()) +
                          " classes, FEMB header says " + std::to_string(ds.num_classes()));
      ds.class_names = std::move(names);
    }
    ds.validate();
    return ds;
  } catch (const ordered_json::exception& e) {
    throw IoError(IoError::Kind::malformed, "manifest.json: " + std::string(e.what()));
  }
}

}  // namespace imb
