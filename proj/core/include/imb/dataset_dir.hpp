#pragma once

#include <filesystem>

#include "imb/dataset.hpp"

namespace imb {

/// A dataset directory holds manifest.json plus its payload files:
/// images.idx + labels.idx for image data, data.femb for embeddings.
///
/// manifest.json: {"class_names": [...], "kind": "image"|"embedding",
///                 "sources": {"images": ..., "labels": ...} | {"embeddings": ...}}
/// Source paths are relative to the directory.
void store_dataset_dir(const std::filesystem::path& dir, const Dataset& ds);
Dataset load_dataset_dir(const std::filesystem::path& dir);

}  // namespace imb
