#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "imb/dataset.hpp"

namespace imb {

inline constexpr std::uint32_t kFembVersion = 1;

/// FEMB layout (all little endian):
///   "FEMB" | u32 version | u32 n | u32 d | u32 K |
///   n*d float32 values | n u32 labels | u32 CRC-32 of every preceding byte
///
/// Values are stored as float32, so a store/load cycle is exact only for
/// data already representable in single precision.
void store_embeddings(const std::filesystem::path& path, const Dataset& ds);
std::vector<std::uint8_t> encode_embeddings(const Dataset& ds);

/// Class names are set to class0..class{K-1}; the dataset manifest carries
/// the real names.
Dataset load_embeddings(const std::filesystem::path& path);
Dataset decode_embeddings(const std::vector<std::uint8_t>& bytes,
                          const std::string& what = "FEMB");

}  // namespace imb
