#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "imb/model.hpp"

namespace imb {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// "NNET" | u32 version | u32 descriptor length | descriptor JSON
/// ({"input_shape": [...], "layers": [{"kind", "units", "activation"}, ...]}) |
/// u32 tensor count | per tensor: u32 rank, rank x u32 dims, float64 values |
/// u32 CRC-32 of all preceding bytes. Integers and floats little endian.
std::vector<std::uint8_t> encode_checkpoint(const Model& model);
Model decode_checkpoint(const std::vector<std::uint8_t>& bytes,
                        const std::string& what = "checkpoint");

void save_checkpoint(const std::filesystem::path& path, const Model& model);
Model load_checkpoint(const std::filesystem::path& path);

/// The architecture descriptor on its own.
std::string architecture_json(const Model& model);

}  // namespace imb
