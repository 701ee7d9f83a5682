#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "imb/dataset.hpp"

namespace imb {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxImageMagicChannels = 0x00000804;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Unsigned-byte IDX images, (n, H, W) or (n, H, W, C), scaled to [0, 1] as
/// (H, W, C) tensors.
std::vector<Tensor> read_idx_images(const std::filesystem::path& path);
std::vector<std::uint32_t> read_idx_labels(const std::filesystem::path& path);

/// Images quantized as round(255 * clamp(v, 0, 1)). Single-channel images
/// use the 3-dimensional layout.
void write_idx_images(const std::filesystem::path& path,
                      const std::vector<Tensor>& images);
void write_idx_labels(const std::filesystem::path& path,
                      const std::vector<std::uint32_t>& labels);

/// Paired image/label files. Class names default to class0..class{K-1} with
/// K = max label + 1 unless given.
Dataset load_idx(const std::filesystem::path& images,
                 const std::filesystem::path& labels,
                 std::vector<std::string> class_names = {});

}  // namespace imb
