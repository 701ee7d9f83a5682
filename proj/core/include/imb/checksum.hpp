#pragma once

#include <cstdint>
#include <span>

namespace imb {

/// IEEE 802.3 CRC-32 (the zlib/PNG polynomial).
std::uint32_t crc32(std::span<const std::uint8_t> bytes);

}  // namespace imb
