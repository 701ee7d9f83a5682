#include "imb/femb.hpp"

#include "binio.hpp"
#include "imb/checksum.hpp"

namespace imb {

using detail::put;
using detail::Reader;

std::vector<std::uint8_t> encode_embeddings(const Dataset& ds) {
  ds.validate();
  if (ds.kind != DataKind::embedding)
    throw ValidationError("FEMB stores embedding datasets only");
  const std::size_t d = ds.samples.empty() ? 0 : ds.samples.front().size();

  std::vector<std::uint8_t> out;
  out.insert(out.end(), {'F', 'E', 'M', 'B'});
  put<std::uint32_t>(out, kFembVersion, std::endian::little);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ds.size()), std::endian::little);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(d), std::endian::little);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ds.num_classes()), std::endian::little);
  for (const auto& s : ds.samples)
    for (double v : s.values()) put<float>(out, static_cast<float>(v), std::endian::little);
  for (auto y : ds.labels) put<std::uint32_t>(out, y, std::endian::little);
  put<std::uint32_t>(out, crc32(out), std::endian::little);
  return out;
}

void store_embeddings(const std::filesystem::path& path, const Dataset& ds) {
  detail::write_file(path, encode_embeddings(ds));
}

Dataset decode_embeddings(const std::vector<std::uint8_t>& bytes, const std::string& what) {
  Reader r(bytes, what);
  const auto* magic = r.take(4);
  if (!(magic[0] == 'F' && magic[1] == 'E' && magic[2] == 'M' && magic[3] == 'B'))
    throw IoError(IoError::Kind::bad_magic, what + ": bad FEMB magic");
  const auto version = r.get<std::uint32_t>(std::endian::little);
  if (version != kFembVersion)
    throw IoError(IoError::Kind::version_mismatch,
                  what + ": unsupported FEMB version " + std::to_string(version));
  const std::size_t n = r.get<std::uint32_t>(std::endian::little);
  const std::size_t d = r.get<std::uint32_t>(std::endian::little);
  const std::size_t k = r.get<std::uint32_t>(std::endian::little);
  if ((n > 0 && d == 0) || k == 0)
    throw IoError(IoError::Kind::malformed, what + ": zero embedding width or class count");

  r.need(n * d * 4 + n * 4 + 4);
  if (r.remaining() != n * d * 4 + n * 4 + 4)
    throw IoError(IoError::Kind::malformed, what + ": trailing bytes after FEMB payload");
  const std::size_t body = bytes.size() - 4;
  Reader tail(bytes, what);
  tail.take(body);
  const auto stored = tail.get<std::uint32_t>(std::endian::little);
  if (crc32(std::span(bytes.data(), body)) != stored)
    throw IoError(IoError::Kind::checksum_mismatch, what + ": CRC-32 mismatch");

  Dataset ds;
  ds.kind = DataKind::embedding;
  ds.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Tensor v({d});
    for (std::size_t j = 0; j < d; ++j) v[j] = r.get<float>(std::endian::little);
    ds.samples.push_back(std::move(v));
  }
  ds.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto y = r.get<std::uint32_t>(std::endian::little);
    if (y >= k)
      throw IoError(IoError::Kind::malformed,
                    what + ": label " + std::to_string(y) + " >= K");
    ds.labels.push_back(y);
  }
  for (std::size_t c = 0; c < k; ++c) ds.class_names.push_back("class" + std::to_string(c));
  if (!ds.samples.empty() && !std::all_of(ds.samples.begin(), ds.samples.end(),
                                          [](const Tensor& t) { return t.all_finite(); }))
    throw IoError(IoError::Kind::malformed, what + ": non-finite embedding value");
  return ds;
}

Dataset load_embeddings(const std::filesystem::path& path) {
  return decode_embeddings(detail::read_file(path), path.string());
}

}  // namespace imb
