#include "imb/idx.hpp"

#include <algorithm>
#include <cmath>

#include "binio.hpp"

namespace imb {

using detail::Reader;

namespace {

std::string hex(std::uint32_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s = "0x";
  for (int shift = 28; shift >= 0; shift -= 4) s += digits[(v >> shift) & 0xF];
  return s;
}

}  // namespace

std::vector<Tensor> read_idx_images(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  Reader r(bytes, path.string());
  const auto magic = r.get<std::uint32_t>(std::endian::big);
  if (magic != kIdxImageMagic && magic != kIdxImageMagicChannels)
    throw IoError(IoError::Kind::bad_magic,
                  path.string() + ": bad IDX image magic " + hex(magic));
  const std::size_t ndims = magic & 0xFF;
  std::vector<std::size_t> dims(ndims);
  for (auto& d : dims) d = r.get<std::uint32_t>(std::endian::big);
  const std::size_t n = dims[0], h = dims[1], w = dims[2];
  const std::size_t c = ndims == 4 ? dims[3] : 1;
  if (h == 0 || w == 0 || c == 0)
    throw IoError(IoError::Kind::malformed, path.string() + ": zero image dimension");
  const std::size_t per = h * w * c;
  const auto* payload = r.take(n * per);

  std::vector<Tensor> images;
  images.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Tensor img({h, w, c});
    for (std::size_t j = 0; j < per; ++j) img[j] = payload[i * per + j] / 255.0;
    images.push_back(std::move(img));
  }
  return images;
}

std::vector<std::uint32_t> read_idx_labels(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  Reader r(bytes, path.string());
  const auto magic = r.get<std::uint32_t>(std::endian::big);
  if (magic != kIdxLabelMagic)
    throw IoError(IoError::Kind::bad_magic,
                  path.string() + ": bad IDX label magic " + hex(magic));
  const std::size_t n = r.get<std::uint32_t>(std::endian::big);
  const auto* payload = r.take(n);
  return std::vector<std::uint32_t>(payload, payload + n);
}

void write_idx_images(const std::filesystem::path& path,
                      const std::vector<Tensor>& images) {
  if (images.empty()) throw ValidationError("refusing to write an empty IDX image file");
  const auto shape = images.front().shape();
  if (shape.size() != 3) throw ValidationError("IDX images must be (H, W, C)");
  const bool channels = shape[2] != 1;

  std::vector<std::uint8_t> out;
  detail::put<std::uint32_t>(out, channels ? kIdxImageMagicChannels : kIdxImageMagic,
                             std::endian::big);
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(images.size()),
                             std::endian::big);
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(shape[0]), std::endian::big);
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(shape[1]), std::endian::big);
  if (channels)
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(shape[2]),
                               std::endian::big);
  for (const auto& img : images) {
    if (img.shape() != shape) throw ValidationError("IDX images must share one shape");
    for (double v : img.values())
      out.push_back(static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0))));
  }
  detail::write_file(path, out);
}

void write_idx_labels(const std::filesystem::path& path,
                      const std::vector<std::uint32_t>& labels) {
  std::vector<std::uint8_t> out;
  detail::put<std::uint32_t>(out, kIdxLabelMagic, std::endian::big);
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(labels.size()),
                             std::endian::big);
  for (auto y : labels) {
    if (y > 255) throw ValidationError("IDX labels are single bytes; got " + std::to_string(y));
    out.push_back(static_cast<std::uint8_t>(y));
  }
  detail::write_file(path, out);
}

Dataset load_idx(const std::filesystem::path& images,
                 const std::filesystem::path& labels,
                 std::vector<std::string> class_names) {
  Dataset ds;
  ds.kind = DataKind::image;
  ds.samples = read_idx_images(images);
  ds.labels = read_idx_labels(labels);
  if (ds.samples.size() != ds.labels.size())
    throw IoError(IoError::Kind::count_mismatch,
                  "IDX image count " + std::to_string(ds.samples.size()) +
                      " does not match label count " + std::to_string(ds.labels.size()));
  if (class_names.empty()) {
    std::uint32_t k = 0;
    for (auto y : ds.labels) k = std::max(k, y + 1);
    for (std::uint32_t c = 0; c < k; ++c) class_names.push_back("class" + std::to_string(c));
  }
  ds.class_names = std::move(class_names);
  ds.validate();
  return ds;
}

}  // namespace imb
