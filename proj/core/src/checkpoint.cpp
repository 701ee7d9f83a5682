#include "imb/checkpoint.hpp"

#include <json.hpp>

#include "binio.hpp"
#include "imb/checksum.hpp"

namespace imb {

using detail::put;
using detail::Reader;
using nlohmann::ordered_json;

std::string architecture_json(const Model& model) {
  ordered_json j;
  j["input_shape"] = model.input_shape();
  ordered_json layers = ordered_json::array();
  for (const auto& l : model.layers())
    layers.push_back({{"kind", to_string(l.kind)},
                      {"units", l.units},
                      {"activation", to_string(l.activation)}});
  j["layers"] = std::move(layers);
  return j.dump();
}

std::vector<std::uint8_t> encode_checkpoint(const Model& model) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), {'N', 'N', 'E', 'T'});
  put<std::uint32_t>(out, kCheckpointVersion, std::endian::little);
  const std::string arch = architecture_json(model);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(arch.size()), std::endian::little);
  out.insert(out.end(), arch.begin(), arch.end());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.params().size()), std::endian::little);
  for (const auto& p : model.params()) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.rank()), std::endian::little);
    for (auto d : p.shape()) put<std::uint32_t>(out, static_cast<std::uint32_t>(d), std::endian::little);
    for (double v : p.values()) put<double>(out, v, std::endian::little);
  }
  put<std::uint32_t>(out, crc32(out), std::endian::little);
  return out;
}

Model decode_checkpoint(const std::vector<std::uint8_t>& bytes, const std::string& what) {
  if (bytes.size() < 8)
    throw IoError(IoError::Kind::truncated, what + ": truncated checkpoint");
  Reader r(bytes, what);
  const auto* magic = r.take(4);
  if (!(magic[0] == 'N' && magic[1] == 'N' && magic[2] == 'E' && magic[3] == 'T'))
    throw IoError(IoError::Kind::bad_magic, what + ": bad checkpoint magic");
  const auto version = r.get<std::uint32_t>(std::endian::little);
  if (version != kCheckpointVersion)
    throw IoError(IoError::Kind::version_mismatch,
                  what + ": unsupported checkpoint version " + std::to_string(version));

  const std::size_t body = bytes.size() - 4;
  std::uint32_t stored = 0;
  {
    Reader tail(bytes, what);
    tail.take(body);
    stored = tail.get<std::uint32_t>(std::endian::little);
  }
  if (crc32(std::span(bytes.data(), body)) != stored)
    throw IoError(IoError::Kind::checksum_mismatch, what + ": CRC-32 mismatch");

  const std::size_t arch_len = r.get<std::uint32_t>(std::endian::little);
  const auto* arch_bytes = r.take(arch_len);
  Shape input;
  std::vector<LayerSpec> layers;
  try {
    const auto j = ordered_json::parse(arch_bytes, arch_bytes + arch_len);
    input = j.at("input_shape").get<Shape>();
    for (const auto& l : j.at("layers"))
      layers.push_back({layer_kind_from_string(l.at("kind").get<std::string>()),
                        l.at("units").get<std::size_t>(),
                        activation_from_string(l.at("activation").get<std::string>())});
  } catch (const ordered_json::exception& e) {
    throw IoError(IoError::Kind::malformed, what + ": bad architecture descriptor: " + e.what());
  }

  Model model(input, layers, RngStream(0));
  const std::size_t count = r.get<std::uint32_t>(std::endian::little);
  std::vector<Tensor> params;
  params.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t rank = r.get<std::uint32_t>(std::endian::little);
    Shape shape(rank);
    for (auto& d : shape) d = r.get<std::uint32_t>(std::endian::little);
    std::vector<double> values(shape_size(shape));
    r.need(values.size() * sizeof(double));
    for (auto& v : values) v = r.get<double>(std::endian::little);
    params.emplace_back(std::move(shape), std::move(values));
  }
  if (r.remaining() != 4)
    throw IoError(IoError::Kind::malformed, what + ": trailing bytes before checksum");
  model.set_params(std::move(params));
  return model;
}

void save_checkpoint(const std::filesystem::path& path, const Model& model) {
  detail::write_file(path, encode_checkpoint(model));
}

Model load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(detail::read_file(path), path.string());
}

}  // namespace imb
