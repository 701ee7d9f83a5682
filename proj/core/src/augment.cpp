#include "imb/augment.hpp"

#include <algorithm>
#include <cmath>

#include "imb/error.hpp"

namespace imb {

std::string to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::brightness: return "brightness";
    case TransformKind::contrast: return "contrast";
    case TransformKind::sharpness: return "sharpness";
  }
  return "?";
}

TransformKind transform_kind_from_string(const std::string& text) {
  if (text == "brightness") return TransformKind::brightness;
  if (text == "contrast") return TransformKind::contrast;
  if (text == "sharpness") return TransformKind::sharpness;
  throw ValidationError("unknown transform kind '" + text + "'");
}

namespace {

void require_image(const Tensor& img, const char* op) {
  if (img.rank() != 3 || img.empty())
    throw ValidationError(std::string(op) + " expects a non-empty (H, W, C) image, got " +
                          shape_to_string(img.shape()));
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

Tensor preprocess(const Tensor& img, std::size_t side) {
  require_image(img, "preprocess");
  if (side == 0) throw ValidationError("preprocess side must be positive");
  double max_value = 0.0;
  for (double v : img.values()) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ValidationError("preprocess expects finite non-negative pixel values");
    max_value = std::max(max_value, v);
  }
  const double scale = max_value <= 1.0 ? 1.0 : (max_value <= 255.0 ? 255.0 : max_value);

  const std::size_t h = img.dim(0), w = img.dim(1), c = img.dim(2);
  Tensor out({side, side, c});
  const double sy = static_cast<double>(h) / static_cast<double>(side);
  const double sx = static_cast<double>(w) / static_cast<double>(side);

  auto at = [&](std::size_t y, std::size_t x, std::size_t ch) {
    return img[(y * w + x) * c + ch];
  };

  for (std::size_t oy = 0; oy < side; ++oy) {
    const double fy = std::clamp((static_cast<double>(oy) + 0.5) * sy - 0.5, 0.0,
                                 static_cast<double>(h - 1));
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, h - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t ox = 0; ox < side; ++ox) {
      const double fx = std::clamp((static_cast<double>(ox) + 0.5) * sx - 0.5, 0.0,
                                   static_cast<double>(w - 1));
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, w - 1);
      const double wx = fx - static_cast<double>(x0);
      for (std::size_t ch = 0; ch < c; ++ch) {
        double v;
        if (wy == 0.0 && wx == 0.0) {
          v = at(y0, x0, ch);
        } else {
          const double top = at(y0, x0, ch) + wx * (at(y0, x1, ch) - at(y0, x0, ch));
          const double bottom = at(y1, x0, ch) + wx * (at(y1, x1, ch) - at(y1, x0, ch));
          v = top + wy * (bottom - top);
        }
        out[(oy * side + ox) * c + ch] = clamp01(v / scale);
      }
    }
  }
  return out;
}

Tensor box_blur3(const Tensor& img) {
  require_image(img, "box_blur3");
  const std::size_t h = img.dim(0), w = img.dim(1), c = img.dim(2);
  Tensor out(img.shape());
  const auto ih = static_cast<std::ptrdiff_t>(h), iw = static_cast<std::ptrdiff_t>(w);
  for (std::ptrdiff_t y = 0; y < ih; ++y)
    for (std::ptrdiff_t x = 0; x < iw; ++x)
      for (std::size_t ch = 0; ch < c; ++ch) {
        double sum = 0.0;
        for (std::ptrdiff_t dy = -1; dy <= 1; ++dy)
          for (std::ptrdiff_t dx = -1; dx <= 1; ++dx) {
            const auto yy = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(y + dy, 0, ih - 1));
            const auto xx = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(x + dx, 0, iw - 1));
            sum += img[(yy * w + xx) * c + ch];
          }
        out[(static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)) * c + ch] = sum / 9.0;
      }
  return out;
}

Tensor apply_transform(const Tensor& img, const TransformSpec& t) {
  require_image(img, "apply_transform");
  if (t.intensity == 1.0) return img;
  if (!std::isfinite(t.intensity) || t.intensity < 0.0)
    throw ValidationError("transform intensity must be finite and non-negative");
  const double f = t.intensity;
  Tensor out(img.shape());
  switch (t.kind) {
    case TransformKind::brightness:
      for (std::size_t i = 0; i < img.size(); ++i) out[i] = clamp01(f * img[i]);
      break;
    case TransformKind::contrast: {
      double mean = 0.0;
      for (double v : img.values()) mean += v;
      mean /= static_cast<double>(img.size());
      for (std::size_t i = 0; i < img.size(); ++i)
        out[i] = clamp01(mean + f * (img[i] - mean));
      break;
    }
    case TransformKind::sharpness: {
      const Tensor blur = box_blur3(img);
      for (std::size_t i = 0; i < img.size(); ++i)
        out[i] = clamp01(blur[i] + f * (img[i] - blur[i]));
      break;
    }
  }
  return out;
}

namespace {

std::size_t majority_count(const std::vector<std::size_t>& hist) {
  return hist.empty() ? 0 : *std::max_element(hist.begin(), hist.end());
}

}  // namespace

Resampled balance_by_augmentation(const Dataset& ds, RngStream& stream) {
  if (ds.kind != DataKind::image)
    throw ValidationError("augmentation balancing needs an image dataset");
  ds.validate();
  Resampled out{ds, {}};
  const auto members = class_members(ds);
  const auto target = majority_count(class_histogram(ds));

  for (std::size_t c = 0; c < members.size(); ++c) {
    const auto& idx = members[c];
    if (idx.empty() || idx.size() >= target) continue;
    for (std::size_t made = idx.size(); made < target; ++made) {
      const auto parent = idx[stream.uniform_index(idx.size())];
      const auto kind = static_cast<TransformKind>(stream.uniform_index(3));
      const double f = stream.uniform(kAugmentIntensityLo, kAugmentIntensityHi);
      out.data.samples.push_back(apply_transform(ds.samples[parent], {kind, f}));
      out.data.labels.push_back(static_cast<std::uint32_t>(c));
      out.log.entries.push_back(
          {"augment_" + to_string(kind), static_cast<std::uint32_t>(c), parent,
           std::nullopt, f, std::nullopt});
    }
  }
  return out;
}

Resampled balance_by_jitter(const Dataset& ds, RngStream& stream, double scale) {
  ds.validate();
  if (!(scale >= 0.0) || !std::isfinite(scale))
    throw ValidationError("jitter scale must be finite and non-negative");
  Resampled out{ds, {}};
  const auto members = class_members(ds);
  const auto target = majority_count(class_histogram(ds));
  const std::size_t d = ds.samples.empty() ? 0 : ds.samples.front().size();

  for (std::size_t c = 0; c < members.size(); ++c) {
    const auto& idx = members[c];
    if (idx.empty() || idx.size() >= target) continue;

    std::vector<double> mean(d, 0.0), sd(d, 0.0);
    for (auto i : idx)
      for (std::size_t j = 0; j < d; ++j) mean[j] += ds.samples[i][j];
    for (auto& m : mean) m /= static_cast<double>(idx.size());
    for (auto i : idx)
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = ds.samples[i][j] - mean[j];
        sd[j] += diff * diff;
      }
    for (auto& s : sd) s = std::sqrt(s / static_cast<double>(idx.size()));

    for (std::size_t made = idx.size(); made < target; ++made) {
      const auto parent = idx[stream.uniform_index(idx.size())];
      std::vector<double> noise(d);
      Tensor x = ds.samples[parent];
      for (std::size_t j = 0; j < d; ++j) {
        noise[j] = scale * sd[j] * stream.normal();
        x[j] = x[j] + noise[j];
      }
      out.data.samples.push_back(std::move(x));
      out.data.labels.push_back(static_cast<std::uint32_t>(c));
      out.log.entries.push_back({"jitter", static_cast<std::uint32_t>(c), parent,
                                 std::nullopt, 0.0, std::move(noise)});
    }
  }
  return out;
}

}  // namespace imb
