#pragma once

#include <string>

#include "imb/dataset.hpp"
#include "imb/resample_log.hpp"
#include "imb/rng.hpp"
#include "imb/tensor.hpp"

namespace imb {

enum class TransformKind { brightness, contrast, sharpness };

std::string to_string(TransformKind kind);
TransformKind transform_kind_from_string(const std::string& text);

struct TransformSpec {
  TransformKind kind = TransformKind::brightness;
  double intensity = 1.0;
};

/// Bilinear resize (half-pixel centers, edge clamped) of an (H, W, C) image
/// to side x side, then scaled into [0, 1]. The scale divisor is 1 when the
/// maximum value is at most 1, 255 when it is at most 255, and the maximum
/// itself otherwise.
Tensor preprocess(const Tensor& img, std::size_t side);

/// brightness  clamp(f * x)
/// contrast    clamp(m + f * (x - m)), m the mean over the whole image
/// sharpness   clamp(b + f * (x - b)), b a 3x3 box blur per channel with
///             edge-replicate padding
/// f == 1 returns the input unchanged for every kind.
Tensor apply_transform(const Tensor& img, const TransformSpec& t);

/// 3x3 box blur per channel, edge-replicate padding.
Tensor box_blur3(const Tensor& img);

struct Resampled {
  Dataset data;
  ResampleLog log;
};

/// Appends transformed copies of random class members until every class
/// reaches the majority count. Each copy uses one uniformly chosen kind and
/// an intensity drawn from [0.8, 1.2). Image datasets only.
Resampled balance_by_augmentation(const Dataset& ds, RngStream& stream);

/// Embedding-space stand-in for augmentation: copies of random class
/// members plus Gaussian noise with per-feature standard deviation
/// scale * (class feature std). Balances to the majority count.
Resampled balance_by_jitter(const Dataset& ds, RngStream& stream, double scale = 0.1);

inline constexpr double kAugmentIntensityLo = 0.8;
inline constexpr double kAugmentIntensityHi = 1.2;

}  // namespace imb
