#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace imb {

/// xoshiro256** stream seeded through splitmix64.
///
/// A stream remembers the seed it was built from, so derive(label) depends
/// only on (seed, label) and never on how much of the parent has been
/// consumed. Streams are single-owner; hand each worker its own derived
/// substream.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::string label = "");

  /// Child stream keyed by label. Nested derivation composes labels.
  RngStream derive(std::string_view label) const;

  std::uint64_t next_u64() noexcept;

  /// Uniform double in [0, 1) with 53 bits of resolution.
  double uniform01() noexcept;

  /// Uniform double in [lo, hi). Throws ValidationError unless lo < hi and
  /// both are finite.
  double uniform(double lo, double hi);

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

  /// Standard normal via Box-Muller (one value per call, second discarded).
  double normal() noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  const std::string& label() const noexcept { return label_; }

 private:
  std::uint64_t seed_;
  std::string label_;
  std::array<std::uint64_t, 4> state_{};
};

/// Master stream for a run.
inline RngStream make_rng(std::uint64_t seed) { return RngStream(seed); }

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

}  // namespace imb
