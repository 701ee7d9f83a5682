#include "imb/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "imb/error.hpp"

namespace imb {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::string label)
    : seed_(seed), label_(std::move(label)) {
  std::uint64_t sm = seed;
  for (auto& word : state_) word = splitmix64(sm);
}

RngStream RngStream::derive(std::string_view label) const {
  std::uint64_t mix = fnv1a64(label);
  std::uint64_t child = splitmix64(mix) ^ seed_;
  std::uint64_t scramble = child;
  child = splitmix64(scramble);
  std::string name = label_.empty() ? std::string(label)
                                    : label_ + "/" + std::string(label);
  return RngStream(child, std::move(name));
}

std::uint64_t RngStream::next_u64() noexcept {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RngStream::uniform01() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
    throw ValidationError("uniform requires finite lo < hi");
  double v = lo + (hi - lo) * uniform01();
  // Rounding in lo + span*u can land exactly on hi.
  if (v >= hi) v = std::nextafter(hi, lo);
  return v;
}

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
  if (n == 0) throw ValidationError("uniform_index requires n > 0");
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - (max % n + 1) % n;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x > limit);
  return x % n;
}

double RngStream::normal() noexcept {
  const double u1 = 1.0 - uniform01();  // (0, 1]
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace imb
