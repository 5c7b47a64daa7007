#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>

namespace irsbf {

/// SplitMix64 generator. Small state, so a fresh engine per sample index is cheap.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t state) noexcept : state_(state) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Named substreams fanned out from a master seed. Values are part of the
/// on-disk reproducibility contract; do not renumber.
enum class StreamId : std::uint64_t {
  kChannel = 1,
  kSamples = 2,
  kNoise = 3,
  kPrecoder = 4,
  kTrial = 5,
  kProbe = 6,
};

/// A seed-addressed random stream.
///
/// Streams never share state: `child(i)` derives a new seed by hashing
/// (parent seed, i), so the draws made from one child cannot shift any
/// other child's output. All randomness in the library flows through this
/// type; a result is a pure function of the streams it was handed.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) noexcept : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  RandomStream child(std::uint64_t index) const noexcept;
  RandomStream child(StreamId id) const noexcept {
    return child(static_cast<std::uint64_t>(id) ^ 0x5bd1e9955bd1e995ULL);
  }
  RandomStream child(StreamId id, std::uint64_t index) const noexcept { return child(id).child(index); }

  SplitMix64 engine() const noexcept { return SplitMix64(seed_); }

 private:
  std::uint64_t seed_;
};

/// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
template <typename Engine>
std::complex<double> complex_gaussian(Engine& engine, double variance) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = std::sqrt(variance / 2.0);
  const double re = normal(engine);
  const double im = normal(engine);
  return {scale * re, scale * im};
}

template <typename Engine>
double uniform_angle(Engine& engine) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  return u(engine);
}

}  // namespace irsbf
