#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "irsbf/random.hpp"

namespace irsbf {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Wraps any finite angle into [0, 2*pi).
double canonical_angle(double radians);

/// Circular distance between two angles, in [0, pi].
double circular_distance(double a, double b);

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);
double linear_to_db(double ratio);

struct Polar {
  double beta = 0.0;   // magnitude
  double alpha = 0.0;  // phase in [0, 2*pi); 0 when beta == 0
};

Polar polar_decompose(Complex h);

/// Background channel h0 plus N cascaded reflected channels, with cached polar form.
class ChannelInstance {
 public:
  /// Throws InvalidParameter on N == 0, |h0| == 0 or any non-finite entry.
  ChannelInstance(Complex h0, std::vector<Complex> reflected);

  std::size_t size() const noexcept { return h_.size(); }
  Complex h0() const noexcept { return h0_; }
  /// Element n, 0-based.
  Complex h(std::size_t n) const { return h_.at(n); }
  std::span<const Complex> reflected() const noexcept { return h_; }

  double beta0() const noexcept { return beta0_; }
  double alpha0() const noexcept { return alpha0_; }
  double beta(std::size_t n) const { return beta_.at(n); }
  double alpha(std::size_t n) const { return alpha_.at(n); }
  std::span<const double> betas() const noexcept { return beta_; }
  std::span<const double> alphas() const noexcept { return alpha_; }

 private:
  Complex h0_;
  std::vector<Complex> h_;
  double beta0_;
  double alpha0_;
  std::vector<double> beta_;
  std::vector<double> alpha_;
};

/// The discrete phase alphabet {w, 2w, ..., Kw} with w = 2*pi/K.
class Codebook {
 public:
  explicit Codebook(int levels);

  int levels() const noexcept { return levels_; }
  double omega() const noexcept { return omega_; }
  /// Phase of 1-based index k, i.e. k*w.
  double phase(int k) const noexcept { return k * omega_; }
  std::vector<double> phases() const;
  /// Maps any integer onto {1..K} modulo K.
  int wrap(int k) const noexcept { return ((k - 1) % levels_ + levels_) % levels_ + 1; }

  bool operator==(const Codebook&) const = default;

 private:
  int levels_;
  double omega_;
};

Codebook make_codebook(int K);

/// One beamformer: a codebook index k_n in {1..K} per element.
struct PhaseConfig {
  int levels = 2;
  std::vector<int> k;

  std::size_t size() const noexcept { return k.size(); }
  double theta(std::size_t n) const { return k.at(n) * (kTwoPi / levels); }

  bool operator==(const PhaseConfig&) const = default;
};

/// Throws DimensionError / InvalidParameter if `config` does not fit N elements of `codebook`.
void validate_config(const PhaseConfig& config, std::size_t N, const Codebook& codebook);

/// Delta_n = (alpha_0 - alpha_n) mod 2*pi, the continuous optimum for element n.
std::vector<double> phase_gaps(const ChannelInstance& channel);

/// h_n * e^{j k w} for every element n (row) and index k = 1..K (column), row-major.
std::vector<Complex> rotated_channels(const ChannelInstance& channel, const Codebook& codebook);

/// Channel superposition g = h0 + sum_n h_n e^{j theta_n}.
Complex superposition(const ChannelInstance& channel, const PhaseConfig& config);

/// |g|^2 / beta_0^2.
double snr_boost(const ChannelInstance& channel, const PhaseConfig& config);

/// (beta_0 + sum beta_n)^2 / beta_0^2, the boost with every path co-phased.
double boost_upper_bound(const ChannelInstance& channel);

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  bool operator==(const Vec3&) const = default;
};

double distance(const Vec3& a, const Vec3& b);

/// Placement and power levels. Defaults are the reference single-user scenario.
struct ScenarioGeometry {
  Vec3 tx_pos{50.0, -200.0, 20.0};
  Vec3 irs_pos{-2.0, -1.0, 0.0};
  Vec3 rx_pos{0.0, 0.0, 0.0};
  double tx_power_dbm = 30.0;
  double noise_power_dbm = -90.0;

  /// Throws InvalidParameter when two nodes coincide.
  void validate() const;

  double tx_power_watts() const { return dbm_to_watts(tx_power_dbm); }
  double noise_power_watts() const { return dbm_to_watts(noise_power_dbm); }

  bool operator==(const ScenarioGeometry&) const = default;
};

/// Direct-link pathloss in dB: 32.6 + 36.7 log10(d).
double direct_pathloss_db(double meters);
/// Per-segment IRS pathloss in dB: 30 + 22 log10(d).
double reflect_pathloss_db(double meters);

/// Draws a Rayleigh-faded channel for `geometry`.
///
/// h0 comes from substream 0 and element n (1-based) from substream n, so a
/// channel with more elements extends one with fewer under the same stream.
ChannelInstance sample_channel(const ScenarioGeometry& geometry, std::size_t N, const RandomStream& stream);

/// Two-element worst case for binary phases: h1 sits just inside the sector
/// next to h0 and h2 is its mirror image, so the rounded solution cancels.
ChannelInstance adversarial_instance(int K, double beta0, double beta, double eps);

}  // namespace irsbf
