#include "irsbf/core_model.hpp"

#include <cmath>
#include <numeric>

#include "irsbf/errors.hpp"

namespace irsbf {

namespace {

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

double canonical_angle(double radians) {
  double a = std::fmod(radians, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  // fmod of a tiny negative number can round up to exactly 2*pi.
  if (a >= kTwoPi) a = 0.0;
  return a;
}

double circular_distance(double a, double b) {
  const double d = canonical_angle(a - b);
  return std::min(d, kTwoPi - d);
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

double linear_to_db(double ratio) { return 10.0 * std::log10(ratio); }

Polar polar_decompose(Complex h) {
  const double beta = std::abs(h);
  if (beta == 0.0) return {0.0, 0.0};
  return {beta, canonical_angle(std::arg(h))};
}

ChannelInstance::ChannelInstance(Complex h0, std::vector<Complex> reflected) : h0_(h0), h_(std::move(reflected)) {
  if (h_.empty()) throw InvalidParameter("channel needs at least one reflective element");
  if (!finite(h0_)) throw InvalidParameter("background channel is not finite");
  const Polar p0 = polar_decompose(h0_);
  if (p0.beta <= 0.0) throw InvalidParameter("background channel must be nonzero");
  beta0_ = p0.beta;
  alpha0_ = p0.alpha;
  beta_.reserve(h_.size());
  alpha_.reserve(h_.size());
  for (std::size_t n = 0; n < h_.size(); ++n) {
    if (!finite(h_[n])) throw InvalidParameter("reflected channel " + std::to_string(n + 1) + " is not finite");
    const Polar p = polar_decompose(h_[n]);
    beta_.push_back(p.beta);
    alpha_.push_back(p.alpha);
  }
}

Codebook::Codebook(int levels) : levels_(levels), omega_(0.0) {
  if (levels < 2) throw InvalidParameter("codebook needs K >= 2 phase levels, got " + std::to_string(levels));
  omega_ = kTwoPi / levels;
}

std::vector<double> Codebook::phases() const {
  std::vector<double> out(static_cast<std::size_t>(levels_));
  for (int k = 1; k <= levels_; ++k) out[static_cast<std::size_t>(k - 1)] = phase(k);
  return out;
}

Codebook make_codebook(int K) { return Codebook(K); }

void validate_config(const PhaseConfig& config, std::size_t N, const Codebook& codebook) {
  if (config.size() != N) {
    throw DimensionError("configuration has " + std::to_string(config.size()) + " entries, channel has " +
                         std::to_string(N));
  }
  if (config.levels != codebook.levels()) throw InvalidParameter("configuration uses a different codebook size");
  for (int k : config.k) {
    if (k < 1 || k > codebook.levels()) throw InvalidParameter("phase index out of range: " + std::to_string(k));
  }
}

std::vector<double> phase_gaps(const ChannelInstance& channel) {
  std::vector<double> gaps(channel.size());
  for (std::size_t n = 0; n < channel.size(); ++n) gaps[n] = canonical_angle(channel.alpha0() - channel.alpha(n));
  return gaps;
}

std::vector<Complex> rotated_channels(const ChannelInstance& channel, const Codebook& codebook) {
  const auto K = static_cast<std::size_t>(codebook.levels());
  std::vector<Complex> table(channel.size() * K);
  for (std::size_t n = 0; n < channel.size(); ++n) {
    for (std::size_t k = 1; k <= K; ++k) {
      table[n * K + k - 1] = channel.h(n) * std::polar(1.0, codebook.phase(static_cast<int>(k)));
    }
  }
  return table;
}

Complex superposition(const ChannelInstance& channel, const PhaseConfig& config) {
  if (config.size() != channel.size()) {
    throw DimensionError("configuration has " + std::to_string(config.size()) + " entries, channel has " +
                         std::to_string(channel.size()));
  }
  Complex g = channel.h0();
  for (std::size_t n = 0; n < channel.size(); ++n) {
    if (config.k[n] < 1 || config.k[n] > config.levels) throw InvalidParameter("phase index out of range");
    g += channel.h(n) * std::polar(1.0, config.theta(n));
  }
  return g;
}

double snr_boost(const ChannelInstance& channel, const PhaseConfig& config) {
  return std::norm(superposition(channel, config)) / (channel.beta0() * channel.beta0());
}

double boost_upper_bound(const ChannelInstance& channel) {
  const auto betas = channel.betas();
  const double total = std::accumulate(betas.begin(), betas.end(), channel.beta0());
  return total * total / (channel.beta0() * channel.beta0());
}

double distance(const Vec3& a, const Vec3& b) { return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z); }

void ScenarioGeometry::validate() const {
  if (!(distance(tx_pos, irs_pos) > 0.0) || !(distance(irs_pos, rx_pos) > 0.0) || !(distance(tx_pos, rx_pos) > 0.0)) {
    throw InvalidParameter("transmitter, IRS and receiver positions must be pairwise distinct");
  }
}

double direct_pathloss_db(double meters) { return 32.6 + 36.7 * std::log10(meters); }

double reflect_pathloss_db(double meters) { return 30.0 + 22.0 * std::log10(meters); }

ChannelInstance sample_channel(const ScenarioGeometry& geometry, std::size_t N, const RandomStream& stream) {
  geometry.validate();
  if (N == 0) throw InvalidParameter("channel needs at least one reflective element");
  const double direct_gain = std::pow(10.0, -direct_pathloss_db(distance(geometry.tx_pos, geometry.rx_pos)) / 20.0);
  const double cascade_gain =
      std::pow(10.0, -(reflect_pathloss_db(distance(geometry.tx_pos, geometry.irs_pos)) +
                       reflect_pathloss_db(distance(geometry.irs_pos, geometry.rx_pos))) /
                         20.0);

  auto e0 = stream.child(0).engine();
  Complex h0 = direct_gain * complex_gaussian(e0, 1.0);
  std::vector<Complex> h(N);
  for (std::size_t n = 0; n < N; ++n) {
    auto e = stream.child(n + 1).engine();
    const Complex tx_fade = complex_gaussian(e, 1.0);
    const Complex rx_fade = complex_gaussian(e, 1.0);
    h[n] = cascade_gain * tx_fade * rx_fade;
  }
  return ChannelInstance(h0, std::move(h));
}

ChannelInstance adversarial_instance(int K, double beta0, double beta, double eps) {
  const Codebook codebook(K);
  const double half = codebook.omega() / 2.0;
  if (!(eps > 0.0 && eps < half)) throw InvalidParameter("eps must lie strictly inside (0, omega/2)");
  if (!(beta0 > 0.0) || !(beta >= 0.0)) throw InvalidParameter("magnitudes must satisfy beta0 > 0, beta >= 0");
  const double angle = half - eps;
  return ChannelInstance(Complex(beta0, 0.0), {std::polar(beta, angle), std::polar(beta, -angle)});
}

}  // namespace irsbf
