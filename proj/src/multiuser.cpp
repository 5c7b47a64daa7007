#include "irsbf/multiuser.hpp"

#include <cmath>

#include "irsbf/errors.hpp"

namespace irsbf {

std::vector<Vec3> default_receivers(const ScenarioGeometry& geometry) {
  return {geometry.rx_pos, {0.0, 1.0, 0.0}, {1.0, 0.0, 0.0}, {1.0, 1.0, 0.0}};
}

MultiUserChannel sample_mu_channel(const ScenarioGeometry& geometry, std::span<const Vec3> receivers, std::size_t N,
                                   std::size_t M, const RandomStream& stream, MultiUserOptions options) {
  if (receivers.empty()) throw InvalidParameter("need at least one receiver");
  if (N == 0 || M == 0) throw InvalidParameter("need at least one element and one transmit antenna");
  const std::size_t L = receivers.size();
  std::vector<double> direct_gain(L);
  std::vector<double> rx_gain(L);
  for (std::size_t l = 0; l < L; ++l) {
    ScenarioGeometry g = geometry;
    g.rx_pos = receivers[l];
    g.validate();
    direct_gain[l] = std::pow(10.0, -direct_pathloss_db(distance(g.tx_pos, g.rx_pos)) / 20.0);
    rx_gain[l] = std::pow(10.0, -reflect_pathloss_db(distance(g.irs_pos, g.rx_pos)) / 20.0);
  }
  const double tx_gain = std::pow(10.0, -reflect_pathloss_db(distance(geometry.tx_pos, geometry.irs_pos)) / 20.0);

  MultiUserChannel ch;
  ch.antennas = M;
  ch.users = L;
  ch.elements = N;
  ch.direct.resize(L * M);
  ch.cascade.resize(N * L * M);

  auto e0 = stream.child(0).engine();
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t m = 0; m < M; ++m) ch.direct[l * M + m] = direct_gain[l] * complex_gaussian(e0, 1.0);
  }

  std::vector<Complex> a(M);
  std::vector<Complex> b(L);
  for (std::size_t n = 0; n < N; ++n) {
    auto e = stream.child(n + 1).engine();
    if (options.independent_cascade) {
      for (std::size_t l = 0; l < L; ++l) {
        for (std::size_t m = 0; m < M; ++m) {
          const Complex tx_fade = complex_gaussian(e, 1.0);
          const Complex rx_fade = complex_gaussian(e, 1.0);
          ch.cascade[(n * L + l) * M + m] = tx_gain * rx_gain[l] * tx_fade * rx_fade;
        }
      }
      continue;
    }
    for (auto& v : a) v = complex_gaussian(e, 1.0);
    for (auto& v : b) v = complex_gaussian(e, 1.0);
    for (std::size_t l = 0; l < L; ++l) {
      for (std::size_t m = 0; m < M; ++m) ch.cascade[(n * L + l) * M + m] = tx_gain * rx_gain[l] * a[m] * b[l];
    }
  }
  return ch;
}

Precoder random_precoder(std::size_t M, std::size_t L, double tx_power, const RandomStream& stream) {
  if (M == 0 || L == 0) throw InvalidParameter("precoder needs M >= 1 and L >= 1");
  Precoder p;
  p.antennas = M;
  p.users = L;
  p.weights.resize(M * L);
  p.stream_power = tx_power / static_cast<double>(L);
  for (std::size_t l = 0; l < L; ++l) {
    auto e = stream.child(l).engine();
    double norm2 = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      const Complex z = complex_gaussian(e, 1.0);
      p.weights[m * L + l] = z;
      norm2 += std::norm(z);
    }
    const double scale = 1.0 / std::sqrt(norm2);
    for (std::size_t m = 0; m < M; ++m) p.weights[m * L + l] *= scale;
  }
  return p;
}

SumSeEvaluator::SumSeEvaluator(const MultiUserChannel& channel, const Precoder& precoder, const Codebook& codebook,
                               double noise_power)
    : users_(channel.users),
      elements_(channel.elements),
      levels_(codebook.levels()),
      stream_power_(precoder.stream_power),
      noise_power_(noise_power) {
  if (precoder.antennas != channel.antennas || precoder.users != channel.users) {
    throw DimensionError("precoder shape does not match the channel");
  }
  if (!(noise_power > 0.0)) throw InvalidParameter("sum SE needs a positive noise power");
  const std::size_t L = users_;
  const std::size_t M = channel.antennas;
  const auto K = static_cast<std::size_t>(levels_);

  direct_gain_.assign(L * L, Complex{});
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t j = 0; j < L; ++j) {
      Complex s{};
      for (std::size_t m = 0; m < M; ++m) s += channel.direct_at(l, m) * precoder.at(m, j);
      direct_gain_[l * L + j] = s;
    }
  }

  level_gain_.assign(elements_ * K * L * L, Complex{});
  for (std::size_t n = 0; n < elements_; ++n) {
    for (std::size_t l = 0; l < L; ++l) {
      for (std::size_t j = 0; j < L; ++j) {
        Complex s{};
        for (std::size_t m = 0; m < M; ++m) s += channel.cascade_at(n, l, m) * precoder.at(m, j);
        for (std::size_t k = 1; k <= K; ++k) {
          level_gain_[((n * K + k - 1) * L + l) * L + j] = s * std::polar(1.0, codebook.phase(static_cast<int>(k)));
        }
      }
    }
  }
}

double SumSeEvaluator::operator()(std::span<const int> row) const {
  if (row.size() != elements_) throw DimensionError("configuration length does not match the channel");
  const std::size_t L = users_;
  const auto K = static_cast<std::size_t>(levels_);
  std::vector<Complex> gain = direct_gain_;
  for (std::size_t n = 0; n < elements_; ++n) {
    const Complex* cell = &level_gain_[(n * K + static_cast<std::size_t>(row[n] - 1)) * L * L];
    for (std::size_t i = 0; i < L * L; ++i) gain[i] += cell[i];
  }
  double total = 0.0;
  for (std::size_t l = 0; l < L; ++l) {
    double interference = 0.0;
    for (std::size_t j = 0; j < L; ++j) {
      if (j != l) interference += stream_power_ * std::norm(gain[l * L + j]);
    }
    const double sinr = stream_power_ * std::norm(gain[l * L + l]) / (interference + noise_power_);
    total += std::log2(1.0 + sinr);
  }
  return total;
}

double sum_se(const MultiUserChannel& channel, const Precoder& precoder, const PhaseConfig& config,
              double noise_power) {
  const Codebook codebook(config.levels);
  validate_config(config, channel.elements, codebook);
  return SumSeEvaluator(channel, precoder, codebook, noise_power)(config.k);
}

UtilityDataset sum_se_utilities(const SumSeEvaluator& evaluator, ConfigMatrix configs) {
  UtilityDataset out;
  out.utilities.reserve(configs.rows());
  for (std::size_t t = 0; t < configs.rows(); ++t) out.utilities.push_back(evaluator(configs.row(t)));
  out.configs = std::move(configs);
  return out;
}

}  // namespace irsbf
