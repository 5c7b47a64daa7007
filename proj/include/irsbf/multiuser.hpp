#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "irsbf/algorithms.hpp"
#include "irsbf/core_model.hpp"
#include "irsbf/random.hpp"
#include "irsbf/sampling.hpp"

namespace irsbf {

/// M-antenna transmitter, L single-antenna receivers, N reflective elements.
struct MultiUserChannel {
  std::size_t antennas = 1;  // M
  std::size_t users = 1;     // L
  std::size_t elements = 1;  // N
  std::vector<Complex> direct;   // L x M, row-major
  std::vector<Complex> cascade;  // N x L x M: element n's contribution to user l, antenna m

  Complex direct_at(std::size_t l, std::size_t m) const { return direct[l * antennas + m]; }
  Complex cascade_at(std::size_t n, std::size_t l, std::size_t m) const {
    return cascade[(n * users + l) * antennas + m];
  }
};

struct MultiUserOptions {
  /// Draw every (n, l, m) cascade entry independently instead of the rank-1 product b_n a_n^T.
  bool independent_cascade = false;
};

/// The reference receiver plus three neighbours at (0,1,0), (1,0,0), (1,1,0).
std::vector<Vec3> default_receivers(const ScenarioGeometry& geometry);

/// Rayleigh-faded multi-user channel. Element n's fades come from substream n + 1
/// and the direct links from substream 0, so L = M = 1 reproduces sample_channel.
MultiUserChannel sample_mu_channel(const ScenarioGeometry& geometry, std::span<const Vec3> receivers, std::size_t N,
                                   std::size_t M, const RandomStream& stream, MultiUserOptions options = {});

/// Linear precoder: unit-norm columns, transmit power split equally over the L streams.
struct Precoder {
  std::size_t antennas = 1;
  std::size_t users = 1;
  std::vector<Complex> weights;  // M x L, row-major; column l feeds user l
  double stream_power = 0.0;

  Complex at(std::size_t m, std::size_t l) const { return weights[m * users + l]; }
};

/// Columns uniform on the complex unit sphere. L > M is allowed but leaves users
/// without spatial degrees of freedom.
Precoder random_precoder(std::size_t M, std::size_t L, double tx_power, const RandomStream& stream);

/// Evaluates the sum spectral efficiency for many configurations of one
/// (channel, precoder) pair. Precomputes per-level projections onto the precoder columns.
class SumSeEvaluator {
 public:
  SumSeEvaluator(const MultiUserChannel& channel, const Precoder& precoder, const Codebook& codebook,
                 double noise_power);

  /// Bits/s/Hz for the configuration given as 1-based codebook indices.
  double operator()(std::span<const int> row) const;

 private:
  std::size_t users_;
  std::size_t elements_;
  int levels_;
  double stream_power_;
  double noise_power_;
  std::vector<Complex> direct_gain_;  // L x L: direct row l projected on column j
  std::vector<Complex> level_gain_;   // N x K x L x L
};

/// sum_l log2(1 + SINR_l) with the effective channel rows under `config`.
double sum_se(const MultiUserChannel& channel, const Precoder& precoder, const PhaseConfig& config,
              double noise_power);

/// U_t = sum SE of every row of `configs`.
UtilityDataset sum_se_utilities(const SumSeEvaluator& evaluator, ConfigMatrix configs);

}  // namespace irsbf
