#include "irsbf/algorithms.hpp"

#include <cmath>
#include <limits>

#include "irsbf/errors.hpp"

namespace irsbf {

namespace {

constexpr double kTieTolerance = 1e-12;

// Largest valid bucket of element n by `value`; smallest k wins ties. 0 when all buckets are empty.
template <typename Value>
int argmax_level(const ConditionalStats& stats, std::size_t n, Value value) {
  int best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int k = 1; k <= stats.levels; ++k) {
    if (!stats.valid(n, k)) continue;
    const double v = value(n, k);
    if (best == 0 || v > best_value) {
      best = k;
      best_value = v;
    }
  }
  return best;
}

void require_all_buckets(const ConditionalStats& stats) {
  if (stats.empty_buckets() > 0) {
    throw InsufficientSamples(std::to_string(stats.empty_buckets()) + " empty buckets; estimator needs every level");
  }
}

}  // namespace

int round_to_codebook(double angle, const Codebook& codebook) {
  int best = 1;
  double best_distance = circular_distance(codebook.phase(1), angle);
  for (int k = 2; k <= codebook.levels(); ++k) {
    const double d = circular_distance(codebook.phase(k), angle);
    if (d < best_distance - kTieTolerance) {
      best = k;
      best_distance = d;
    }
  }
  return best;
}

AlgorithmResult cpp(const ChannelInstance& channel, const Codebook& codebook) {
  AlgorithmResult result;
  result.config.levels = codebook.levels();
  for (double gap : phase_gaps(channel)) result.config.k.push_back(round_to_codebook(gap, codebook));
  return result;
}

AlgorithmResult rms(const SampleDataset& dataset) {
  if (dataset.size() == 0) throw InsufficientSamples("random-max sampling needs at least one sample");
  std::size_t best = 0;
  for (std::size_t t = 1; t < dataset.size(); ++t) {
    if (dataset.powers[t] > dataset.powers[best]) best = t;
  }
  AlgorithmResult result{dataset.configs.config(best), {}};
  result.diagnostics["best_sample"] = static_cast<double>(best + 1);
  result.diagnostics["best_power"] = dataset.powers[best];
  return result;
}

AlgorithmResult csm(const ConditionalStats& stats) {
  AlgorithmResult result;
  result.config.levels = stats.levels;
  result.config.k.resize(stats.elements);
  for (std::size_t n = 0; n < stats.elements; ++n) {
    const int k = argmax_level(stats, n, [&](std::size_t i, int j) { return stats.mean(i, j); });
    if (k == 0) throw InsufficientSamples("element " + std::to_string(n + 1) + " has no samples at any level");
    result.config.k[n] = k;
  }
  result.diagnostics["empty_buckets"] = static_cast<double>(stats.empty_buckets());
  return result;
}

AlgorithmResult csm_generic(const UtilityDataset& utilities, const Codebook& codebook) {
  const auto& configs = utilities.configs;
  if (configs.rows() != utilities.utilities.size()) throw DimensionError("one utility per configuration required");
  if (configs.rows() == 0) throw InsufficientSamples("no utility samples");
  if (configs.levels() != codebook.levels()) throw InvalidParameter("utility samples use a different codebook");
  ConditionalAccumulator acc(configs.cols(), codebook.levels(), false);
  for (std::size_t t = 0; t < configs.rows(); ++t) {
    const double u = utilities.utilities[t];
    if (!std::isfinite(u)) throw InvalidParameter("utility " + std::to_string(t + 1) + " is not finite");
    acc.add(configs.row(t), u);
  }
  return csm(acc.finish());
}

DeltaEstimate ls_square_of_max(const ConditionalStats& stats) {
  DeltaEstimate out;
  out.config.levels = stats.levels;
  out.undefined.assign(stats.elements, false);
  const double omega = kTwoPi / stats.levels;
  for (std::size_t n = 0; n < stats.elements; ++n) {
    const int k0 = argmax_level(stats, n, [&](std::size_t i, int j) { return stats.centered_at(i, j); });
    if (k0 == 0) throw InsufficientSamples("element " + std::to_string(n + 1) + " has no samples at any level");
    out.delta_hat.push_back(canonical_angle(k0 * omega));
    out.config.k.push_back(k0);
  }
  return out;
}

DeltaEstimate ls_sum_of_squares(const ConditionalStats& stats) {
  require_all_buckets(stats);
  const Codebook codebook(stats.levels);
  DeltaEstimate out;
  out.config.levels = stats.levels;
  out.undefined.assign(stats.elements, false);
  for (std::size_t n = 0; n < stats.elements; ++n) {
    double e = 0.0;
    double f = 0.0;
    for (int k = 1; k <= stats.levels; ++k) {
      e += stats.centered_at(n, k) * std::sin(codebook.phase(k));
      f += stats.centered_at(n, k) * std::cos(codebook.phase(k));
    }
    if (e == 0.0 && f == 0.0) {
      out.undefined[n] = true;
      out.delta_hat.push_back(0.0);
      out.config.k.push_back(1);
      continue;
    }
    // -arctan(F/E) + pi/2 for E >= 0 and -arctan(F/E) - pi/2 for E < 0 is atan2(E, F);
    // atan2 also gets E = -0 right.
    const double delta = canonical_angle(std::atan2(e, f));
    out.delta_hat.push_back(delta);
    out.config.k.push_back(round_to_codebook(delta, codebook));
  }
  return out;
}

EcsmCandidates ecsm_candidates(const ConditionalStats& stats, const EcsmOptions& options) {
  const Codebook codebook(stats.levels);
  EcsmCandidates c;
  c.csm = csm(stats).config;
  c.primed = c.csm;

  double reference = 0.0;
  if (stats.levels == 2) {
    if (!stats.cond_mean_signal || !stats.grand_mean_signal) {
      throw MissingData("binary-phase ECSM needs complex conditional means (complex mode, common symbol)");
    }
    if (options.derotate) reference = std::arg(*stats.grand_mean_signal);
  }
  const Complex derotation = std::polar(1.0, -reference);

  for (std::size_t n = 0; n < stats.elements; ++n) {
    const int k = c.csm.k[n];
    bool rotate = false;
    if (stats.levels == 2) {
      rotate = (derotation * (*stats.cond_mean_signal)[stats.index(n, k)]).imag() >= 0.0;
    } else {
      const int up = codebook.wrap(k + 1);
      const int down = codebook.wrap(k - 1);
      // An empty bucket reads as -infinity; both empty leaves the element in place.
      if (stats.valid(n, up) && stats.valid(n, down)) {
        rotate = stats.mean(n, up) - stats.mean(n, down) >= 0.0;
      } else {
        rotate = stats.valid(n, up);
      }
    }
    if (rotate) {
      c.primed.k[n] = codebook.wrap(k + 1);
      ++c.rotated;
    }
  }
  c.triple_primed = c.primed;
  for (int& k : c.triple_primed.k) k = codebook.wrap(k - 1);
  return c;
}

AlgorithmResult ecsm(const ConditionalStats& stats, const CandidateEvaluator& evaluator, const EcsmOptions& options) {
  const EcsmCandidates c = ecsm_candidates(stats, options);
  const PhaseConfig* candidates[] = {&c.primed, &c.csm, &c.triple_primed};

  AlgorithmResult result;
  std::size_t best = 0;
  double best_power = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < 3; ++i) {
    const double power = evaluator(*candidates[i], i);
    result.diagnostics["candidate_power_" + std::to_string(i)] = power;
    if (power > best_power) {
      best = i;
      best_power = power;
    }
  }
  result.config = *candidates[best];
  result.diagnostics["chosen_candidate"] = static_cast<double>(best);
  result.diagnostics["rotated_elements"] = static_cast<double>(c.rotated);
  result.diagnostics["empty_buckets"] = static_cast<double>(stats.empty_buckets());
  return result;
}

PhaseConfig off_config(std::size_t N, const Codebook& codebook) {
  return PhaseConfig{codebook.levels(), std::vector<int>(N, codebook.levels())};
}

}  // namespace irsbf
