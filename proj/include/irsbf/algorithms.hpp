#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "irsbf/core_model.hpp"
#include "irsbf/sampling.hpp"

namespace irsbf {

struct AlgorithmResult {
  PhaseConfig config;
  std::map<std::string, double> diagnostics;
};

/// Scalar utilities U_t observed for T random configurations.
struct UtilityDataset {
  ConfigMatrix configs;
  std::vector<double> utilities;
};

/// Nearest codebook index to `angle` on the circle; near-ties (1e-12 rad) go to the smaller k.
int round_to_codebook(double angle, const Codebook& codebook);

/// Closest point projection. Needs full channel knowledge, so it serves as the oracle baseline.
AlgorithmResult cpp(const ChannelInstance& channel, const Codebook& codebook);

/// Random-max sampling: the sample with the largest measured power (first one on ties).
AlgorithmResult rms(const SampleDataset& dataset);

/// Conditional sample mean: per element, the level whose bucket has the largest mean power.
/// Empty buckets are skipped and counted in diagnostics["empty_buckets"].
AlgorithmResult csm(const ConditionalStats& stats);

/// CSM over an arbitrary per-sample utility instead of received power.
AlgorithmResult csm_generic(const UtilityDataset& utilities, const Codebook& codebook);

struct DeltaEstimate {
  std::vector<double> delta_hat;  // radians in [0, 2*pi)
  PhaseConfig config;
  std::vector<bool> undefined;  // element had E_n = F_n = 0; config falls back to k = 1
};

/// Square-of-max least-squares estimate: Delta_n = k0 w with k0 = argmax_k J_nk.
DeltaEstimate ls_square_of_max(const ConditionalStats& stats);

/// Sum-of-squares least-squares estimate from the centered statistics, rounded onto the codebook.
DeltaEstimate ls_sum_of_squares(const ConditionalStats& stats);

struct EcsmOptions {
  /// K = 2 only: measure Im{.} relative to the phase of the grand mean signal
  /// instead of the raw receiver axis.
  bool derotate = true;
};

/// The three ECSM candidates: theta' (rotated into the upper sector pair),
/// theta'' (the CSM solution) and theta''' = theta' - w.
struct EcsmCandidates {
  PhaseConfig primed;
  PhaseConfig csm;
  PhaseConfig triple_primed;
  std::size_t rotated = 0;  // elements with Lambda_n = 1
};

EcsmCandidates ecsm_candidates(const ConditionalStats& stats, const EcsmOptions& options = {});

/// Enhanced CSM: best of the three candidates under `evaluator`, called with candidate ids 0, 1, 2.
AlgorithmResult ecsm(const ConditionalStats& stats, const CandidateEvaluator& evaluator,
                     const EcsmOptions& options = {});

/// Every element at index K (phase 2*pi, i.e. no shift).
PhaseConfig off_config(std::size_t N, const Codebook& codebook);

}  // namespace irsbf
