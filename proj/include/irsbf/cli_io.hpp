#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "irsbf/core_model.hpp"
#include "irsbf/experiments.hpp"

namespace irsbf {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Everything one CLI invocation needs. Defaults reproduce the reference
/// single-user scenario (30 dBm, -90 dBm, N = T = 500, K = 4).
struct RunConfig {
  ScenarioGeometry geometry;
  std::size_t N = 500;
  int K = 4;
  std::size_t T = 500;
  std::vector<Algorithm> algorithms{Algorithm::kCpp, Algorithm::kRms, Algorithm::kCsm,
                                    Algorithm::kCsmSumOfSquares, Algorithm::kEcsm, Algorithm::kOff};
  bool complex_mode = false;
  bool common_symbol = true;
  bool noiseless = false;
  bool ecsm_derotate = true;
  bool export_dataset = false;
  std::size_t probes = 100;
  std::uint64_t seed = 1;
  std::string output = "out";

  // [scaling]
  Algorithm scaling_algorithm = Algorithm::kCsm;
  std::vector<std::size_t> scaling_n{16, 32, 64, 128};
  SampleRuleKind scaling_rule = SampleRuleKind::kCsmLaw;
  std::size_t scaling_fixed_t = 500;
  std::size_t scaling_t_cap = 5'000'000;
  std::size_t scaling_trials = 50;
  std::optional<double> slope_min;
  std::optional<double> slope_max;

  // [cdf]
  std::size_t cdf_trials = 200;

  // [adversarial]
  int adversarial_K = 2;
  double adversarial_beta_ratio = 1.0;
  std::vector<double> adversarial_eps{1e-1, 1e-2, 1e-3, 1e-4};

  // [multiuser]
  std::size_t mu_antennas = 4;
  std::size_t mu_users = 4;
  std::size_t mu_trials = 100;

  // [checks]
  std::size_t noise_trials = 2000;
  std::vector<std::size_t> noise_t{100, 1000, 10000};
  std::size_t tail_trials = 100'000;
  std::size_t tail_N = 64;
  std::size_t ccdf_trials = 100'000;
  std::vector<std::size_t> ccdf_n{16, 64, 256};
  std::size_t approx_instances = 1000;
};

/// Parses the `key = value` / `[section]` format. Blank lines and `#` comments
/// are ignored; keys outside any section belong to [scenario] or [run].
/// Throws ParseError naming the offending line.
RunConfig parse_config(std::string_view text);

/// Canonical `key = value` rendering; parse_config(to_text(c)) == c.
std::string to_text(const RunConfig& config);

/// 64-bit FNV-1a of the canonical text.
std::uint64_t config_hash(const RunConfig& config);

/// `irsbf <version> config=<hash> seed=<seed>`.
std::string provenance(const RunConfig& config);

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitCheckFailed = 2;

struct RunOutcome {
  ExperimentReport report;
  int exit_code = kExitOk;
};

/// Executes `subcommand` (simulate, scaling, cdf, adversarial, checks, multiuser)
/// without touching the filesystem. Throws InvalidParameter on an unknown subcommand.
RunOutcome execute(std::string_view subcommand, const RunConfig& config, std::size_t threads);

/// execute() plus output files `<out>/<subcommand>.csv` and `<out>/<subcommand>.json`
/// (and `<out>/dataset.csv` for simulate with export_dataset). Returns the exit code.
int run(std::string_view subcommand, const RunConfig& config, const std::filesystem::path& out_dir,
        std::size_t threads);

const std::vector<std::string>& subcommands();

}  // namespace irsbf
