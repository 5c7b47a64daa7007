#include "irsbf/cli_io.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

#include "irsbf/errors.hpp"
#include "irsbf/random.hpp"

namespace irsbf {

namespace {

constexpr std::size_t kMaxElements = 1'000'000;
constexpr int kMaxLevels = 4096;
constexpr std::size_t kMaxSamples = 1'000'000'000;

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

template <typename T>
T parse_number(std::string_view s) {
  T value{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end || s.empty()) throw InvalidParameter("malformed number '" + std::string(s) + "'");
  return value;
}

double parse_real(std::string_view s) {
  const double v = parse_number<double>(s);
  if (!std::isfinite(v)) throw InvalidParameter("value must be finite");
  return v;
}

std::size_t parse_count(std::string_view s, std::size_t lo, std::size_t hi, std::string_view what) {
  if (!s.empty() && s.front() == '-') throw InvalidParameter(std::string(what) + " must be nonnegative");
  const auto v = parse_number<std::size_t>(s);
  if (v < lo || v > hi) {
    throw InvalidParameter(std::string(what) + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                           "], got " + std::to_string(v));
  }
  return v;
}

int parse_levels(std::string_view s) {
  const int v = parse_number<int>(s);
  if (v < 2) throw InvalidParameter("K must be >= 2, got " + std::to_string(v));
  if (v > kMaxLevels) throw InvalidParameter("K must be <= " + std::to_string(kMaxLevels));
  return v;
}

bool parse_bool(std::string_view s) {
  if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
  if (s == "false" || s == "no" || s == "0" || s == "off") return false;
  throw InvalidParameter("expected a boolean, got '" + std::string(s) + "'");
}

Vec3 parse_vec3(std::string_view s) {
  const auto parts = split_list(s);
  if (parts.size() != 3) throw InvalidParameter("expected three comma-separated coordinates");
  return {parse_real(parts[0]), parse_real(parts[1]), parse_real(parts[2])};
}

std::vector<std::size_t> parse_counts(std::string_view s, std::size_t lo, std::size_t hi, std::string_view what) {
  std::vector<std::size_t> out;
  for (auto p : split_list(s)) out.push_back(parse_count(p, lo, hi, what));
  return out;
}

std::vector<double> parse_reals(std::string_view s) {
  std::vector<double> out;
  for (auto p : split_list(s)) out.push_back(parse_real(p));
  return out;
}

std::string show(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string show(const Vec3& v) { return show(v.x) + ", " + show(v.y) + ", " + show(v.z); }

template <typename T>
std::string show_list(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_floating_point_v<T>) {
      out += show(xs[i]);
    } else {
      out += std::to_string(xs[i]);
    }
  }
  return out;
}

std::string rule_name(SampleRuleKind k) {
  switch (k) {
    case SampleRuleKind::kCsmLaw: return "csm-law";
    case SampleRuleKind::kRmsLaw: return "rms-law";
    case SampleRuleKind::kFixed: return "fixed";
  }
  return "fixed";
}

using Setter = std::function<void(RunConfig&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"scenario.tx_pos", [](RunConfig& c, std::string_view v) { c.geometry.tx_pos = parse_vec3(v); }},
      {"scenario.irs_pos", [](RunConfig& c, std::string_view v) { c.geometry.irs_pos = parse_vec3(v); }},
      {"scenario.rx_pos", [](RunConfig& c, std::string_view v) { c.geometry.rx_pos = parse_vec3(v); }},
      {"scenario.tx_power_dbm", [](RunConfig& c, std::string_view v) { c.geometry.tx_power_dbm = parse_real(v); }},
      {"scenario.noise_power_dbm",
       [](RunConfig& c, std::string_view v) { c.geometry.noise_power_dbm = parse_real(v); }},
      {"scenario.N", [](RunConfig& c, std::string_view v) { c.N = parse_count(v, 1, kMaxElements, "N"); }},
      {"scenario.K", [](RunConfig& c, std::string_view v) { c.K = parse_levels(v); }},
      {"scenario.T", [](RunConfig& c, std::string_view v) { c.T = parse_count(v, 1, kMaxSamples, "T"); }},
      {"run.algorithms",
       [](RunConfig& c, std::string_view v) {
         c.algorithms.clear();
         for (auto name : split_list(v)) c.algorithms.push_back(parse_algorithm(name));
       }},
      {"run.complex_mode", [](RunConfig& c, std::string_view v) { c.complex_mode = parse_bool(v); }},
      {"run.common_symbol", [](RunConfig& c, std::string_view v) { c.common_symbol = parse_bool(v); }},
      {"run.noiseless", [](RunConfig& c, std::string_view v) { c.noiseless = parse_bool(v); }},
      {"run.ecsm_derotate", [](RunConfig& c, std::string_view v) { c.ecsm_derotate = parse_bool(v); }},
      {"run.export_dataset", [](RunConfig& c, std::string_view v) { c.export_dataset = parse_bool(v); }},
      {"run.probes", [](RunConfig& c, std::string_view v) { c.probes = parse_count(v, 1, kMaxSamples, "probes"); }},
      {"run.seed", [](RunConfig& c, std::string_view v) { c.seed = parse_number<std::uint64_t>(v); }},
      {"run.output", [](RunConfig& c, std::string_view v) { c.output = std::string(v); }},
      {"scaling.algorithm", [](RunConfig& c, std::string_view v) { c.scaling_algorithm = parse_algorithm(v); }},
      {"scaling.n_list",
       [](RunConfig& c, std::string_view v) { c.scaling_n = parse_counts(v, 2, kMaxElements, "n_list entry"); }},
      {"scaling.t_rule", [](RunConfig& c, std::string_view v) { c.scaling_rule = parse_sample_rule(v); }},
      {"scaling.t_fixed",
       [](RunConfig& c, std::string_view v) { c.scaling_fixed_t = parse_count(v, 1, kMaxSamples, "t_fixed"); }},
      {"scaling.t_cap",
       [](RunConfig& c, std::string_view v) { c.scaling_t_cap = parse_count(v, 1, kMaxSamples, "t_cap"); }},
      {"scaling.trials",
       [](RunConfig& c, std::string_view v) { c.scaling_trials = parse_count(v, 1, kMaxSamples, "trials"); }},
      {"scaling.slope_min", [](RunConfig& c, std::string_view v) { c.slope_min = parse_real(v); }},
      {"scaling.slope_max", [](RunConfig& c, std::string_view v) { c.slope_max = parse_real(v); }},
      {"cdf.trials", [](RunConfig& c, std::string_view v) { c.cdf_trials = parse_count(v, 1, kMaxSamples, "trials"); }},
      {"adversarial.K", [](RunConfig& c, std::string_view v) { c.adversarial_K = parse_levels(v); }},
      {"adversarial.beta_ratio",
       [](RunConfig& c, std::string_view v) {
         c.adversarial_beta_ratio = parse_real(v);
         if (c.adversarial_beta_ratio < 0.0) throw InvalidParameter("beta_ratio must be >= 0");
       }},
      {"adversarial.eps", [](RunConfig& c, std::string_view v) { c.adversarial_eps = parse_reals(v); }},
      {"multiuser.antennas",
       [](RunConfig& c, std::string_view v) { c.mu_antennas = parse_count(v, 1, 1024, "antennas"); }},
      {"multiuser.users", [](RunConfig& c, std::string_view v) { c.mu_users = parse_count(v, 1, 4, "users"); }},
      {"multiuser.trials",
       [](RunConfig& c, std::string_view v) { c.mu_trials = parse_count(v, 1, kMaxSamples, "trials"); }},
      {"checks.noise_trials",
       [](RunConfig& c, std::string_view v) { c.noise_trials = parse_count(v, 1, kMaxSamples, "noise_trials"); }},
      {"checks.noise_t",
       [](RunConfig& c, std::string_view v) { c.noise_t = parse_counts(v, 1, kMaxSamples, "noise_t entry"); }},
      {"checks.tail_trials",
       [](RunConfig& c, std::string_view v) { c.tail_trials = parse_count(v, 1, kMaxSamples, "tail_trials"); }},
      {"checks.tail_N", [](RunConfig& c, std::string_view v) { c.tail_N = parse_count(v, 1, kMaxElements, "tail_N"); }},
      {"checks.ccdf_trials",
       [](RunConfig& c, std::string_view v) { c.ccdf_trials = parse_count(v, 1, kMaxSamples, "ccdf_trials"); }},
      {"checks.ccdf_n",
       [](RunConfig& c, std::string_view v) { c.ccdf_n = parse_counts(v, 1, kMaxElements, "ccdf_n entry"); }},
      {"checks.approx_instances",
       [](RunConfig& c, std::string_view v) {
         c.approx_instances = parse_count(v, 1, kMaxSamples, "approx_instances");
       }},
  };
  return table;
}

const std::vector<std::string> kSections = {"scenario", "run", "scaling", "cdf", "adversarial", "multiuser", "checks"};

}  // namespace

RunConfig parse_config(std::string_view text) {
  RunConfig config;
  std::string section;
  std::size_t line_no = 0;
  std::size_t geometry_line = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (std::find(kSections.begin(), kSections.end(), section) == kSections.end()) {
        throw ParseError(line_no, "unknown section [" + section + "]");
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "missing key");
    if (value.empty()) throw ParseError(line_no, "missing value for '" + std::string(key) + "'");

    const auto& table = setters();
    auto it = table.end();
    if (section.empty()) {
      it = table.find("scenario." + std::string(key));
      if (it == table.end()) it = table.find("run." + std::string(key));
    } else {
      it = table.find(section + "." + std::string(key));
    }
    if (it == table.end()) throw ParseError(line_no, "unknown key '" + std::string(key) + "'");
    try {
      it->second(config, value);
    } catch (const std::exception& e) {
      throw ParseError(line_no, std::string(key) + ": " + e.what());
    }
    if (key.ends_with("_pos")) geometry_line = line_no;
  }
  try {
    config.geometry.validate();
  } catch (const std::exception& e) {
    throw ParseError(geometry_line, e.what());
  }
  if (config.algorithms.empty()) throw ParseError(0, "no algorithms selected");
  return config;
}

std::string to_text(const RunConfig& c) {
  std::ostringstream out;
  out << "[scenario]\n"
      << "tx_pos = " << show(c.geometry.tx_pos) << '\n'
      << "irs_pos = " << show(c.geometry.irs_pos) << '\n'
      << "rx_pos = " << show(c.geometry.rx_pos) << '\n'
      << "tx_power_dbm = " << show(c.geometry.tx_power_dbm) << '\n'
      << "noise_power_dbm = " << show(c.geometry.noise_power_dbm) << '\n'
      << "N = " << c.N << "\nK = " << c.K << "\nT = " << c.T << '\n';
  out << "\n[run]\nalgorithms = ";
  for (std::size_t i = 0; i < c.algorithms.size(); ++i) out << (i ? ", " : "") << algorithm_name(c.algorithms[i]);
  out << "\ncomplex_mode = " << std::boolalpha << c.complex_mode << "\ncommon_symbol = " << c.common_symbol
      << "\nnoiseless = " << c.noiseless << "\necsm_derotate = " << c.ecsm_derotate
      << "\nexport_dataset = " << c.export_dataset << "\nprobes = " << c.probes << "\nseed = " << c.seed
      << "\noutput = " << c.output << '\n';
  out << "\n[scaling]\nalgorithm = " << algorithm_name(c.scaling_algorithm) << "\nn_list = " << show_list(c.scaling_n)
      << "\nt_rule = " << rule_name(c.scaling_rule) << "\nt_fixed = " << c.scaling_fixed_t
      << "\nt_cap = " << c.scaling_t_cap << "\ntrials = " << c.scaling_trials << '\n';
  if (c.slope_min) out << "slope_min = " << show(*c.slope_min) << '\n';
  if (c.slope_max) out << "slope_max = " << show(*c.slope_max) << '\n';
  out << "\n[cdf]\ntrials = " << c.cdf_trials << '\n';
  out << "\n[adversarial]\nK = " << c.adversarial_K << "\nbeta_ratio = " << show(c.adversarial_beta_ratio)
      << "\neps = " << show_list(c.adversarial_eps) << '\n';
  out << "\n[multiuser]\nantennas = " << c.mu_antennas << "\nusers = " << c.mu_users << "\ntrials = " << c.mu_trials
      << '\n';
  out << "\n[checks]\nnoise_trials = " << c.noise_trials << "\nnoise_t = " << show_list(c.noise_t)
      << "\ntail_trials = " << c.tail_trials << "\ntail_N = " << c.tail_N << "\nccdf_trials = " << c.ccdf_trials
      << "\nccdf_n = " << show_list(c.ccdf_n) << "\napprox_instances = " << c.approx_instances << '\n';
  return out.str();
}

std::uint64_t config_hash(const RunConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_text(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string provenance(const RunConfig& config) {
  std::ostringstream s;
  s << "irsbf " << kToolVersion << " config=" << std::hex << std::setw(16) << std::setfill('0') << config_hash(config)
    << std::dec << " seed=" << config.seed;
  return s.str();
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"simulate", "scaling", "cdf", "adversarial", "checks", "multiuser"};
  return names;
}

namespace {

BlindRunOptions blind_options(const RunConfig& c) {
  BlindRunOptions o;
  o.tx_power = c.geometry.tx_power_watts();
  o.noise_power = c.noiseless ? 0.0 : c.geometry.noise_power_watts();
  o.samples = c.T;
  o.common_symbol = c.common_symbol;
  o.probes = c.probes;
  o.noiseless_evaluator = c.noiseless;
  o.ecsm.derotate = c.ecsm_derotate;
  return o;
}

RandomStream simulate_stream(const RunConfig& c) { return RandomStream(c.seed).child(StreamId::kTrial, 0); }

ExperimentReport simulate(const RunConfig& c) {
  const Codebook codebook(c.K);
  const RandomStream ts = simulate_stream(c);
  const ChannelInstance channel = sample_channel(c.geometry, c.N, ts.child(StreamId::kChannel));
  const auto results = run_algorithms(channel, codebook, c.algorithms, blind_options(c), ts);
  const double bound = boost_upper_bound(channel);

  ExperimentReport report;
  bool within = true;
  for (std::size_t a = 0; a < c.algorithms.size(); ++a) {
    const auto name = std::string(algorithm_name(c.algorithms[a]));
    const std::size_t T = needs_samples(c.algorithms[a]) ? c.T : 0;
    const double boost = snr_boost(channel, results[a].config);
    within = within && boost <= bound * (1.0 + 1e-12);
    report.rows.push_back({ts.seed(), name, c.N, c.K, T, "boost", boost});
    report.rows.push_back({ts.seed(), name, c.N, c.K, T, "boost_db", linear_to_db(boost)});
    for (const auto& [key, value] : results[a].diagnostics) {
      report.rows.push_back({ts.seed(), name, c.N, c.K, T, "diag_" + key, value});
    }
    report.summary["boost_db"][name] = linear_to_db(boost);
  }
  report.rows.push_back({ts.seed(), "bound", c.N, c.K, 0, "boost_db", linear_to_db(bound)});
  report.summary["upper_bound_db"] = linear_to_db(bound);
  report.set_check("boosts_within_upper_bound", within);
  return report;
}

ExperimentReport scaling(const RunConfig& c, std::size_t threads) {
  ScalingParams p;
  p.algorithm = c.scaling_algorithm;
  p.N_list = c.scaling_n;
  p.K = c.K;
  p.rule = SampleRule{c.scaling_rule, c.scaling_fixed_t, c.scaling_t_cap};
  p.trials = c.scaling_trials;
  p.seed = c.seed;
  p.geometry = c.geometry;
  p.noiseless = c.noiseless;
  p.probes = c.probes;
  p.threads = threads;
  auto report = scaling_experiment(p);
  const bool rms_like = c.scaling_algorithm == Algorithm::kRms;
  const double lo = c.slope_min.value_or(rms_like ? 0.7 : 1.8);
  const double hi = c.slope_max.value_or(rms_like ? 1.3 : 2.2);
  const double slope = report.summary["slope"].get<double>();
  report.summary["slope_window"] = {lo, hi};
  report.set_check("slope_in_window", slope >= lo && slope <= hi);
  return report;
}

ExperimentReport checks(const RunConfig& c, std::size_t threads) {
  ExperimentReport report;
  auto& pass = report.summary["pass"];

  NoiseMaxParams noise;
  noise.noise_power = c.geometry.noise_power_watts();
  noise.T_list = c.noise_t;
  noise.trials = c.noise_trials;
  noise.seed = c.seed;
  auto noise_report = noise_max_check(noise);
  pass["noise_max"] = noise_report.passed();
  report.absorb("noise_max", std::move(noise_report));

  const Codebook codebook(c.K);
  TailBoundParams tail;
  tail.trials = c.tail_trials;
  tail.seed = c.seed;
  const auto channel = sample_channel(c.geometry, c.tail_N, RandomStream(c.seed).child(StreamId::kChannel));
  auto tail_report = tail_bound_check(channel, codebook, tail);
  pass["tail_bound"] = tail_report.passed();
  report.absorb("tail_bound", std::move(tail_report));

  CcdfGapParams ccdf;
  ccdf.geometry = c.geometry;
  ccdf.N_list = c.ccdf_n;
  ccdf.K = c.K;
  ccdf.trials = c.ccdf_trials;
  ccdf.seed = c.seed;
  ccdf.threads = threads;
  auto ccdf_report = ccdf_gap_check(ccdf);
  pass["ccdf_gap"] = ccdf_report.passed();
  report.absorb("ccdf_gap", std::move(ccdf_report));

  ApproxRatioParams approx;
  approx.instances = c.approx_instances;
  approx.seed = c.seed;
  approx.geometry = c.geometry;
  approx.threads = threads;
  auto approx_report = approx_ratio_check(approx);
  pass["approx_ratio"] = approx_report.passed();
  report.absorb("approx_ratio", std::move(approx_report));
  return report;
}

}  // namespace

RunOutcome execute(std::string_view subcommand, const RunConfig& c, std::size_t threads) {
  RunOutcome out;
  if (subcommand == "simulate") {
    out.report = simulate(c);
  } else if (subcommand == "scaling") {
    out.report = scaling(c, threads);
  } else if (subcommand == "cdf") {
    CdfParams p;
    p.algorithms = c.algorithms;
    p.N = c.N;
    p.K = c.K;
    p.T = c.T;
    p.trials = c.cdf_trials;
    p.seed = c.seed;
    p.geometry = c.geometry;
    p.probes = c.probes;
    p.noiseless_evaluator = c.noiseless;
    p.threads = threads;
    out.report = cdf_experiment(p);
  } else if (subcommand == "adversarial") {
    AdversarialParams p;
    p.K = c.adversarial_K;
    p.beta = c.adversarial_beta_ratio;
    p.eps_grid = c.adversarial_eps;
    out.report = adversarial_experiment(p);
  } else if (subcommand == "checks") {
    out.report = checks(c, threads);
  } else if (subcommand == "multiuser") {
    MultiUserParams p;
    p.N = c.N;
    p.K = c.K;
    p.T = c.T;
    p.M = c.mu_antennas;
    p.L = c.mu_users;
    p.trials = c.mu_trials;
    p.seed = c.seed;
    p.geometry = c.geometry;
    p.min_wins_over_off = (c.mu_trials * 9 + 9) / 10;
    p.threads = threads;
    out.report = multiuser_experiment(p);
  } else {
    throw InvalidParameter("unknown subcommand '" + std::string(subcommand) + "'");
  }
  out.exit_code = out.report.passed() ? kExitOk : kExitCheckFailed;
  return out;
}

int run(std::string_view subcommand, const RunConfig& config, const std::filesystem::path& out_dir,
        std::size_t threads) {
  const RunOutcome outcome = execute(subcommand, config, threads);
  std::filesystem::create_directories(out_dir);
  const std::string name(subcommand);
  const std::string stamp = provenance(config);
  {
    std::ofstream csv(out_dir / (name + ".csv"));
    write_report_csv(outcome.report, csv, stamp);
    if (!csv) throw std::runtime_error("failed writing " + (out_dir / (name + ".csv")).string());
  }
  {
    nlohmann::json doc;
    doc["provenance"] = stamp;
    doc["subcommand"] = name;
    doc["passed"] = outcome.report.passed();
    doc["summary"] = outcome.report.summary;
    std::ofstream js(out_dir / (name + ".json"));
    js << doc.dump(2) << '\n';
    if (!js) throw std::runtime_error("failed writing " + (out_dir / (name + ".json")).string());
  }
  if (subcommand == "simulate" && config.export_dataset) {
    const RandomStream ts = simulate_stream(config);
    const Codebook codebook(config.K);
    const auto channel = sample_channel(config.geometry, config.N, ts.child(StreamId::kChannel));
    const auto dataset = simulate_dataset(
        channel, draw_samples(config.N, codebook, config.T, ts.child(StreamId::kSamples)),
        config.geometry.tx_power_watts(), config.noiseless ? 0.0 : config.geometry.noise_power_watts(),
        ts.child(StreamId::kNoise), SimulationOptions{config.complex_mode, config.common_symbol});
    std::ofstream csv(out_dir / "dataset.csv");
    csv << "# " << stamp << '\n';
    write_dataset_csv(dataset, csv);
  }
  return outcome.exit_code;
}

}  // namespace irsbf
