#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "irsbf/errors.hpp"
#include "irsbf/experiments.hpp"

using namespace irsbf;

namespace {

std::string csv_of(const ExperimentReport& r) {
  std::ostringstream out;
  write_report_csv(r, out, "test");
  return out.str();
}

double harmonic(std::size_t T) {
  double h = 0.0;
  for (std::size_t i = 1; i <= T; ++i) h += 1.0 / static_cast<double>(i);
  return h;
}

}  // namespace

TEST_CASE("algorithm names round trip") {
  for (auto a : {Algorithm::kCpp, Algorithm::kRms, Algorithm::kCsm, Algorithm::kCsmSumOfSquares, Algorithm::kEcsm,
                 Algorithm::kOff, Algorithm::kOptimal}) {
    CHECK(parse_algorithm(algorithm_name(a)) == a);
  }
  CHECK_THROWS_AS(parse_algorithm("sdr"), InvalidParameter);
  CHECK(needs_samples(Algorithm::kCsm));
  CHECK_FALSE(needs_samples(Algorithm::kCpp));
}

TEST_CASE("report helpers") {
  const std::vector<double> x{1, 2, 4, 8};
  const std::vector<double> y{3, 12, 48, 192};
  CHECK(fit_loglog_slope(x, y) == doctest::Approx(2.0));
  CHECK(quantile({3, 1, 2}, 0.5) == doctest::Approx(2.0));
  CHECK(quantile({1, 2, 3, 4}, 0.25) == doctest::Approx(1.75));
  CHECK(quantile({5}, 0.9) == 5.0);

  ExperimentReport r;
  r.rows.push_back({7, "csm", 4, 2, 10, "boost", 1.0 / 3.0});
  CHECK(r.passed());
  r.set_check("a", true);
  ExperimentReport other;
  other.set_check("b", false);
  r.absorb("sub", other);
  CHECK_FALSE(r.passed());
  CHECK(r.summary["checks"].contains("sub.b"));
  const auto text = csv_of(r);
  CHECK(text == "# test\nseed,algorithm,N,K,T,metric,value\n7,csm,4,2,10,boost,0.333333333333\n");
}

TEST_CASE("sample rules") {
  const SampleRule csm_law{SampleRuleKind::kCsmLaw};
  CHECK(csm_law.samples(16) == static_cast<std::size_t>(std::ceil(256 * std::pow(std::log(16.0), 3))));
  CHECK(csm_law.samples(128) == 1'871'503);
  CHECK(csm_law.samples(256) == 5'000'000);
  CHECK(SampleRule{SampleRuleKind::kRmsLaw}.samples(128) == static_cast<std::size_t>(std::ceil(std::pow(128.0, 0.4))));
  CHECK(SampleRule{SampleRuleKind::kFixed, 321}.samples(10) == 321);
  CHECK(parse_sample_rule("rms-law") == SampleRuleKind::kRmsLaw);
  CHECK_THROWS_AS(parse_sample_rule("cubic"), InvalidParameter);
}

TEST_CASE("brute force optimum") {
  const Codebook cb(4);
  const ScenarioGeometry geo;
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto ch = sample_channel(geo, 1, RandomStream(s));
    CHECK(brute_force_opt(ch, cb).config == cpp(ch, cb).config);
  }
  const auto adv = adversarial_instance(2, 1.0, 1.0, 1e-4);
  CHECK(brute_force_opt(adv, Codebook(2)).boost == doctest::Approx(5.0).epsilon(1e-3));
  const auto big = sample_channel(geo, 21, RandomStream(1));
  CHECK_THROWS_AS(brute_force_opt(big, Codebook(2)), BudgetExceeded);

  // nothing beats the optimum
  std::mt19937_64 g(3);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto ch = sample_channel(geo, 6, RandomStream(100 + s));
    const auto best = brute_force_opt(ch, cb).boost;
    const std::vector<Algorithm> algs{Algorithm::kCpp, Algorithm::kRms, Algorithm::kCsm, Algorithm::kCsmSumOfSquares,
                                      Algorithm::kEcsm, Algorithm::kOff, Algorithm::kOptimal};
    BlindRunOptions opt;
    opt.samples = 400;
    opt.noise_power = geo.noise_power_watts();
    const auto res = run_algorithms(ch, cb, algs, opt, RandomStream(s));
    for (const auto& r : res) CHECK(snr_boost(ch, r.config) <= best * (1 + 1e-12));
    CHECK(snr_boost(ch, res.back().config) == doctest::Approx(best));
  }
}

TEST_CASE("blind algorithms see one shared sample stream") {
  const ScenarioGeometry geo;
  const Codebook cb(4);
  const auto ch = sample_channel(geo, 10, RandomStream(4));
  BlindRunOptions opt;
  opt.samples = 300;
  opt.noise_power = geo.noise_power_watts();
  const RandomStream s(8);
  const std::vector<Algorithm> both{Algorithm::kRms, Algorithm::kCsm};
  const std::vector<Algorithm> only{Algorithm::kCsm};
  const auto a = run_algorithms(ch, cb, both, opt, s);
  const auto b = run_algorithms(ch, cb, only, opt, s);
  CHECK(a[1].config == b[0].config);

  const auto data = simulate_dataset(ch, draw_samples(10, cb, 300, s.child(StreamId::kSamples)), opt.tx_power,
                                     opt.noise_power, s.child(StreamId::kNoise), {});
  CHECK(csm(conditional_stats(data)).config == b[0].config);
  CHECK(rms(data).config == a[0].config);
}

TEST_CASE("scaling experiment with the CSI oracle") {
  ScalingParams p;
  p.algorithm = Algorithm::kCpp;
  p.trials = 50;
  const auto r = scaling_experiment(p);
  const double slope = r.summary["slope"].get<double>();
  CHECK(slope >= 1.8);
  CHECK(slope <= 2.2);

  ScalingParams q;
  q.algorithm = Algorithm::kCsm;
  q.N_list = {16, 32};
  q.trials = 5;
  q.rule = SampleRule{SampleRuleKind::kFixed, 20'000};
  const auto c = scaling_experiment(q);
  const auto means = c.summary["mean_boost"].get<std::vector<double>>();
  const auto cpp_means = c.summary["cpp_mean_boost"].get<std::vector<double>>();
  for (std::size_t i = 0; i < means.size(); ++i) CHECK(cpp_means[i] >= means[i]);
  q.threads = 3;
  CHECK(csv_of(scaling_experiment(q)) == csv_of(c));
}

TEST_CASE("cdf experiment") {
  CdfParams p;
  p.algorithms = {Algorithm::kCsm, Algorithm::kCpp};
  p.N = 64;
  p.T = 100'000;
  p.trials = 15;
  p.geometry.noise_power_dbm = -400.0;
  const auto r = cdf_experiment(p);
  const double gap = r.summary["quantiles_db"]["cpp"]["median"].get<double>() -
                     r.summary["quantiles_db"]["csm"]["median"].get<double>();
  CHECK(gap <= 1.0);

  CdfParams one;
  one.trials = 1;
  one.N = 20;
  one.T = 50;
  const auto single = cdf_experiment(one);
  CHECK(single.rows.size() == one.algorithms.size());
  for (const auto& a : one.algorithms) {
    const auto& q = single.summary["quantiles_db"][std::string(algorithm_name(a))];
    CHECK(q["p10"].get<double>() == q["p90"].get<double>());
  }
}

TEST_CASE("noise maximum against the harmonic-number oracle") {
  // E[max of T unit exponentials] = H_T, so the ratio tends to H_T / ln T.
  NoiseMaxParams p;
  p.T_list = {1, 100, 1000};
  p.trials = 3000;
  const auto r = noise_max_check(p);
  CHECK(r.passed());
  const auto ratios = r.summary["ratios"];
  CHECK(r.summary["skipped_T"].size() == 1);
  REQUIRE(ratios.size() == 2);
  CHECK(ratios[0].get<double>() == doctest::Approx(harmonic(100) / std::log(100.0)).epsilon(0.03));
  CHECK(ratios[1].get<double>() == doctest::Approx(harmonic(1000) / std::log(1000.0)).epsilon(0.03));
  for (const auto& x : ratios) {
    CHECK(x.get<double>() >= 0.6);
    CHECK(x.get<double>() <= 2.3);
  }
}

TEST_CASE("tail bound") {
  const Codebook cb(4);
  const auto ch = sample_channel(ScenarioGeometry{}, 64, RandomStream(3));
  TailBoundParams p;
  p.trials = 20'000;
  CHECK(tail_bound_check(ch, cb, p).passed());

  const ChannelInstance flat({0.5, 0.0}, {0.0, 0.0});
  p.tau_grid = {0.0, 0.99, 1.01};
  const auto r = tail_bound_check(flat, cb, p);
  CHECK(r.passed());
  CHECK(r.rows[0].value == 1.0);  // tau = 0
  CHECK(r.rows[2].value == 1.0);
  CHECK(r.rows[4].value == 0.0);
}

TEST_CASE("ccdf gap") {
  CcdfGapParams p;
  p.trials = 20'000;
  p.N_list = {16, 256};
  const auto r = ccdf_gap_check(p);
  CHECK(r.passed());
  const auto lambdas = r.summary["lambda"].get<std::vector<double>>();
  const auto ch = sample_channel(p.geometry, 256, RandomStream(p.seed).child(StreamId::kChannel));
  double strength = ch.beta0() * ch.beta0();
  for (double b : ch.betas()) strength += b * b;
  const double P = p.geometry.tx_power_watts();
  CHECK(lambdas[1] == doctest::Approx(1.0 / (strength * P + p.geometry.noise_power_watts())).epsilon(1e-12));
}

TEST_CASE("approximation ratios") {
  ApproxRatioParams p;
  p.instances = 200;
  const auto r = approx_ratio_check(p);
  CHECK(r.passed());
  CHECK(r.summary["ratios"]["K2"]["min_enhanced"].get<double>() >= 0.5);
  CHECK(r.summary["ratios"]["K4"]["min_cpp"].get<double>() >= 0.5 - 1e-12);

  AdversarialParams adv;
  adv.eps_grid = {1e-4};
  const auto a = adversarial_experiment(adv);
  CHECK(a.passed());
  double cpp_db = 0, ecsm_db = 0, opt_db = 0;
  for (const auto& row : a.rows) {
    if (row.algorithm == "cpp") cpp_db = row.value;
    if (row.algorithm == "ecsm") ecsm_db = row.value;
    if (row.algorithm == "opt") opt_db = row.value;
  }
  CHECK(std::pow(10.0, (cpp_db - opt_db) / 10) == doctest::Approx(0.2).epsilon(1e-3));
  CHECK(std::pow(10.0, (ecsm_db - opt_db) / 10) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("upper bound over small instances") {
  UpperBoundParams p;
  p.instances = 100;
  CHECK(upper_bound_check(p).passed());
}

TEST_CASE("reports do not depend on thread count") {
  ApproxRatioParams p;
  p.instances = 40;
  p.threads = 1;
  const auto one = csv_of(approx_ratio_check(p));
  p.threads = 4;
  CHECK(csv_of(approx_ratio_check(p)) == one);

  MultiUserParams m;
  m.N = 32;
  m.T = 200;
  m.trials = 6;
  m.threads = 1;
  const auto mu1 = csv_of(multiuser_experiment(m));
  m.threads = 5;
  CHECK(csv_of(multiuser_experiment(m)) == mu1);
}
