#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "irsbf/algorithms.hpp"
#include "irsbf/errors.hpp"
#include "irsbf/experiments.hpp"

using namespace irsbf;
using std::numbers::pi;

namespace {

SampleDataset make_dataset(std::vector<PhaseConfig> rows, std::vector<double> powers) {
  SampleDataset d;
  for (const auto& r : rows) d.configs.push_back(r);
  d.codebook = Codebook(rows.front().levels);
  d.powers = std::move(powers);
  d.tx_power = 1.0;
  return d;
}

ChannelInstance one_element(double delta) { return ChannelInstance({1.0, 0.0}, {std::polar(1.0, -delta)}); }

// Centered statistics J_k = c cos(k w - delta) for one element.
ConditionalStats analytic_stats(int K, double c, double delta) {
  ConditionalStats st;
  st.elements = 1;
  st.levels = K;
  st.samples = K;
  st.bucket_size.assign(K, 1);
  st.grand_mean_power = 3.0;
  for (int k = 1; k <= K; ++k) {
    const double j = c * std::cos(k * kTwoPi / K - delta);
    st.centered.push_back(j);
    st.cond_mean_power.push_back(3.0 + j);
  }
  return st;
}

ChannelInstance random_channel(std::mt19937_64& g, std::size_t N) {
  std::normal_distribution<double> z;
  std::vector<Complex> h(N);
  for (auto& x : h) x = {z(g), z(g)};
  return ChannelInstance({z(g) + 0.01, z(g)}, h);
}

}  // namespace

TEST_CASE("closest point projection") {
  const Codebook cb(4);
  CHECK(cpp(one_element(pi / 2 + 0.1), cb).config.k == std::vector<int>{1});
  CHECK(cpp(one_element(pi / 4), cb).config.k == std::vector<int>{1});
  CHECK(cpp(one_element(0.0), cb).config.k == std::vector<int>{4});
  CHECK(round_to_codebook(kTwoPi - 0.1, cb) == 4);
  CHECK(round_to_codebook(3 * pi / 4, cb) == 1);
  CHECK(round_to_codebook(pi + 0.2, cb) == 2);
}

TEST_CASE("random-max sampling") {
  const auto single = make_dataset({{2, {1, 2}}}, {0.5});
  CHECK(rms(single).config.k == std::vector<int>{1, 2});

  const auto d = make_dataset({{2, {1}}, {2, {2}}, {2, {1}}}, {3, 9, 9});
  const auto r = rms(d);
  CHECK(r.config.k == std::vector<int>{2});
  CHECK(r.diagnostics.at("best_sample") == 2);

  // every configuration of N = 3, K = 2, noiseless
  const ChannelInstance ch(std::polar(1.0, 0.2), {std::polar(0.9, 1.0), std::polar(0.4, 2.5), std::polar(1.3, 4.0)});
  const Codebook cb(2);
  std::vector<PhaseConfig> rows;
  for (int a = 1; a <= 2; ++a)
    for (int b = 1; b <= 2; ++b)
      for (int c = 1; c <= 2; ++c) rows.push_back({2, {a, b, c}});
  ConfigMatrix m;
  for (const auto& row : rows) m.push_back(row);
  const auto data = simulate_dataset(ch, m, 1.0, 0.0, RandomStream(1), {});
  CHECK(snr_boost(ch, rms(data).config) == doctest::Approx(brute_force_opt(ch, cb).boost));
}

TEST_CASE("conditional sample mean") {
  const auto d = make_dataset({{2, {1}}, {2, {2}}, {2, {1}}, {2, {2}}}, {1, 2, 3, 4});
  CHECK(csm(conditional_stats(d)).config.k == std::vector<int>{2});

  // empty bucket is skipped and counted
  const auto e = make_dataset({{3, {1}}, {3, {2}}}, {5, 1});
  const auto r = csm(conditional_stats(e));
  CHECK(r.config.k == std::vector<int>{1});
  CHECK(r.diagnostics.at("empty_buckets") == 1);

  ConditionalStats none;
  none.elements = 1;
  none.levels = 2;
  none.bucket_size = {0, 0};
  none.cond_mean_power = {0, 0};
  none.centered = {0, 0};
  CHECK_THROWS_AS(csm(none), InsufficientSamples);
}

TEST_CASE("conditional sample mean on exact statistics equals cpp") {
  std::mt19937_64 g(4);
  for (int K : {2, 3, 4, 8}) {
    const Codebook cb(K);
    for (int i = 0; i < 50; ++i) {
      const auto ch = random_channel(g, 10);
      CHECK(csm(exact_conditional_stats(ch, cb, 1.0, 0.0)).config == cpp(ch, cb).config);
    }
  }
}

TEST_CASE("conditional sample mean tracks cpp with a strong background path") {
  // The population gap between the best two levels scales with beta_0 beta_n,
  // so a dominant direct path makes element-wise agreement near certain.
  std::mt19937_64 g(9);
  std::normal_distribution<double> z;
  const Codebook cb(4);
  std::vector<Complex> h(16);
  for (auto& x : h) x = {z(g), z(g)};
  const ChannelInstance ch(Complex(8.0, 0.0), h);
  const auto data = simulate_dataset(ch, draw_samples(16, cb, 200'000, RandomStream(3)), 1.0, 0.0, RandomStream(4), {});
  const auto blind = csm(conditional_stats(data)).config;
  const auto oracle = cpp(ch, cb).config;
  std::size_t same = 0;
  for (std::size_t n = 0; n < 16; ++n) same += blind.k[n] == oracle.k[n];
  CHECK(same >= 15);
}

TEST_CASE("csm properties on random datasets") {
  std::mt19937_64 g(10);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t N = 1 + trial % 7;
    const int K = 2 + trial % 5;
    const Codebook cb(K);
    const auto ch = random_channel(g, N);
    auto data = simulate_dataset(ch, draw_samples(N, cb, 300, RandomStream(trial)), 1.0, 0.2,
                                 RandomStream(1000 + trial), {});
    const auto st = conditional_stats(data);
    if (st.empty_buckets() == st.bucket_size.size()) continue;
    const auto base = csm(st).config;
    CHECK(ls_square_of_max(st).config == base);
    CHECK(csm(st).config == base);  // no hidden state
    CHECK(rms(data).config == rms(data).config);

    auto scaled = data;
    for (auto& y : scaled.powers) y = 3.5 * y + 7.0;
    CHECK(csm(conditional_stats(scaled)).config == base);

    UtilityDataset u{data.configs, data.powers};
    CHECK(csm_generic(u, cb).config == base);
  }
}

TEST_CASE("generic csm contracts") {
  const Codebook cb(3);
  const auto m = draw_samples(4, cb, 200, RandomStream(2));
  UtilityDataset flat{m, std::vector<double>(200, 1.25)};
  CHECK(csm_generic(flat, cb).config.k == std::vector<int>(4, 1));

  UtilityDataset short_u{m, std::vector<double>(199, 1.0)};
  CHECK_THROWS_AS(csm_generic(short_u, cb), DimensionError);
  UtilityDataset bad{m, std::vector<double>(200, 1.0)};
  bad.utilities[3] = NAN;
  CHECK_THROWS(csm_generic(bad, cb));
}

TEST_CASE("sum-of-squares phase estimate") {
  const auto zero = ls_sum_of_squares(analytic_stats(4, 0.7, 0.0));
  CHECK(zero.delta_hat[0] == doctest::Approx(0.0));
  CHECK(zero.config.k == std::vector<int>{4});

  const auto third = ls_sum_of_squares(analytic_stats(4, 0.7, pi / 3));
  CHECK(third.delta_hat[0] == doctest::Approx(pi / 3).epsilon(1e-12));
  CHECK(third.config.k == std::vector<int>{1});

  const auto lower = ls_sum_of_squares(analytic_stats(4, 0.7, 1.5 * pi));
  CHECK(lower.delta_hat[0] == doctest::Approx(1.5 * pi).epsilon(1e-12));
  CHECK(lower.config.k == std::vector<int>{3});

  // the trigonometric sums by hand: E = (K/2) c sin(delta), F = (K/2) c cos(delta)
  for (int K : {3, 5, 8}) {
    for (double delta : {0.3, 2.0, 4.0, 6.1}) {
      CHECK(ls_sum_of_squares(analytic_stats(K, 1.0, delta)).delta_hat[0] == doctest::Approx(delta).epsilon(1e-12));
    }
  }

  const auto flat = ls_sum_of_squares(analytic_stats(4, 0.0, 0.0));
  CHECK(flat.undefined[0]);
  CHECK(flat.config.k == std::vector<int>{1});
}

TEST_CASE("enhanced csm on the cancellation instance") {
  const Codebook cb(2);
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    const auto ch = adversarial_instance(2, 1.0, 1.0, eps);
    const auto st = exact_conditional_stats(ch, cb, 1.0, 0.0);
    CHECK(snr_boost(ch, csm(st).config) == doctest::Approx(1.0).epsilon(10 * eps));
    const auto e = ecsm(st, noiseless_evaluator(ch, 1.0));
    CHECK(snr_boost(ch, e.config) == doctest::Approx(5.0).epsilon(10 * eps));
  }
  // rotating every channel by a common phase is undone by the derotation
  const auto base = adversarial_instance(2, 1.0, 1.0, 1e-3);
  const Complex r = std::polar(1.0, 1.1);
  const ChannelInstance turned(base.h0() * r, {base.h(0) * r, base.h(1) * r});
  const auto st = exact_conditional_stats(turned, cb, 1.0, 0.0);
  CHECK(snr_boost(turned, ecsm(st, noiseless_evaluator(turned, 1.0)).config) ==
        doctest::Approx(5.0).epsilon(1e-2));
}

TEST_CASE("binary enhanced csm needs complex means") {
  const Codebook cb(2);
  const auto ch = adversarial_instance(2, 1.0, 1.0, 0.1);
  const auto data = simulate_dataset(ch, draw_samples(2, cb, 100, RandomStream(1)), 1.0, 0.0, RandomStream(2), {});
  CHECK_THROWS_AS(ecsm(conditional_stats(data), noiseless_evaluator(ch, 1.0)), MissingData);
}

TEST_CASE("enhanced csm picks the best candidate") {
  std::mt19937_64 g(12);
  for (int K : {2, 3, 4}) {
    const Codebook cb(K);
    for (int i = 0; i < 40; ++i) {
      const auto ch = random_channel(g, 6);
      const auto st = exact_conditional_stats(ch, cb, 1.0, 0.0);
      const auto cand = ecsm_candidates(st);
      CHECK(cand.csm == csm(st).config);
      const double best = std::max({snr_boost(ch, cand.primed), snr_boost(ch, cand.csm),
                                    snr_boost(ch, cand.triple_primed)});
      const auto chosen = ecsm(st, noiseless_evaluator(ch, 1.0)).config;
      CHECK(snr_boost(ch, chosen) == doctest::Approx(best));
      CHECK(snr_boost(ch, chosen) >= snr_boost(ch, cand.csm));
      for (std::size_t n = 0; n < 6; ++n) CHECK(cb.wrap(cand.primed.k[n] - 1) == cand.triple_primed.k[n]);
    }
  }
}

TEST_CASE("enhanced csm is never below csm with many samples") {
  const Codebook cb(4);
  const ScenarioGeometry geo;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto ch = sample_channel(geo, 12, RandomStream(s));
    const auto data = simulate_dataset(ch, draw_samples(12, cb, 5000, RandomStream(s + 500)), 1.0, 0.0,
                                       RandomStream(s + 900), {});
    const auto st = conditional_stats(data);
    const auto base = snr_boost(ch, csm(st).config);
    CHECK(snr_boost(ch, ecsm(st, noiseless_evaluator(ch, 1.0)).config) >= base);
  }
}

TEST_CASE("off configuration") {
  const Codebook cb(4);
  CHECK(off_config(3, cb).k == std::vector<int>{4, 4, 4});
  const ChannelInstance ch({1.0, 0.0}, {Complex(-0.5, 0.0)});
  CHECK(snr_boost(ch, off_config(1, cb)) == doctest::Approx(0.25));
  const ChannelInstance two({1.0, 0.5}, {Complex(0.3, -0.2), Complex(-0.1, 0.9)});
  CHECK(snr_boost(two, off_config(2, cb)) ==
        doctest::Approx(std::norm(two.h0() + two.h(0) + two.h(1)) / std::norm(two.h0())));
}
