#include <cmath>

#include "doctest.h"
#include "irsbf/errors.hpp"
#include "irsbf/multiuser.hpp"

using namespace irsbf;

namespace {

// SINR sum straight from the definition, without the evaluator's precomputation.
double reference_sum_se(const MultiUserChannel& ch, const Precoder& w, const PhaseConfig& c, double s2) {
  double total = 0.0;
  for (std::size_t l = 0; l < ch.users; ++l) {
    std::vector<Complex> row(ch.antennas);
    for (std::size_t m = 0; m < ch.antennas; ++m) {
      row[m] = ch.direct_at(l, m);
      for (std::size_t n = 0; n < ch.elements; ++n) row[m] += std::polar(1.0, c.theta(n)) * ch.cascade_at(n, l, m);
    }
    double signal = 0.0, interference = 0.0;
    for (std::size_t j = 0; j < ch.users; ++j) {
      Complex y = 0.0;
      for (std::size_t m = 0; m < ch.antennas; ++m) y += row[m] * w.at(m, j);
      (j == l ? signal : interference) += w.stream_power * std::norm(y);
    }
    total += std::log2(1.0 + signal / (interference + s2));
  }
  return total;
}

}  // namespace

TEST_CASE("single antenna single user reduces to the scalar channel") {
  const ScenarioGeometry geo;
  const std::vector<Vec3> rx{geo.rx_pos};
  const auto mu = sample_mu_channel(geo, rx, 20, 1, RandomStream(6));
  const auto su = sample_channel(geo, 20, RandomStream(6));
  CHECK(mu.direct_at(0, 0) == su.h0());
  for (std::size_t n = 0; n < 20; ++n) CHECK(std::abs(mu.cascade_at(n, 0, 0) - su.h(n)) <= 1e-14 * std::abs(su.h(n)));

  Precoder w{1, 1, {Complex(1.0, 0.0)}, geo.tx_power_watts()};
  const PhaseConfig c{4, std::vector<int>(20, 3)};
  const double s2 = geo.noise_power_watts();
  CHECK(sum_se(mu, w, c, s2) ==
        doctest::Approx(std::log2(1.0 + w.stream_power * std::norm(superposition(su, c)) / s2)).epsilon(1e-12));
}

TEST_CASE("reference receivers") {
  const ScenarioGeometry geo;
  const auto rx = default_receivers(geo);
  REQUIRE(rx.size() == 4);
  CHECK(rx[0] == geo.rx_pos);
  CHECK(distance(rx[1], geo.irs_pos) == doctest::Approx(std::sqrt(8.0)));
  CHECK(distance(rx[2], geo.irs_pos) == doctest::Approx(std::sqrt(10.0)));
  CHECK(distance(rx[3], geo.irs_pos) == doctest::Approx(std::sqrt(13.0)));

  const auto a = sample_mu_channel(geo, rx, 8, 4, RandomStream(2));
  const auto b = sample_mu_channel(geo, rx, 8, 4, RandomStream(2));
  CHECK(a.direct == b.direct);
  CHECK(a.cascade == b.cascade);
  CHECK(a.direct.size() == 16);
  CHECK(a.cascade.size() == 8 * 16);
}

TEST_CASE("cascade is rank one per element unless requested otherwise") {
  const ScenarioGeometry geo;
  const auto rx = default_receivers(geo);
  const auto ch = sample_mu_channel(geo, rx, 5, 3, RandomStream(4));
  for (std::size_t n = 0; n < 5; ++n) {
    // every 2x2 minor of b a^T vanishes
    for (std::size_t l = 1; l < 4; ++l) {
      for (std::size_t m = 1; m < 3; ++m) {
        const Complex minor = ch.cascade_at(n, 0, 0) * ch.cascade_at(n, l, m) - ch.cascade_at(n, 0, m) * ch.cascade_at(n, l, 0);
        CHECK(std::abs(minor) <= 1e-12 * std::abs(ch.cascade_at(n, 0, 0) * ch.cascade_at(n, l, m)));
      }
    }
  }
  const auto ind = sample_mu_channel(geo, rx, 5, 3, RandomStream(4), {true});
  const Complex minor = ind.cascade_at(0, 0, 0) * ind.cascade_at(0, 1, 1) - ind.cascade_at(0, 0, 1) * ind.cascade_at(0, 1, 0);
  CHECK(std::abs(minor) > 1e-6 * std::abs(ind.cascade_at(0, 0, 0) * ind.cascade_at(0, 1, 1)));
}

TEST_CASE("random precoder") {
  const auto w = random_precoder(4, 3, 2.0, RandomStream(1));
  CHECK(w.stream_power == doctest::Approx(2.0 / 3.0));
  for (std::size_t l = 0; l < 3; ++l) {
    double norm = 0.0;
    for (std::size_t m = 0; m < 4; ++m) norm += std::norm(w.at(m, l));
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
  }
  const auto one = random_precoder(1, 1, 1.0, RandomStream(1));
  CHECK(std::abs(one.at(0, 0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(random_precoder(4, 3, 2.0, RandomStream(2)).weights != w.weights);
}

TEST_CASE("sum spectral efficiency") {
  // orthogonal rows with matched columns: no interference
  MultiUserChannel ch;
  ch.antennas = 2;
  ch.users = 2;
  ch.elements = 1;
  ch.direct = {Complex(2.0, 0.0), 0.0, 0.0, Complex(0.0, 3.0)};
  ch.cascade.assign(4, 0.0);
  Precoder w{2, 2, {Complex(1.0, 0.0), 0.0, 0.0, Complex(1.0, 0.0)}, 0.5};
  const PhaseConfig c{2, {1}};
  CHECK(sum_se(ch, w, c, 0.1) == doctest::Approx(std::log2(1 + 0.5 * 4 / 0.1) + std::log2(1 + 0.5 * 9 / 0.1)));

  // more power never hurts without interference
  Precoder louder = w;
  louder.stream_power = 2.0;
  CHECK(sum_se(ch, louder, c, 0.1) >= sum_se(ch, w, c, 0.1));

  const ScenarioGeometry geo;
  const auto rx = default_receivers(geo);
  const Codebook cb(4);
  const double s2 = geo.noise_power_watts();
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto mu = sample_mu_channel(geo, rx, 30, 4, RandomStream(s));
    const auto p = random_precoder(4, 4, geo.tx_power_watts(), RandomStream(100 + s));
    const auto rows = draw_samples(30, cb, 5, RandomStream(200 + s));
    const SumSeEvaluator eval(mu, p, cb, s2);
    for (std::size_t t = 0; t < rows.rows(); ++t) {
      const auto cfg = rows.config(t);
      const double v = sum_se(mu, p, cfg, s2);
      CHECK(std::isfinite(v));
      CHECK(v >= 0.0);
      CHECK(v == doctest::Approx(reference_sum_se(mu, p, cfg, s2)).epsilon(1e-9));
      CHECK(eval(rows.row(t)) == doctest::Approx(v).epsilon(1e-9));

      // a common phase on every channel row leaves the utility unchanged
      auto turned = mu;
      const Complex r = std::polar(1.0, 0.7 + s);
      for (auto& x : turned.direct) x *= r;
      for (auto& x : turned.cascade) x *= r;
      CHECK(sum_se(turned, p, cfg, s2) == doctest::Approx(v).epsilon(1e-9));
    }
  }
}

TEST_CASE("generalized csm beats the sample average on sum SE") {
  const ScenarioGeometry geo;
  const auto rx = default_receivers(geo);
  const Codebook cb(4);
  const double s2 = geo.noise_power_watts();
  std::size_t wins = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const RandomStream ts = RandomStream(77).child(s);
    const auto mu = sample_mu_channel(geo, rx, 64, 4, ts.child(StreamId::kChannel));
    const auto p = random_precoder(4, 4, geo.tx_power_watts(), ts.child(StreamId::kPrecoder));
    const SumSeEvaluator eval(mu, p, cb, s2);
    const auto u = sum_se_utilities(eval, draw_samples(64, cb, 2000, ts.child(StreamId::kSamples)));
    double average = 0.0;
    for (double x : u.utilities) average += x;
    average /= static_cast<double>(u.utilities.size());
    wins += sum_se(mu, p, csm_generic(u, cb).config, s2) >= average;
  }
  CHECK(wins >= 90);
}
