#include "doqkd/channel_detector.hpp"
#include "doqkd/info_rates.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace doqkd;

namespace {

struct Defaults {
  SourceParams source = SourceParams::from_dimension(8.0);
  DetectorParams detector = DetectorParams::defaults_for(source);
  ChannelParams channel = ChannelParams::defaults_for(source);
};

double uniform(std::mt19937_64& r, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(r);
}

}  // namespace

TEST_CASE("g entropy values") {
  CHECK(g_entropy(0.5) == 0.0);
  CHECK(g_entropy(0.5 - 5e-10) == 0.0);
  CHECK(g_entropy(1.5) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(g_entropy(1.0) == doctest::Approx(fixtures::kG1).epsilon(1e-14));
  CHECK_THROWS_AS(g_entropy(0.49), std::invalid_argument);
  CHECK_THROWS_AS(g_entropy(NAN), std::invalid_argument);
}

TEST_CASE("g entropy is increasing and convex") {
  const double h = 1e-3;
  for (double nu = 0.51; nu < 50.0; nu += 0.137) {
    const double a = g_entropy(nu - h), b = g_entropy(nu), c = g_entropy(nu + h);
    CHECK(c > b);
    CHECK(b > a);
    CHECK(a + c - 2.0 * b < 0.0);
  }
}

TEST_CASE("worst-case Holevo information") {
  const auto s = SourceParams::from_dimension(8.0);
  const auto zero = holevo_worst_case(s, 0.0);
  CHECK(zero.chi == 0.0);
  CHECK(zero.worst.eta == 0.0);
  CHECK(zero.worst.epsilon == 0.0);

  const auto w = holevo_worst_case(s, 0.21);
  CHECK(w.chi == doctest::Approx(fixtures::kChiWorst021).epsilon(1e-9));
  CHECK(w.worst.eta == doctest::Approx(fixtures::kEtaWorst021).epsilon(1e-6));
  CHECK(w.worst.satisfies_constraint(8.0));
  CHECK(check_attack_admissible(s, w.worst).admissible());

  const auto w30 = holevo_worst_case(s, 0.30);
  CHECK(w30.chi == doctest::Approx(fixtures::kChiWorst030).epsilon(1e-9));
  CHECK(w30.chi >= w.chi);

  const auto k3 = holevo_worst_case(SourceParams::from_dimension(8.0, 1.0, 3.0), 0.21);
  CHECK(k3.chi == doctest::Approx(fixtures::kChiWorst021K3).epsilon(1e-9));

  CHECK_THROWS_AS(holevo_worst_case(s, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(holevo_worst_case(s, NAN), std::invalid_argument);
}

TEST_CASE("Holevo search backends agree") {
  const auto s = SourceParams::from_dimension(16.0);
  const auto a = holevo_worst_case(s, 0.17, {}, Backend::Serial);
  const auto b = holevo_worst_case(s, 0.17, {}, Backend::Parallel);
  CHECK(a.chi == b.chi);
  CHECK(a.worst.eta == b.worst.eta);
}

TEST_CASE("Holevo information is nonnegative and vanishes only without noise") {
  std::mt19937_64 r(7);
  for (int i = 0; i < 50; ++i) {
    const double d = uniform(r, 2.0, 64.0);
    const auto s = SourceParams::from_dimension(d, 1.0, uniform(r, 0.3, 3.0));
    const double xi = uniform(r, 1e-3, 0.8);
    const double eta = uniform(r, 0.0, 1.0) * eta_upper_bound(xi, d);
    CHECK(holevo_information(s, eta, epsilon_from_eta(eta, xi, d)) >= -1e-12);
    CHECK(holevo_worst_case(s, xi).chi > 1e-6);
  }
  CHECK(std::abs(holevo_information(SourceParams::from_dimension(8.0), 0.0, 0.0)) < 1e-6);
}

TEST_CASE("profile marks inadmissible points") {
  const auto s = SourceParams::from_dimension(8.0);
  const double top = eta_upper_bound(0.21, 8.0);
  const std::vector<double> etas = {-1e-3, 0.0, 0.5 * top, top, 2.0 * top};
  std::vector<double> out(etas.size());
  holevo_profile(s, 0.21, etas, out, Backend::Serial);
  CHECK(std::isinf(out[0]));
  CHECK(std::isfinite(out[1]));
  CHECK(std::isfinite(out[2]));
  CHECK(std::isfinite(out[3]));
  CHECK(std::isinf(out[4]));
}

TEST_CASE("arrival time law") {
  const auto s = SourceParams::from_dimension(8.0);
  const auto law = arrival_time_law(s, 0.21, 2.0 / 3.0);
  CHECK(law.var_a == doctest::Approx(64.0 + 1.21 / 4.0 + 4.0 / 9.0));
  CHECK(law.cov == doctest::Approx(64.0 - 1.21 / 4.0));
  CHECK(gaussian_mutual_information(law) == doctest::Approx(fixtures::kContinuousMi).epsilon(1e-12));
  CHECK_THROWS_AS(arrival_time_law(s, 0.21, -1.0), std::invalid_argument);
}

TEST_CASE("binned Shannon information fixtures") {
  Defaults def;
  const auto link = link_statistics(def.channel, def.detector);
  const double i0 = shannon_information(def.source, def.detector, link, 0.21);
  CHECK(i0 == doctest::Approx(fixtures::kBinnedMiDefaults).epsilon(1e-8));
  CHECK(i0 > 1.9);
  CHECK(i0 < 3.0);
  CHECK(i0 < gaussian_mutual_information(arrival_time_law(def.source, 0.21, 2.0 / 3.0)));

  auto far = def.channel;
  far.length_km = 200.0;
  const double i200 = shannon_information(def.source, def.detector, link_statistics(far, def.detector), 0.21);
  CHECK(i200 == doctest::Approx(fixtures::kBinnedMi200km).epsilon(1e-8));

  auto clean = def.detector;
  clean.jitter_rms = 0.0;
  const double inoise = shannon_information(def.source, clean, link_statistics(def.channel, clean), 0.0);
  CHECK(inoise == doctest::Approx(fixtures::kBinnedMiNoiseless).epsilon(1e-8));
  CHECK(std::abs(inoise - 3.0) < 0.01);
}

TEST_CASE("accidental-only links carry no information") {
  Defaults def;
  LinkStatistics link;
  link.frame_duration = 64.0;
  link.p_dark_dark = 1e-6;
  link.p_accidental_coincidence = 1e-6;
  CHECK(std::abs(shannon_information(def.source, def.detector, link, 0.21)) < 1e-12);
  link.p_alice_signal_bob_dark = 1e-3;
  link.p_accidental_coincidence += 1e-3;
  CHECK(std::abs(shannon_information(def.source, def.detector, link, 0.21)) < 1e-12);
}

TEST_CASE("Shannon information is monotone in jitter and accidental fraction") {
  Defaults def;
  std::mt19937_64 r(99);
  for (int i = 0; i < 10; ++i) {
    const double xi = uniform(r, 0.0, 0.5);
    auto det = def.detector;
    det.jitter_rms = uniform(r, 0.0, 1.5);
    auto link = link_statistics(def.channel, det);
    const double base = shannon_information(def.source, det, link, xi);
    CHECK(base >= 0.0);
    CHECK(base <= 3.0);

    auto det2 = det;
    det2.jitter_rms += uniform(r, 0.05, 0.5);
    CHECK(shannon_information(def.source, det2, link, xi) <= base + 1e-12);

    auto noisier = link;
    const double f = uniform(r, 1.5, 50.0);
    noisier.p_alice_signal_bob_dark *= f;
    noisier.p_alice_dark_bob_signal *= f;
    noisier.p_dark_dark *= f;
    CHECK(shannon_information(def.source, det, noisier, xi) <= base + 1e-12);
  }
}

TEST_CASE("data processing at the worst-case noise") {
  Defaults def;
  const auto link = link_statistics(def.channel, def.detector);
  CHECK(shannon_information(def.source, def.detector, link, 0.21) <=
        shannon_information(def.source, def.detector, link, 0.0));
}

TEST_CASE("asymptotic rate") {
  RateParams p;
  CHECK(asymptotic_rate(p, 2.5, 0.3) == doctest::Approx(1.95).epsilon(1e-15));
  CHECK(asymptotic_rate(RateParams{1.0}, 2.2, 0.0) == 2.2);
  CHECK(asymptotic_rate(p, 2.156, 0.0) == doctest::Approx(1.94).epsilon(1e-3));
  CHECK(asymptotic_rate(p, 0.1, 0.3) < 0.0);
  CHECK_THROWS_AS(asymptotic_rate(RateParams{0.0}, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(asymptotic_rate(RateParams{1.1}, 1.0, 0.0), std::invalid_argument);

  const auto s = SourceParams::from_dimension(8.0);
  const auto w = holevo_worst_case(s, 0.21);
  const auto b = info_breakdown(p, 2.5, w);
  CHECK(b.r_do == doctest::Approx(0.9 * 2.5 - w.chi));
  CHECK(b.worst_eta == w.worst.eta);
}
