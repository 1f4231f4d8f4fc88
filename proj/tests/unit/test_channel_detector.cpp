#include "doqkd/channel_detector.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace doqkd;

namespace {

struct Defaults {
  SourceParams source = SourceParams::from_dimension(8.0);
  DetectorParams detector = DetectorParams::defaults_for(source);
  ChannelParams channel = ChannelParams::defaults_for(source);
};

void check_ranges(const LinkStatistics& s) {
  for (double x : {s.p_signal_coincidence, s.p_accidental_coincidence, s.signal_fraction,
                   s.p_alice_signal_bob_dark, s.p_alice_dark_bob_signal, s.p_dark_dark}) {
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
  }
}

}  // namespace

TEST_CASE("defaults") {
  Defaults def;
  CHECK(def.detector.efficiency == 0.93);
  CHECK(def.detector.dark_rate == 1000.0);
  CHECK(def.detector.jitter_rms == doctest::Approx(2.0 / 3.0));
  CHECK(def.channel.frame_duration == 64.0);
  CHECK(def.channel.loss_db_per_km == 0.2);
}

TEST_CASE("lossless noiseless link") {
  DetectorParams det;
  det.efficiency = 1.0;
  det.dark_rate = 0.0;
  ChannelParams ch;
  ch.pairs_per_frame = 1.0;
  const auto s = link_statistics(ch, det);
  CHECK(s.signal_fraction == 1.0);
  CHECK(s.p_signal_coincidence == 1.0);
  CHECK(s.p_accidental_coincidence == 0.0);
}

TEST_CASE("blind detectors") {
  Defaults def;
  auto det = def.detector;
  det.efficiency = 0.0;
  const auto s = link_statistics(def.channel, det);
  CHECK(s.p_signal_coincidence == 0.0);
  CHECK(s.signal_fraction == 0.0);
  CHECK(s.p_dark_dark > 0.0);
}

TEST_CASE("invalid parameters") {
  Defaults def;
  auto ch = def.channel;
  ch.pairs_per_frame = 1.5;
  CHECK_THROWS_AS(link_statistics(ch, def.detector), std::invalid_argument);
  ch = def.channel;
  ch.length_km = -1.0;
  CHECK_THROWS_AS(link_statistics(ch, def.detector), std::invalid_argument);
  auto det = def.detector;
  det.efficiency = 1.2;
  CHECK_THROWS_AS(link_statistics(def.channel, det), std::invalid_argument);
  det = def.detector;
  det.jitter_rms = -0.1;
  CHECK_THROWS_AS(link_statistics(def.channel, det), std::invalid_argument);
}

TEST_CASE("200 km statistics") {
  Defaults def;
  auto ch = def.channel;
  ch.length_km = 200.0;
  CHECK(ch.transmittance() == doctest::Approx(1e-4).epsilon(1e-12));
  const auto s = link_statistics(ch, def.detector);
  CHECK(s.signal_fraction == doctest::Approx(fixtures::kSignalFraction200km).epsilon(1e-12));
  check_ranges(s);
}

TEST_CASE("distance sweep") {
  Defaults def;
  CHECK(distance_to_statistics_sweep(def.channel, def.detector, {}).empty());
  const auto one = distance_to_statistics_sweep(def.channel, def.detector, {0.0});
  REQUIRE(one.size() == 1u);
  CHECK(one[0].signal_fraction == link_statistics(def.channel, def.detector).signal_fraction);
  const auto three = distance_to_statistics_sweep(def.channel, def.detector, {0.0, 100.0, 200.0});
  CHECK(three[0].signal_fraction > three[1].signal_fraction);
  CHECK(three[1].signal_fraction > three[2].signal_fraction);
  CHECK_THROWS_AS(distance_to_statistics_sweep(def.channel, def.detector, {10.0, 5.0}), std::invalid_argument);
  try {
    distance_to_statistics_sweep(def.channel, def.detector, {0.0, 1.0, 5.0, 5.0, INFINITY});
    FAIL("expected an error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("index 4") != std::string::npos);
  }
}

TEST_CASE("transmittance composes") {
  Defaults def;
  std::mt19937_64 r(11);
  for (int i = 0; i < 50; ++i) {
    const double l1 = std::uniform_real_distribution<double>(0.0, 150.0)(r);
    const double l2 = std::uniform_real_distribution<double>(0.0, 150.0)(r);
    auto whole = def.channel;
    whole.length_km = l1 + l2;
    auto split = def.channel;
    split.length_km = l2;
    auto first = def.channel;
    first.length_km = l1;
    split.insertion_transmittance = first.transmittance();
    const auto a = link_statistics(whole, def.detector);
    const auto b = link_statistics(split, def.detector);
    CHECK(std::abs(a.p_signal_coincidence - b.p_signal_coincidence) <= 1e-12 * a.p_signal_coincidence);
    CHECK(std::abs(a.signal_fraction - b.signal_fraction) <= 1e-12);
    CHECK(std::abs(a.p_accidental_coincidence - b.p_accidental_coincidence) <= 1e-12 * a.p_accidental_coincidence);
  }
}

TEST_CASE("signal fraction monotonicity") {
  Defaults def;
  std::mt19937_64 r(13);
  auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(r); };
  for (int i = 0; i < 100; ++i) {
    DetectorParams det = def.detector;
    det.efficiency = u(0.05, 1.0);
    det.dark_rate = u(0.0, 1e6);
    ChannelParams ch = def.channel;
    ch.length_km = u(0.0, 300.0);
    ch.frame_duration = u(1.0, 500.0);
    ch.pairs_per_frame = u(0.01, 1.0);
    const auto base = link_statistics(ch, det);
    check_ranges(base);

    auto det2 = det;
    det2.dark_rate *= u(1.0, 10.0);
    CHECK(link_statistics(ch, det2).signal_fraction <= base.signal_fraction);
    auto ch2 = ch;
    ch2.frame_duration *= u(1.0, 10.0);
    CHECK(link_statistics(ch2, det).signal_fraction <= base.signal_fraction);
    ch2 = ch;
    ch2.length_km += u(0.0, 100.0);
    CHECK(link_statistics(ch2, det).signal_fraction <= base.signal_fraction);
    det2 = det;
    det2.efficiency = std::min(1.0, det.efficiency * u(1.0, 2.0));
    CHECK(link_statistics(ch, det2).signal_fraction >= base.signal_fraction);
  }
}
