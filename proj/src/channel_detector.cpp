#include "doqkd/channel_detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace doqkd {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

DetectorParams DetectorParams::defaults_for(const SourceParams& source) {
  DetectorParams p;
  p.jitter_rms = 2.0 * source.sigma_cor() / 3.0;
  p.bin_width = 0.25 * source.sigma_cor();
  return p;
}

void DetectorParams::validate() const {
  require(std::isfinite(efficiency) && efficiency >= 0.0 && efficiency <= 1.0,
          "detector.efficiency must lie in [0, 1]");
  require(std::isfinite(dark_rate) && dark_rate >= 0.0, "detector.dark_rate must be >= 0");
  require(std::isfinite(jitter_rms) && jitter_rms >= 0.0, "detector.jitter must be >= 0");
  require(std::isfinite(bin_width) && bin_width > 0.0, "detector.bin_width must be > 0");
}

ChannelParams ChannelParams::defaults_for(const SourceParams& source) {
  ChannelParams c;
  c.frame_duration = 8.0 * source.sigma_coh();
  return c;
}

void ChannelParams::validate() const {
  require(std::isfinite(length_km) && length_km >= 0.0, "channel.length_km must be >= 0");
  require(std::isfinite(loss_db_per_km) && loss_db_per_km >= 0.0,
          "channel.loss_db_per_km must be >= 0");
  require(std::isfinite(frame_duration) && frame_duration > 0.0,
          "channel.frame_duration must be > 0");
  require(std::isfinite(pairs_per_frame) && pairs_per_frame >= 0.0,
          "channel.pairs_per_frame must be >= 0");
  require(pairs_per_frame <= 1.0,
          "channel.pairs_per_frame must be <= 1 (multi-pair emission is not modeled)");
  require(std::isfinite(time_unit_s) && time_unit_s > 0.0, "channel.time_unit_s must be > 0");
  require(std::isfinite(insertion_transmittance) && insertion_transmittance >= 0.0 &&
              insertion_transmittance <= 1.0,
          "channel.insertion_transmittance must lie in [0, 1]");
}

double ChannelParams::transmittance() const {
  return std::pow(10.0, -loss_db_per_km * length_km / 10.0) * insertion_transmittance;
}

LinkStatistics link_statistics(const ChannelParams& channel, const DetectorParams& detector) {
  channel.validate();
  detector.validate();

  const double mu = channel.pairs_per_frame;
  const double t = channel.transmittance();
  const double dark = std::min(1.0, detector.dark_rate * channel.frame_duration * channel.time_unit_s);
  const double eta_a = detector.efficiency;
  const double eta_b = detector.efficiency * t;  // fiber loss sits on Bob's arm

  LinkStatistics s;
  s.transmittance = t;
  s.frame_duration = channel.frame_duration;
  s.p_signal_coincidence = mu * eta_a * eta_b * (1.0 - dark) * (1.0 - dark);
  s.p_alice_signal_bob_dark = mu * eta_a * (1.0 - dark) * (1.0 - eta_b) * dark;
  s.p_alice_dark_bob_signal = mu * (1.0 - eta_a) * dark * eta_b * (1.0 - dark);
  s.p_dark_dark = ((1.0 - mu) + mu * (1.0 - eta_a) * (1.0 - eta_b)) * dark * dark;
  s.p_accidental_coincidence = s.p_alice_signal_bob_dark + s.p_alice_dark_bob_signal + s.p_dark_dark;

  const double total = s.p_coincidence();
  s.signal_fraction = total > 0.0 ? s.p_signal_coincidence / total : 0.0;
  s.coincidences_per_second = total * channel.frames_per_second();
  return s;
}

std::vector<LinkStatistics> distance_to_statistics_sweep(const ChannelParams& channel,
                                                         const DetectorParams& detector,
                                                         const std::vector<double>& lengths_km) {
  std::vector<LinkStatistics> out;
  out.reserve(lengths_km.size());
  for (std::size_t i = 0; i < lengths_km.size(); ++i) {
    if (i > 0 && lengths_km[i] < lengths_km[i - 1]) {
      throw std::invalid_argument("distance sweep: lengths must be ascending (index " +
                                  std::to_string(i) + ")");
    }
    ChannelParams c = channel;
    c.length_km = lengths_km[i];
    try {
      out.push_back(link_statistics(c, detector));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("distance sweep index " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace doqkd
