// Link and detector parameters mapped to per-frame coincidence statistics.

#pragma once

#include "doqkd/gaussian_model.hpp"

#include <vector>

namespace doqkd {

/// Single-photon detector. Times are in the same unit as the source
/// correlation time.
struct DetectorParams {
  double efficiency = 0.93;
  double dark_rate = 1000.0;  // counts per second
  double jitter_rms = 2.0 / 3.0;
  double bin_width = 0.25;  // timing resolution used to bin arrival times

  /// Defaults scaled to the source correlation time.
  static DetectorParams defaults_for(const SourceParams& source);
  void validate() const;
};

struct ChannelParams {
  double length_km = 0.0;
  double loss_db_per_km = 0.2;
  double frame_duration = 64.0;    // time units; defaults_for gives 8 sigma_coh
  double pairs_per_frame = 0.1;    // mean SPDC pairs per frame
  double time_unit_s = 1e-11;      // seconds per time unit
  double insertion_transmittance = 1.0;  // extra loss on Bob's arm

  static ChannelParams defaults_for(const SourceParams& source);
  void validate() const;

  double transmittance() const;
  double frames_per_second() const { return 1.0 / (frame_duration * time_unit_s); }
};

/// Per-frame probabilities of a single detection on both sides, split by
/// origin of the two clicks.
struct LinkStatistics {
  double p_signal_coincidence = 0.0;
  double p_accidental_coincidence = 0.0;
  double signal_fraction = 0.0;
  double coincidences_per_second = 0.0;

  double p_alice_signal_bob_dark = 0.0;
  double p_alice_dark_bob_signal = 0.0;
  double p_dark_dark = 0.0;
  double frame_duration = 0.0;
  double transmittance = 1.0;

  double p_coincidence() const { return p_signal_coincidence + p_accidental_coincidence; }
};

LinkStatistics link_statistics(const ChannelParams& channel, const DetectorParams& detector);

/// link_statistics at each length of the template channel.
std::vector<LinkStatistics> distance_to_statistics_sweep(const ChannelParams& channel,
                                                         const DetectorParams& detector,
                                                         const std::vector<double>& lengths_km);

}  // namespace doqkd
