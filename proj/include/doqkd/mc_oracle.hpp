// Seeded Monte Carlo of post-selected coincidences: correlation-time
// estimation, empirical coverage of the confidence bound, and a plug-in
// mutual-information estimate of the binned arrival-time channel.

#pragma once

#include "doqkd/channel_detector.hpp"
#include "doqkd/finite_key.hpp"
#include "doqkd/gaussian_model.hpp"
#include "doqkd/kernels.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace doqkd {

/// SplitMix64 stream. Streams for (seed, index) pairs are independent of
/// each other and of the order in which they are used.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

 private:
  std::uint64_t state_;
};

enum class CoincidenceKind : std::uint8_t { Signal, Accidental };

struct SimConfig {
  std::uint64_t seed = 1;
  std::uint64_t trials = 1;
  std::uint64_t frames_per_trial = 2;
  SourceParams source = SourceParams::from_dimension(8.0);
  DetectorParams detector;
  LinkStatistics link;
  double true_xi = 0.21;

  void validate() const;
};

/// Columns of sampled coincidences.
struct Coincidences {
  std::vector<double> t_a;
  std::vector<double> t_b;
  std::vector<CoincidenceKind> kind;

  std::size_t size() const { return t_a.size(); }
};

/// Link statistics with only signal coincidences and the given frame.
LinkStatistics signal_only_link(double frame_duration);

/// frames_per_trial coincidences of trial `trial`, each inside the frame
/// window. Origins follow the link mixture.
Coincidences sample_coincidences(const SimConfig& config, std::uint64_t trial = 0);

/// Sample variance of t_b - t_a with m - 1 degrees of freedom, minus the
/// jitter contribution 2 jitter^2.
double estimate_sigma_prime(std::span<const double> t_a, std::span<const double> t_b,
                            double jitter_rms = 0.0);
double estimate_sigma_prime(const Coincidences& samples, double jitter_rms = 0.0);

struct CoverageResult {
  std::uint64_t trials = 0;
  std::uint64_t violations = 0;
  double fraction = 0.0;
  /// eps_pe + 3 binomial standard errors.
  double limit = 0.0;
  bool pass() const { return fraction <= limit; }
};

/// Fraction of trials whose bound on xi falls below the true xi. Each
/// trial uses frames_per_trial signal coincidences.
CoverageResult coverage_test(const SimConfig& config, double eps_pe, BoundForm form,
                             double margin_scale = 1.0, Backend backend = Backend::Parallel);

/// Plug-in mutual information of the samples binned on grid.
double empirical_mutual_information(const Coincidences& samples, const BinGrid& grid,
                                    Backend backend = Backend::Parallel);

/// Streams total_samples coincidences in fixed-size chunks, each chunk its
/// own RNG stream, straight into the histogram.
double empirical_mutual_information(const SimConfig& config, std::uint64_t total_samples,
                                    Backend backend = Backend::Parallel);

inline constexpr std::uint64_t kMinMutualInformationSamples = 10000;

}  // namespace doqkd
