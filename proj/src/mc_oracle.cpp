#include "doqkd/mc_oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <tuple>

namespace doqkd {

namespace {

constexpr std::uint64_t kChunk = 1u << 18;
constexpr std::uint64_t kMiStreamBase = 0x4d49000000000000ull;

std::uint64_t splitmix(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

struct Sampler {
  double sd_common;
  double sd_separation;
  double jitter;
  double lo, hi;
  std::array<double, 4> cumulative;  // signal, alice-only, bob-only, dark-dark

  Sampler(const SimConfig& c)
      : sd_common(c.source.sigma_coh()),
        sd_separation(c.source.sigma_cor() * std::sqrt(1.0 + c.true_xi)),
        jitter(c.detector.jitter_rms),
        lo(-0.5 * c.link.frame_duration),
        hi(0.5 * c.link.frame_duration) {
    const std::array<double, 4> w = {c.link.p_signal_coincidence, c.link.p_alice_signal_bob_dark,
                                     c.link.p_alice_dark_bob_signal, c.link.p_dark_dark};
    double total = 0.0;
    for (double x : w) total += x;
    if (!(total > 0.0)) throw std::invalid_argument("SimConfig: link has no coincidences");
    double acc = 0.0;
    for (int i = 0; i < 4; ++i) {
      acc += w[i] / total;
      cumulative[i] = acc;
    }
    cumulative[3] = 1.0;
  }

  bool inside(double t) const { return t >= lo && t < hi; }

  template <class Rng>
  std::pair<double, double> signal_pair(Rng& rng, std::normal_distribution<double>& normal) const {
    for (;;) {
      const double c = sd_common * normal(rng);
      const double s = sd_separation * normal(rng);
      double ta = c + 0.5 * s;
      double tb = c - 0.5 * s;
      if (jitter > 0.0) {
        ta += jitter * normal(rng);
        tb += jitter * normal(rng);
      }
      if (inside(ta) && inside(tb)) return {ta, tb};
    }
  }

  template <class Rng>
  double marginal(Rng& rng, std::normal_distribution<double>& normal) const {
    for (;;) {
      double t = sd_common * normal(rng) + 0.5 * sd_separation * normal(rng);
      if (jitter > 0.0) t += jitter * normal(rng);
      if (inside(t)) return t;
    }
  }

  template <class Rng>
  void draw(Rng& rng, std::size_t count, double* ta, double* tb, CoincidenceKind* kind) const {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uniform;
    std::uniform_real_distribution<double> window(lo, hi);
    for (std::size_t i = 0; i < count; ++i) {
      const double u = uniform(rng);
      CoincidenceKind k = CoincidenceKind::Accidental;
      if (u < cumulative[0]) {
        std::tie(ta[i], tb[i]) = signal_pair(rng, normal);
        k = CoincidenceKind::Signal;
      } else if (u < cumulative[1]) {
        ta[i] = marginal(rng, normal);
        tb[i] = window(rng);
      } else if (u < cumulative[2]) {
        ta[i] = window(rng);
        tb[i] = marginal(rng, normal);
      } else {
        ta[i] = window(rng);
        tb[i] = window(rng);
      }
      if (kind) kind[i] = k;
    }
  }
};

double variance_of_difference(const double* ta, const double* tb, std::size_t n) {
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += tb[i] - ta[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = tb[i] - ta[i] - mean;
    ss += r * r;
  }
  return ss / static_cast<double>(n - 1);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed;
  std::uint64_t key = splitmix(s);
  std::uint64_t t = stream ^ key;
  state_ = splitmix(t) ^ (key << 1);
}

CounterRng::result_type CounterRng::operator()() { return splitmix(state_); }

void SimConfig::validate() const {
  if (trials < 1) throw std::invalid_argument("SimConfig: trials must be >= 1");
  if (frames_per_trial < 2) throw std::invalid_argument("SimConfig: frames_per_trial must be >= 2");
  if (!std::isfinite(true_xi) || true_xi < 0.0) throw std::invalid_argument("SimConfig: true_xi must be >= 0");
  detector.validate();
  if (!(link.frame_duration > 0.0)) throw std::invalid_argument("SimConfig: link frame must be positive");
}

LinkStatistics signal_only_link(double frame_duration) {
  LinkStatistics l;
  l.p_signal_coincidence = 1.0;
  l.signal_fraction = 1.0;
  l.frame_duration = frame_duration;
  return l;
}

Coincidences sample_coincidences(const SimConfig& config, std::uint64_t trial) {
  config.validate();
  const Sampler sampler(config);
  CounterRng rng(config.seed, trial);
  const std::size_t n = config.frames_per_trial;
  Coincidences out;
  out.t_a.resize(n);
  out.t_b.resize(n);
  out.kind.resize(n);
  sampler.draw(rng, n, out.t_a.data(), out.t_b.data(), out.kind.data());
  return out;
}

double estimate_sigma_prime(std::span<const double> t_a, std::span<const double> t_b, double jitter_rms) {
  if (t_a.size() != t_b.size()) throw std::invalid_argument("estimate_sigma_prime: length mismatch");
  if (t_a.size() < 2) throw std::invalid_argument("estimate_sigma_prime: need at least two samples");
  return variance_of_difference(t_a.data(), t_b.data(), t_a.size()) - 2.0 * jitter_rms * jitter_rms;
}

double estimate_sigma_prime(const Coincidences& samples, double jitter_rms) {
  return estimate_sigma_prime(samples.t_a, samples.t_b, jitter_rms);
}

CoverageResult coverage_test(const SimConfig& config, double eps_pe, BoundForm form, double margin_scale,
                             Backend backend) {
  config.validate();
  if (!(eps_pe > 0.0 && eps_pe < 1.0)) throw std::invalid_argument("coverage_test: eps_pe must lie in (0, 1)");
  const double sigma_cor_sq = config.source.sigma_cor() * config.source.sigma_cor();
  const double sd_separation = config.source.sigma_cor() * std::sqrt(1.0 + config.true_xi);
  const double jitter = config.detector.jitter_rms;
  const std::uint64_t m = config.frames_per_trial;
  const std::int64_t trials = static_cast<std::int64_t>(config.trials);
  std::vector<std::uint8_t> violated(config.trials, 0);

  auto run = [&](std::int64_t trial, std::vector<double>& diff) {
    CounterRng rng(config.seed, static_cast<std::uint64_t>(trial));
    std::normal_distribution<double> normal;
    for (std::uint64_t i = 0; i < m; ++i) {
      double d = sd_separation * normal(rng);
      if (jitter > 0.0) d += jitter * (normal(rng) - normal(rng));
      diff[i] = d;
    }
    double mean = 0.0;
    for (double x : diff) mean += x;
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (double x : diff) ss += (x - mean) * (x - mean);
    const double sigma_hat_sq = std::max(0.0, ss / static_cast<double>(m - 1) - 2.0 * jitter * jitter);
    const EstimationInput input{sigma_hat_sq, sigma_cor_sq, m, eps_pe};
    violated[trial] = config.true_xi > xi_upper_bound(input, form, margin_scale) ? 1 : 0;
  };

  if (backend == Backend::Parallel) {
#pragma omp parallel
    {
      std::vector<double> diff(m);
#pragma omp for schedule(static)
      for (std::int64_t t = 0; t < trials; ++t) run(t, diff);
    }
  } else {
    std::vector<double> diff(m);
    for (std::int64_t t = 0; t < trials; ++t) run(t, diff);
  }

  CoverageResult r;
  r.trials = config.trials;
  for (auto v : violated) r.violations += v;
  r.fraction = static_cast<double>(r.violations) / static_cast<double>(r.trials);
  r.limit = eps_pe + 3.0 * std::sqrt(eps_pe * (1.0 - eps_pe) / static_cast<double>(r.trials));
  return r;
}

double empirical_mutual_information(const Coincidences& samples, const BinGrid& grid, Backend backend) {
  if (samples.size() < kMinMutualInformationSamples) {
    throw std::invalid_argument("empirical_mutual_information: need at least 10^4 samples");
  }
  const auto counts = histogram2d(samples.t_a, samples.t_b, grid, backend);
  return table_mutual_information(std::span<const std::uint64_t>(counts), grid.count, backend);
}

double empirical_mutual_information(const SimConfig& config, std::uint64_t total_samples, Backend backend) {
  if (total_samples < kMinMutualInformationSamples) {
    throw std::invalid_argument("empirical_mutual_information: need at least 10^4 samples");
  }
  config.validate();
  const Sampler sampler(config);
  const BinGrid grid = BinGrid::centered(config.link.frame_duration, config.detector.bin_width);
  const std::size_t cells = static_cast<std::size_t>(grid.count) * grid.count;
  const std::int64_t chunks = static_cast<std::int64_t>((total_samples + kChunk - 1) / kChunk);
  std::vector<std::uint64_t> counts(cells, 0);

  auto run_chunk = [&](std::int64_t c, std::vector<double>& ta, std::vector<double>& tb,
                       std::vector<std::uint64_t>& into) {
    const std::uint64_t begin = static_cast<std::uint64_t>(c) * kChunk;
    const std::size_t n = std::min<std::uint64_t>(kChunk, total_samples - begin);
    CounterRng rng(config.seed, kMiStreamBase + static_cast<std::uint64_t>(c));
    sampler.draw(rng, n, ta.data(), tb.data(), nullptr);
    for (std::size_t i = 0; i < n; ++i) {
      into[static_cast<std::size_t>(grid.index(ta[i])) * grid.count + grid.index(tb[i])] += 1;
    }
  };

  if (backend == Backend::Parallel) {
#pragma omp parallel
    {
      std::vector<double> ta(kChunk), tb(kChunk);
      std::vector<std::uint64_t> local(cells, 0);
#pragma omp for schedule(dynamic, 1)
      for (std::int64_t c = 0; c < chunks; ++c) run_chunk(c, ta, tb, local);
#pragma omp critical
      for (std::size_t i = 0; i < cells; ++i) counts[i] += local[i];
    }
  } else {
    std::vector<double> ta(kChunk), tb(kChunk);
    for (std::int64_t c = 0; c < chunks; ++c) run_chunk(c, ta, tb, counts);
  }
  return table_mutual_information(std::span<const std::uint64_t>(counts), grid.count, backend);
}

}  // namespace doqkd
