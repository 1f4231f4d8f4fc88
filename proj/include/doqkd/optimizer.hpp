// Operating-point evaluation, maximization of the finite-key rate over the
// basis probability and budget split, and the N / distance sweeps.

#pragma once

#include "doqkd/channel_detector.hpp"
#include "doqkd/finite_key.hpp"
#include "doqkd/gaussian_model.hpp"
#include "doqkd/info_rates.hpp"
#include "doqkd/kernels.hpp"

#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace doqkd {

inline constexpr double kInfiniteN = std::numeric_limits<double>::infinity();

struct OptimizerGrid {
  int p_points = 199;
  double p_min = 0.5;
  double p_max = 0.995;
  int eps_points = 15;
  double eps_floor = 1e-15;
  bool polish = true;
  int polish_rounds = 2;
  double tie_tolerance = 1e-9;

  std::vector<double> p_values() const;
  /// Log-spaced from eps_floor to total.
  std::vector<double> eps_values(double total) const;
};

/// Everything fixed while optimizing one point.
struct Scenario {
  SourceParams source = SourceParams::from_dimension(8.0);
  DetectorParams detector;
  ChannelParams channel;
  RateParams rate;
  double eps_s = 1e-5;
  double eps_ec = 1e-10;
  double xi_hat = 0.21;  // observed sigma'^2 / sigma^2 - 1
  BoundForm bound_form = BoundForm::Centered;
  Accounting accounting = Accounting::Standard;
  bool symmetric = false;   // p = 1/2, no extra arrival-time sacrifice
  bool split_pe = false;    // eps_pe shared between the two bases
  std::optional<double> fixed_p;
  HolevoSearch holevo;
  OptimizerGrid grid;
  Backend backend = Backend::Parallel;

  /// Defaults with detector and channel scaled to the source.
  static Scenario defaults(double d = 8.0);
  void validate() const;
  /// eps_pe as consumed by the correlation-time bound.
  double bound_eps(double eps_pe) const { return split_pe ? 0.5 * eps_pe : eps_pe; }
};

/// Worst-case Holevo values memoized by exact xi for one source.
class HolevoCache {
 public:
  HolevoCache(SourceParams source, HolevoSearch search);

  /// Throws InfeasibleAttack like holevo_worst_case.
  HolevoResult get(double xi);
  /// Fills every missing xi, evaluating them concurrently.
  void prefetch(const std::vector<double>& xis, Backend backend);
  const SourceParams& source() const { return source_; }

 private:
  struct Entry {
    HolevoResult result;
    bool feasible = true;
  };
  SourceParams source_;
  HolevoSearch search_;
  std::mutex mutex_;
  std::unordered_map<double, Entry> values_;
};

/// A scenario with its link statistics and Shannon information evaluated.
class RateModel {
 public:
  explicit RateModel(Scenario scenario, std::shared_ptr<HolevoCache> cache = nullptr);

  const Scenario& scenario() const { return scenario_; }
  const LinkStatistics& link() const { return link_; }
  double shannon() const { return shannon_; }
  HolevoCache& cache() const { return *cache_; }
  std::shared_ptr<HolevoCache> shared_cache() const { return cache_; }

 private:
  Scenario scenario_;
  LinkStatistics link_;
  double shannon_ = 0.0;
  std::shared_ptr<HolevoCache> cache_;
};

struct OperatingPoint {
  double N = 0.0;  // kInfiniteN for the asymptotic row
  double d = 0.0;
  double p = 0.5;
  double eps_s = 0.0, eps_ec = 0.0, eps_pa = 0.0, eps_pe = 0.0, eps_bar = 0.0;
  std::uint64_t n = 0;
  std::uint64_t m = 0;
  double xi_max = 0.0;
  double shannon = 0.0;
  double holevo = 0.0;
  double r_do = 0.0;
  double r_n = 0.0;      // clamped at zero
  double r_n_raw = 0.0;
  NoiseParams worst_noise;
  std::string reason;  // empty when the point yields key

  bool has_key() const { return r_n > 0.0; }
  SecurityBudget budget() const { return SecurityBudget(eps_s, eps_ec, eps_pa, eps_pe, eps_bar); }
};

OperatingPoint evaluate_point(std::uint64_t N, double p, double eps_pa, double eps_pe, double eps_bar,
                              const RateModel& model);

/// N = infinity: corrections vanish and p sits at the top of the grid.
OperatingPoint asymptotic_point(const RateModel& model);

/// Maximum over p and the budget simplex; N may be kInfiniteN.
OperatingPoint optimize_point(double N, const RateModel& model);

std::vector<OperatingPoint> sweep_n(const RateModel& model, const std::vector<double>& n_grid);

struct DistanceRow {
  double length_km = 0.0;
  OperatingPoint point;
};

/// Rows grouped by N in descending order, lengths ascending within a group.
std::vector<DistanceRow> sweep_distance(const Scenario& scenario, const std::vector<double>& n_values,
                                        const std::vector<double>& lengths_km);

/// points log-spaced values from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, int points);

}  // namespace doqkd
