// Flat `key = value` run configuration with `#` comments.

#pragma once

#include "doqkd/optimizer.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace doqkd {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct McSettings {
  std::uint64_t seed = 20240601;
  std::uint64_t trials = 10000;
  std::vector<double> m_values = {1000, 10000};
  std::vector<double> eps_values = {0.05, 0.01};
  double true_xi = 0.21;
  std::uint64_t mi_samples = 10000000;
  double mi_tolerance = 0.02;
};

struct RunConfig {
  double d = 8.0;
  double sigma_cor = 1.0;
  double k = 1.0;
  double sigma_ratio = 1.1;  // observed sigma'_cor / sigma_cor

  double efficiency = 0.93;
  double dark_rate = 1000.0;
  std::optional<double> jitter;     // default 2 sigma_cor / 3
  std::optional<double> bin_width;  // default sigma_cor / 4

  double length_km = 0.0;
  double loss_db_per_km = 0.2;
  std::optional<double> frame_duration;  // default 8 sigma_coh
  double pairs_per_frame = 0.1;
  double time_unit_s = 1e-11;

  double eps_s = 1e-5;
  double eps_ec = 1e-10;
  bool split_pe = false;
  double beta = 0.9;

  std::optional<double> fixed_p;
  OptimizerGrid grid;
  int holevo_points = 2001;
  BoundForm bound_form = BoundForm::Centered;
  Accounting accounting = Accounting::Standard;
  bool symmetric = false;
  int threads = 0;

  double sweep_n_min = 1e3;
  double sweep_n_max = 1e14;
  int sweep_points = 23;
  std::vector<double> sweep_dimensions = {8, 16, 32, 64};

  std::vector<double> distance_lengths = {0, 25, 50, 75, 100, 125, 150, 175, 200, 225, 250};
  std::vector<double> distance_n_values = {kInfiniteN, 1e12, 1e10, 1e8, 1e6, 1e4};

  McSettings mc;

  /// Scenario at dimension d with every explicit setting applied.
  Scenario scenario_for(double dimension) const;
  Scenario scenario() const { return scenario_for(d); }
  std::vector<double> sweep_grid() const;
  /// Throws ConfigError naming the violated invariant.
  void validate() const;
};

/// Parses config text; `origin` prefixes diagnostics (file name).
RunConfig parse_config(const std::string& text, const std::string& origin = "config");
RunConfig load_config(const std::string& path);

/// Keys accepted in config files.
const std::vector<std::string>& config_keys();

BoundForm parse_bound_form(const std::string& s);
Accounting parse_accounting(const std::string& s);
/// Number with "inf" accepted for an unbounded count.
double parse_count(const std::string& s);

}  // namespace doqkd
