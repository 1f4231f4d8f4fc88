#include "doqkd/cli.hpp"

#include "doqkd/mc_oracle.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace doqkd {

namespace {

const char* kSweepHeader = "N,d,p_opt,eps_pa,eps_pe,eps_bar,xi_max,r_do,r_n";

void write_point_columns(std::ostream& out, const OperatingPoint& pt) {
  out << format_number(pt.N) << ',' << format_number(pt.d) << ',' << format_number(pt.p) << ','
      << format_number(pt.eps_pa) << ',' << format_number(pt.eps_pe) << ',' << format_number(pt.eps_bar)
      << ',' << format_number(pt.xi_max) << ',' << format_number(pt.r_do) << ',' << format_number(pt.r_n);
}

// Re-checks the row invariants before it is emitted.
void check_row(const OperatingPoint& pt) {
  if (!(pt.r_n >= 0.0) || !std::isfinite(pt.r_n) || pt.r_n > std::max(pt.r_do, 0.0) + 1e-12) {
    throw std::logic_error("row violates 0 <= r_n <= r_do");
  }
  if (!(pt.p >= 0.5 && pt.p < 1.0)) throw std::logic_error("row violates 1/2 <= p < 1");
  pt.budget();
}

int emit(const std::string& text, const std::string& out_path, std::ostream& out, std::ostream& err) {
  if (out_path.empty()) {
    out << text;
    return kExitOk;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) {
    err << "error: cannot write " << out_path << '\n';
    return kExitConfig;
  }
  f << text;
  f.close();
  if (!f) {
    err << "error: cannot write " << out_path << '\n';
    return kExitConfig;
  }
  return kExitOk;
}

}  // namespace

std::string format_number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

void write_sweep_n_csv(std::ostream& out, const std::vector<OperatingPoint>& points) {
  out << kSweepHeader << '\n';
  for (const auto& pt : points) {
    check_row(pt);
    write_point_columns(out, pt);
    out << '\n';
  }
}

void write_sweep_distance_csv(std::ostream& out, const std::vector<DistanceRow>& rows) {
  out << "length_km,N,r_n,d,p_opt,eps_pa,eps_pe,eps_bar,xi_max,r_do\n";
  for (const auto& row : rows) {
    const auto& pt = row.point;
    check_row(pt);
    out << format_number(row.length_km) << ',' << format_number(pt.N) << ',' << format_number(pt.r_n) << ','
        << format_number(pt.d) << ',' << format_number(pt.p) << ',' << format_number(pt.eps_pa) << ','
        << format_number(pt.eps_pe) << ',' << format_number(pt.eps_bar) << ',' << format_number(pt.xi_max)
        << ',' << format_number(pt.r_do) << '\n';
  }
}

void print_operating_point(std::ostream& out, const OperatingPoint& pt) {
  auto line = [&](const char* name, const std::string& value, const char* unit) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-12s %-18s %s\n", name, value.c_str(), unit);
    out << buf;
  };
  line("N", format_number(pt.N), "coincidences");
  line("d", format_number(pt.d), "");
  line("p", format_number(pt.p), "arrival-time basis probability");
  line("n", std::to_string(pt.n), "key-basis coincidences");
  line("m", std::to_string(pt.m), "estimation coincidences");
  line("eps_s", format_number(pt.eps_s), "");
  line("eps_ec", format_number(pt.eps_ec), "");
  line("eps_pa", format_number(pt.eps_pa), "");
  line("eps_pe", format_number(pt.eps_pe), "");
  line("eps_bar", format_number(pt.eps_bar), "");
  line("xi_max", format_number(pt.xi_max), "");
  line("eta*", format_number(pt.worst_noise.eta), "");
  line("epsilon*", format_number(pt.worst_noise.epsilon), "");
  line("I(A;B)", format_number(pt.shannon), "bits/coincidence");
  line("chi(A;E)", format_number(pt.holevo), "bits/coincidence");
  line("r_do", format_number(pt.r_do), "bits/coincidence");
  line("r_n", format_number(pt.r_n), "bits/coincidence");
  line("r_n raw", format_number(pt.r_n_raw), "bits/coincidence");
  out << "status       " << (pt.has_key() ? std::string("secure key") : pt.reason) << '\n';
}

int cmd_rate(const RunConfig& cfg, double N, const std::string& out_path, std::ostream& out,
             std::ostream& err) {
  OperatingPoint pt;
  try {
    const RateModel model(cfg.scenario());
    pt = optimize_point(N, model);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  print_operating_point(out, pt);
  if (!out_path.empty()) {
    std::ostringstream csv;
    write_sweep_n_csv(csv, {pt});
    if (int rc = emit(csv.str(), out_path, out, err)) return rc;
  }
  return pt.has_key() ? kExitOk : kExitNoKey;
}

int cmd_sweep_n(const RunConfig& cfg, const std::string& out_path, std::ostream& out, std::ostream& err) {
  std::vector<double> dims = cfg.sweep_dimensions;
  if (dims.empty()) {
    err << "error: empty grid\n";
    return kExitConfig;
  }
  std::sort(dims.begin(), dims.end());
  std::vector<OperatingPoint> all;
  try {
    const auto grid = cfg.sweep_grid();
    for (double d : dims) {
      const RateModel model(cfg.scenario_for(d));
      auto pts = sweep_n(model, grid);
      all.insert(all.end(), pts.begin(), pts.end());
    }
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  std::ostringstream csv;
  write_sweep_n_csv(csv, all);
  return emit(csv.str(), out_path, out, err);
}

int cmd_sweep_distance(const RunConfig& cfg, const std::string& out_path, std::ostream& out,
                       std::ostream& err) {
  if (cfg.distance_n_values.empty() || cfg.distance_lengths.empty()) {
    err << "error: empty grid\n";
    return kExitConfig;
  }
  std::vector<DistanceRow> rows;
  try {
    rows = sweep_distance(cfg.scenario(), cfg.distance_n_values, cfg.distance_lengths);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  std::ostringstream csv;
  write_sweep_distance_csv(csv, rows);
  return emit(csv.str(), out_path, out, err);
}

int cmd_mc_validate(const RunConfig& cfg, const std::string& out_path, std::ostream& out, std::ostream& err,
                    double margin_scale) {
  std::ostringstream csv;
  csv << "check,form,m,eps_pe,trials,value,reference,limit,pass\n";
  bool all_pass = true;
  try {
    const Scenario scenario = cfg.scenario();
    std::uint64_t index = 0;
    for (BoundForm form : {BoundForm::Centered, BoundForm::Literal}) {
      for (double m : cfg.mc.m_values) {
        for (double eps : cfg.mc.eps_values) {
          SimConfig sim;
          sim.seed = cfg.mc.seed + 7919 * index++;
          sim.trials = std::max<std::uint64_t>(cfg.mc.trials, static_cast<std::uint64_t>(std::ceil(5.0 / eps)));
          sim.frames_per_trial = static_cast<std::uint64_t>(m);
          sim.source = scenario.source;
          sim.detector = scenario.detector;
          sim.detector.jitter_rms = 0.0;
          sim.link = signal_only_link(scenario.channel.frame_duration);
          sim.true_xi = cfg.mc.true_xi;
          const CoverageResult r = coverage_test(sim, eps, form, margin_scale);
          const bool gated = form == BoundForm::Centered;
          if (gated && !r.pass()) all_pass = false;
          csv << "coverage," << (gated ? "centered" : "literal") << ',' << format_number(m) << ','
              << format_number(eps) << ',' << r.trials << ',' << format_number(r.fraction) << ','
              << format_number(eps) << ',' << format_number(r.limit) << ','
              << (gated ? (r.pass() ? "PASS" : "FAIL") : "info") << '\n';
        }
      }
    }

    const RateModel model(scenario);
    SimConfig sim;
    sim.seed = cfg.mc.seed + 7919 * index++;
    sim.source = scenario.source;
    sim.detector = scenario.detector;
    sim.link = model.link();
    sim.true_xi = cfg.mc.true_xi;
    const double predicted = shannon_information(scenario.source, scenario.detector, model.link(), cfg.mc.true_xi);
    const double empirical = empirical_mutual_information(sim, cfg.mc.mi_samples);
    const bool mi_pass = std::abs(predicted - empirical) <= cfg.mc.mi_tolerance;
    if (!mi_pass) all_pass = false;
    csv << "mutual_information,,,," << cfg.mc.mi_samples << ',' << format_number(empirical) << ','
        << format_number(predicted) << ',' << format_number(cfg.mc.mi_tolerance) << ','
        << (mi_pass ? "PASS" : "FAIL") << '\n';
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  const int rc = emit(csv.str(), out_path, out, err);
  if (rc != kExitOk) return rc;
  out << "mc-validate: " << (all_pass ? "PASS" : "FAIL") << '\n';
  return all_pass ? kExitOk : kExitValidation;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite-key secure-key capacity of dispersive-optics high-dimensional QKD"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_path, bound_form, accounting;
  int threads = -1;
  std::uint64_t seed = 0;
  bool symmetric = false;
  double inject_margin = 1.0;
  app.add_option("--config", config_path, "Configuration file (key = value)");
  app.add_option("--out", out_path, "Write CSV output to this path");
  auto* threads_opt = app.add_option("--threads", threads, "Worker threads (0 = runtime default)");
  auto* seed_opt = app.add_option("--seed", seed, "Monte Carlo seed");
  auto* form_opt = app.add_option("--bound-form", bound_form, "literal or centered");
  auto* acct_opt = app.add_option("--accounting", accounting, "standard or strict");
  app.add_flag("--symmetric", symmetric, "Force p = 1/2 with symmetric sifting");
  app.add_option("--inject-margin", inject_margin, "Scale the confidence margin")->group("");

  auto* rate = app.add_subcommand("rate", "Optimize a single operating point");
  std::string n_text;
  rate->add_option("N", n_text, "Number of post-selected coincidences (or inf)")->required();

  auto* sweep = app.add_subcommand("sweep-n", "Optimized rate versus N for each dimension");
  double n_min = 0, n_max = 0;
  int points = 0;
  std::vector<double> dims;
  auto* n_min_opt = sweep->add_option("--n-min", n_min, "Smallest N");
  auto* n_max_opt = sweep->add_option("--n-max", n_max, "Largest N");
  auto* points_opt = sweep->add_option("--points", points, "Log-spaced grid points");
  auto* dims_opt = sweep->add_option("--dimensions", dims, "Comma-separated dimensions")->delimiter(',');

  auto* distance = app.add_subcommand("sweep-distance", "Optimized rate versus channel length");
  std::string lengths_text, n_values_text;
  auto* lengths_opt = distance->add_option("--lengths", lengths_text, "Comma-separated lengths in km");
  auto* n_values_opt = distance->add_option("--n-values", n_values_text, "Comma-separated N values (inf allowed)");

  auto* mc = app.add_subcommand("mc-validate", "Monte Carlo coverage and mutual-information checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  RunConfig cfg;
  try {
    cfg = config_path.empty() ? parse_config("", "defaults") : load_config(config_path);
    if (*form_opt) cfg.bound_form = parse_bound_form(bound_form);
    if (*acct_opt) cfg.accounting = parse_accounting(accounting);
    if (symmetric) cfg.symmetric = true;
    if (*seed_opt) cfg.mc.seed = seed;
    if (*threads_opt) cfg.threads = threads;
    if (*n_min_opt) cfg.sweep_n_min = n_min;
    if (*n_max_opt) cfg.sweep_n_max = n_max;
    if (*points_opt) cfg.sweep_points = points;
    if (*dims_opt) cfg.sweep_dimensions = dims;
    auto split = [](const std::string& text) {
      std::vector<double> r;
      std::stringstream in(text);
      std::string item;
      while (std::getline(in, item, ',')) {
        if (item.find_first_not_of(" \t") != std::string::npos) r.push_back(parse_count(item));
      }
      return r;
    };
    if (*lengths_opt) cfg.distance_lengths = split(lengths_text);
    if (*n_values_opt) cfg.distance_n_values = split(n_values_text);
    if (distance->parsed() && (cfg.distance_n_values.empty() || cfg.distance_lengths.empty())) {
      throw ConfigError("empty grid");
    }
    cfg.validate();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (cfg.threads < 0) {
    err << "error: threads must be >= 0\n";
    return kExitConfig;
  }
  set_threads(cfg.threads);

  try {
    if (rate->parsed()) {
      double N = 0;
      try {
        N = parse_count(n_text);
      } catch (const std::invalid_argument& e) {
        err << "error: N: " << e.what() << '\n';
        return kExitConfig;
      }
      return cmd_rate(cfg, N, out_path, out, err);
    }
    if (sweep->parsed()) return cmd_sweep_n(cfg, out_path, out, err);
    if (distance->parsed()) return cmd_sweep_distance(cfg, out_path, out, err);
    if (mc->parsed()) return cmd_mc_validate(cfg, out_path, out, err, inject_margin);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace doqkd
