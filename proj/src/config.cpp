#include "doqkd/config.hpp"

#include "doqkd/mc_oracle.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace doqkd {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& s) {
  const std::string t = trim(s);
  if (t.empty()) throw std::invalid_argument("expected a number");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE) {
    throw std::invalid_argument("expected a number, got '" + t + "'");
  }
  if (!std::isfinite(v)) throw std::invalid_argument("value must be finite");
  return v;
}

std::int64_t parse_integer(const std::string& s) {
  const double v = parse_real(s);
  if (v != std::floor(v) || std::abs(v) > 9e15) {
    throw std::invalid_argument("expected an integer, got '" + trim(s) + "'");
  }
  return static_cast<std::int64_t>(v);
}

std::uint64_t parse_unsigned(const std::string& s) {
  const std::string t = trim(s);
  if (t.empty() || t[0] == '-') throw std::invalid_argument("expected a non-negative integer");
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
  if (end == t.c_str() + t.size() && errno == 0) return v;
  const double r = parse_real(t);
  if (r < 0 || r != std::floor(r) || r > 1.8e19) {
    throw std::invalid_argument("expected a non-negative integer, got '" + t + "'");
  }
  return static_cast<std::uint64_t>(r);
}

bool parse_flag(const std::string& s) {
  std::string t = trim(s);
  std::transform(t.begin(), t.end(), t.begin(), ::tolower);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw std::invalid_argument("expected true or false, got '" + trim(s) + "'");
}

template <class F>
std::vector<double> parse_list(const std::string& s, F element) {
  std::vector<double> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(element(item));
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"source.d", [](RunConfig& c, const std::string& v) { c.d = parse_real(v); }},
      {"source.sigma_cor", [](RunConfig& c, const std::string& v) { c.sigma_cor = parse_real(v); }},
      {"source.k", [](RunConfig& c, const std::string& v) { c.k = parse_real(v); }},
      {"estimate.sigma_ratio", [](RunConfig& c, const std::string& v) { c.sigma_ratio = parse_real(v); }},
      {"detector.efficiency", [](RunConfig& c, const std::string& v) { c.efficiency = parse_real(v); }},
      {"detector.dark_rate", [](RunConfig& c, const std::string& v) { c.dark_rate = parse_real(v); }},
      {"detector.jitter", [](RunConfig& c, const std::string& v) { c.jitter = parse_real(v); }},
      {"detector.bin_width", [](RunConfig& c, const std::string& v) { c.bin_width = parse_real(v); }},
      {"channel.length_km", [](RunConfig& c, const std::string& v) { c.length_km = parse_real(v); }},
      {"channel.loss_db_per_km", [](RunConfig& c, const std::string& v) { c.loss_db_per_km = parse_real(v); }},
      {"channel.frame_duration", [](RunConfig& c, const std::string& v) { c.frame_duration = parse_real(v); }},
      {"channel.pairs_per_frame", [](RunConfig& c, const std::string& v) { c.pairs_per_frame = parse_real(v); }},
      {"channel.time_unit_s", [](RunConfig& c, const std::string& v) { c.time_unit_s = parse_real(v); }},
      {"budget.eps_s", [](RunConfig& c, const std::string& v) { c.eps_s = parse_real(v); }},
      {"budget.eps_ec", [](RunConfig& c, const std::string& v) { c.eps_ec = parse_real(v); }},
      {"budget.split_pe", [](RunConfig& c, const std::string& v) { c.split_pe = parse_flag(v); }},
      {"rate.beta", [](RunConfig& c, const std::string& v) { c.beta = parse_real(v); }},
      {"optimizer.p", [](RunConfig& c, const std::string& v) { c.fixed_p = parse_real(v); }},
      {"optimizer.p_points", [](RunConfig& c, const std::string& v) { c.grid.p_points = static_cast<int>(parse_integer(v)); }},
      {"optimizer.p_min", [](RunConfig& c, const std::string& v) { c.grid.p_min = parse_real(v); }},
      {"optimizer.p_max", [](RunConfig& c, const std::string& v) { c.grid.p_max = parse_real(v); }},
      {"optimizer.eps_points", [](RunConfig& c, const std::string& v) { c.grid.eps_points = static_cast<int>(parse_integer(v)); }},
      {"optimizer.eps_floor", [](RunConfig& c, const std::string& v) { c.grid.eps_floor = parse_real(v); }},
      {"optimizer.polish", [](RunConfig& c, const std::string& v) { c.grid.polish = parse_flag(v); }},
      {"optimizer.holevo_points", [](RunConfig& c, const std::string& v) { c.holevo_points = static_cast<int>(parse_integer(v)); }},
      {"bound_form", [](RunConfig& c, const std::string& v) { c.bound_form = parse_bound_form(v); }},
      {"accounting_mode", [](RunConfig& c, const std::string& v) { c.accounting = parse_accounting(v); }},
      {"symmetric", [](RunConfig& c, const std::string& v) { c.symmetric = parse_flag(v); }},
      {"threads", [](RunConfig& c, const std::string& v) { c.threads = static_cast<int>(parse_integer(v)); }},
      {"sweep.n_min", [](RunConfig& c, const std::string& v) { c.sweep_n_min = parse_real(v); }},
      {"sweep.n_max", [](RunConfig& c, const std::string& v) { c.sweep_n_max = parse_real(v); }},
      {"sweep.points", [](RunConfig& c, const std::string& v) { c.sweep_points = static_cast<int>(parse_integer(v)); }},
      {"sweep.dimensions", [](RunConfig& c, const std::string& v) { c.sweep_dimensions = parse_list(v, parse_real); }},
      {"distance.lengths_km", [](RunConfig& c, const std::string& v) { c.distance_lengths = parse_list(v, parse_real); }},
      {"distance.n_values", [](RunConfig& c, const std::string& v) { c.distance_n_values = parse_list(v, parse_count); }},
      {"mc.seed", [](RunConfig& c, const std::string& v) { c.mc.seed = parse_unsigned(v); }},
      {"mc.trials", [](RunConfig& c, const std::string& v) { c.mc.trials = parse_unsigned(v); }},
      {"mc.m_values", [](RunConfig& c, const std::string& v) { c.mc.m_values = parse_list(v, parse_real); }},
      {"mc.eps_values", [](RunConfig& c, const std::string& v) { c.mc.eps_values = parse_list(v, parse_real); }},
      {"mc.true_xi", [](RunConfig& c, const std::string& v) { c.mc.true_xi = parse_real(v); }},
      {"mc.mi_samples", [](RunConfig& c, const std::string& v) { c.mc.mi_samples = parse_unsigned(v); }},
      {"mc.mi_tolerance", [](RunConfig& c, const std::string& v) { c.mc.mi_tolerance = parse_real(v); }},
  };
  return table;
}

void check(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

BoundForm parse_bound_form(const std::string& s) {
  const std::string t = trim(s);
  if (t == "centered") return BoundForm::Centered;
  if (t == "literal") return BoundForm::Literal;
  throw std::invalid_argument("bound form must be 'literal' or 'centered', got '" + t + "'");
}

Accounting parse_accounting(const std::string& s) {
  const std::string t = trim(s);
  if (t == "standard") return Accounting::Standard;
  if (t == "strict") return Accounting::Strict;
  throw std::invalid_argument("accounting mode must be 'standard' or 'strict', got '" + t + "'");
}

double parse_count(const std::string& s) {
  std::string t = trim(s);
  std::transform(t.begin(), t.end(), t.begin(), ::tolower);
  if (t == "inf" || t == "infinity") return kInfiniteN;
  return parse_real(t);
}

Scenario RunConfig::scenario_for(double dimension) const {
  Scenario s;
  try {
    s.source = SourceParams::from_dimension(dimension, sigma_cor, k);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("source.d / source.sigma_cor / source.k: ") + e.what());
  }
  s.detector = DetectorParams::defaults_for(s.source);
  s.detector.efficiency = efficiency;
  s.detector.dark_rate = dark_rate;
  if (jitter) s.detector.jitter_rms = *jitter;
  if (bin_width) s.detector.bin_width = *bin_width;
  s.channel = ChannelParams::defaults_for(s.source);
  s.channel.length_km = length_km;
  s.channel.loss_db_per_km = loss_db_per_km;
  if (frame_duration) s.channel.frame_duration = *frame_duration;
  s.channel.pairs_per_frame = pairs_per_frame;
  s.channel.time_unit_s = time_unit_s;
  s.rate.beta = beta;
  s.eps_s = eps_s;
  s.eps_ec = eps_ec;
  s.xi_hat = sigma_ratio * sigma_ratio - 1.0;
  s.bound_form = bound_form;
  s.accounting = accounting;
  s.symmetric = symmetric;
  s.split_pe = split_pe;
  s.fixed_p = fixed_p;
  s.grid = grid;
  s.holevo.grid_points = holevo_points;
  return s;
}

std::vector<double> RunConfig::sweep_grid() const { return log_grid(sweep_n_min, sweep_n_max, sweep_points); }

void RunConfig::validate() const {
  check(sigma_ratio >= 1.0, "estimate.sigma_ratio must be >= 1 (the observed correlation time cannot shrink)");
  for (double dim : sweep_dimensions) check(dim > 1.0, "sweep.dimensions entries must exceed 1");
  check(!sweep_dimensions.empty(), "sweep.dimensions: empty grid");
  check(sweep_n_min >= 1.0 && sweep_n_max >= sweep_n_min, "sweep: need 1 <= n_min <= n_max");
  check(sweep_points >= 1, "sweep.points must be >= 1");
  check(sweep_points == 1 || sweep_n_max > sweep_n_min, "sweep: n_max must exceed n_min for several points");
  for (double len : distance_lengths) check(len >= 0.0, "distance.lengths_km entries must be >= 0");
  check(std::is_sorted(distance_lengths.begin(), distance_lengths.end()),
        "distance.lengths_km must be ascending");
  for (double n : distance_n_values) check(n >= 1.0, "distance.n_values entries must be >= 1 or inf");
  check(mc.trials >= 1, "mc.trials must be >= 1");
  for (double m : mc.m_values) check(m >= 2.0 && m == std::floor(m), "mc.m_values entries must be integers >= 2");
  for (double e : mc.eps_values) check(e > 0.0 && e < 1.0, "mc.eps_values entries must lie in (0, 1)");
  check(mc.true_xi >= 0.0, "mc.true_xi must be >= 0");
  check(mc.mi_samples >= kMinMutualInformationSamples, "mc.mi_samples must be >= 10000");
  check(mc.mi_tolerance > 0.0, "mc.mi_tolerance must be > 0");
  check(threads >= 0, "threads must be >= 0");
  for (double dim : sweep_dimensions.empty() ? std::vector<double>{d} : sweep_dimensions) {
    try {
      scenario_for(dim).validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  try {
    scenario().validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(number) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(where + "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'");
    try {
      it->second(cfg, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where + "key '" + key + "': " + e.what());
    }
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

}  // namespace doqkd
