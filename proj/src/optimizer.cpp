#include "doqkd/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace doqkd {

namespace {

constexpr double kNoRate = -std::numeric_limits<double>::infinity();
constexpr double kInvPhi = 0.6180339887498949;

struct Core {
  std::uint64_t n = 0;
  std::uint64_t m = 0;
  double xi_max = 0.0;
  HolevoResult holevo;
  double r_do = 0.0;
  FiniteKeyRate rate{kNoRate, 0.0};
  std::string reason;
};

Core evaluate_core(std::uint64_t N, double p, const SecurityBudget& budget, const RateModel& model) {
  const Scenario& s = model.scenario();
  Core c;
  const auto acct = sift_counts(N, p);
  c.n = acct.n;
  c.m = acct.m;
  if (acct.n == 0) {
    c.reason = "infeasible: no key-basis coincidences";
    return c;
  }
  if (acct.m < 2) {
    c.reason = "infeasible: fewer than two parameter-estimation samples";
    return c;
  }
  const EstimationInput input{1.0 + s.xi_hat, 1.0, acct.m, s.bound_eps(budget.eps_pe())};
  c.xi_max = std::max(0.0, xi_upper_bound(input, s.bound_form));
  try {
    c.holevo = model.cache().get(c.xi_max);
  } catch (const InfeasibleAttack&) {
    c.reason = "infeasible: covariance unphysical at xi_max";
    return c;
  }
  c.r_do = asymptotic_rate(s.rate, model.shannon(), c.holevo.chi);
  const Accounting accounting = s.symmetric ? Accounting::Standard : s.accounting;
  c.rate = finite_key_rate(c.r_do, acct, budget, s.source.d(), accounting);
  if (!(c.rate.raw > 0.0)) c.reason = "no secure key";
  return c;
}

double raw_rate(std::uint64_t N, double p, double eps_pa, double eps_pe, const RateModel& model) {
  const Scenario& s = model.scenario();
  const double total = s.eps_s - s.eps_ec;
  const double eps_bar = total - eps_pa - eps_pe;
  if (eps_pa < s.grid.eps_floor || eps_pe < s.grid.eps_floor || eps_bar < s.grid.eps_floor) {
    return kNoRate;
  }
  const SecurityBudget budget(s.eps_s, s.eps_ec, eps_pa, eps_pe, eps_bar);
  return evaluate_core(N, p, budget, model).rate.raw;
}

// Golden-section maximization of f on [a, b]; returns the best point seen.
std::pair<double, double> golden_max(const std::function<double(double)>& f, double a, double b,
                                     double tol) {
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    }
  }
  return f1 >= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

std::uint64_t to_count(double N) {
  if (!(N >= 1.0) || N > 1.8e19 || !std::isfinite(N)) {
    throw std::invalid_argument("N must be a finite count >= 1");
  }
  return static_cast<std::uint64_t>(std::floor(N));
}

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

std::vector<double> OptimizerGrid::p_values() const {
  std::vector<double> ps(p_points);
  if (p_points == 1) return {p_min};
  for (int i = 0; i < p_points; ++i) ps[i] = p_min + (p_max - p_min) * i / (p_points - 1);
  ps.back() = p_max;
  return ps;
}

std::vector<double> OptimizerGrid::eps_values(double total) const {
  return log_grid(eps_floor, total, eps_points);
}

std::vector<double> log_grid(double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi >= lo) || points < 1) {
    throw std::invalid_argument("log_grid: need 0 < lo <= hi and points >= 1");
  }
  if (points == 1) return {lo};
  std::vector<double> g(points);
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int i = 0; i < points; ++i) g[i] = std::pow(10.0, a + (b - a) * i / (points - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

Scenario Scenario::defaults(double d) {
  Scenario s;
  s.source = SourceParams::from_dimension(d);
  s.detector = DetectorParams::defaults_for(s.source);
  s.channel = ChannelParams::defaults_for(s.source);
  return s;
}

void Scenario::validate() const {
  detector.validate();
  channel.validate();
  rate.validate();
  require(eps_s > 0.0 && eps_s < 1.0, "budget.eps_s must lie in (0, 1)");
  require(eps_ec > 0.0 && eps_ec < eps_s, "budget.eps_ec must lie in (0, eps_s)");
  require(std::isfinite(xi_hat) && xi_hat >= 0.0, "observed correlation ratio must be >= 1");
  if (fixed_p) require(*fixed_p >= 0.5 && *fixed_p < 1.0, "optimizer.p must lie in [1/2, 1)");
  require(grid.p_points >= 1, "optimizer.p_points must be >= 1");
  require(grid.p_min >= 0.5 && grid.p_min <= grid.p_max && grid.p_max < 1.0,
          "optimizer p range must satisfy 1/2 <= p_min <= p_max < 1");
  require(grid.eps_points >= 2, "optimizer.eps_points must be >= 2");
  require(grid.eps_floor > 0.0 && 3.0 * grid.eps_floor < eps_s - eps_ec,
          "optimizer.eps_floor must be positive and below a third of eps_s - eps_ec");
  require(holevo.grid_points >= 2, "optimizer.holevo_points must be >= 2");
}

HolevoCache::HolevoCache(SourceParams source, HolevoSearch search)
    : source_(source), search_(search) {}

HolevoResult HolevoCache::get(double xi) {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = values_.find(xi);
    if (it != values_.end()) {
      if (!it->second.feasible) throw InfeasibleAttack("covariance unphysical at this xi");
      return it->second.result;
    }
  }
  Entry e;
  try {
    e.result = holevo_worst_case(source_, xi, search_);
  } catch (const InfeasibleAttack&) {
    e.feasible = false;
  }
  std::lock_guard<std::mutex> lock(mutex_);
  values_.emplace(xi, e);
  if (!e.feasible) throw InfeasibleAttack("covariance unphysical at this xi");
  return e.result;
}

void HolevoCache::prefetch(const std::vector<double>& xis, Backend backend) {
  std::vector<double> missing;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    for (double xi : xis) {
      if (!values_.count(xi)) missing.push_back(xi);
    }
  }
  std::sort(missing.begin(), missing.end());
  missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
  std::vector<Entry> computed(missing.size());
  const std::int64_t count = static_cast<std::int64_t>(missing.size());
  auto fill = [&](std::int64_t i) {
    try {
      computed[i].result = holevo_worst_case(source_, missing[i], search_);
    } catch (const InfeasibleAttack&) {
      computed[i].feasible = false;
    }
  };
  if (backend == Backend::Parallel) {
#pragma omp parallel for schedule(dynamic, 8)
    for (std::int64_t i = 0; i < count; ++i) fill(i);
  } else {
    for (std::int64_t i = 0; i < count; ++i) fill(i);
  }
  std::lock_guard<std::mutex> lock(mutex_);
  for (std::size_t i = 0; i < missing.size(); ++i) values_.emplace(missing[i], computed[i]);
}

RateModel::RateModel(Scenario scenario, std::shared_ptr<HolevoCache> cache)
    : scenario_(std::move(scenario)), cache_(std::move(cache)) {
  scenario_.validate();
  link_ = link_statistics(scenario_.channel, scenario_.detector);
  shannon_ = shannon_information(scenario_.source, scenario_.detector, link_, scenario_.xi_hat,
                                 scenario_.backend);
  if (!cache_) {
    cache_ = std::make_shared<HolevoCache>(scenario_.source, scenario_.holevo);
  } else {
    const auto& cs = cache_->source();
    if (cs.sigma_coh() != scenario_.source.sigma_coh() || cs.sigma_cor() != scenario_.source.sigma_cor() ||
        cs.k() != scenario_.source.k()) {
      throw std::invalid_argument("RateModel: shared Holevo cache belongs to another source");
    }
  }
}

OperatingPoint evaluate_point(std::uint64_t N, double p, double eps_pa, double eps_pe, double eps_bar,
                              const RateModel& model) {
  const Scenario& s = model.scenario();
  if (s.symmetric && p != 0.5) {
    throw std::invalid_argument("evaluate_point: symmetric mode requires p = 1/2");
  }
  const SecurityBudget budget(s.eps_s, s.eps_ec, eps_pa, eps_pe, eps_bar);
  OperatingPoint pt;
  pt.N = static_cast<double>(N);
  pt.d = s.source.d();
  pt.p = p;
  pt.eps_s = s.eps_s;
  pt.eps_ec = s.eps_ec;
  pt.eps_pa = eps_pa;
  pt.eps_pe = eps_pe;
  pt.eps_bar = eps_bar;
  pt.shannon = model.shannon();
  if (N == 0) {
    pt.reason = "infeasible: no coincidences";
    return pt;
  }
  const Core c = evaluate_core(N, p, budget, model);
  pt.n = c.n;
  pt.m = c.m;
  pt.xi_max = c.xi_max;
  pt.holevo = c.holevo.chi;
  pt.worst_noise = c.holevo.worst;
  pt.r_do = c.r_do;
  pt.r_n_raw = std::isfinite(c.rate.raw) ? c.rate.raw : 0.0;
  pt.r_n = c.rate.clamped;
  pt.reason = c.reason;
  return pt;
}

OperatingPoint asymptotic_point(const RateModel& model) {
  const Scenario& s = model.scenario();
  const double total = s.eps_s - s.eps_ec;
  OperatingPoint pt;
  pt.N = kInfiniteN;
  pt.d = s.source.d();
  pt.p = s.symmetric ? 0.5 : s.fixed_p.value_or(s.grid.p_max);
  pt.eps_s = s.eps_s;
  pt.eps_ec = s.eps_ec;
  pt.eps_pa = pt.eps_pe = total / 3.0;
  pt.eps_bar = total - pt.eps_pa - pt.eps_pe;
  pt.shannon = model.shannon();
  pt.xi_max = s.bound_form == BoundForm::Centered ? s.xi_hat : 0.0;
  try {
    const HolevoResult h = model.cache().get(pt.xi_max);
    pt.holevo = h.chi;
    pt.worst_noise = h.worst;
  } catch (const InfeasibleAttack&) {
    pt.reason = "infeasible: covariance unphysical at xi_max";
    return pt;
  }
  pt.r_do = asymptotic_rate(s.rate, pt.shannon, pt.holevo);
  const double q = 1.0 - pt.p;
  double prefactor = pt.p * pt.p;
  if (!s.symmetric && s.accounting == Accounting::Strict) prefactor -= q * q;
  pt.r_n_raw = prefactor * pt.r_do;
  pt.r_n = std::max(pt.r_n_raw, 0.0);
  if (!(pt.r_n_raw > 0.0)) pt.reason = "no secure key";
  return pt;
}

OperatingPoint optimize_point(double N, const RateModel& model) {
  if (std::isinf(N) && N > 0) return asymptotic_point(model);
  const std::uint64_t count = to_count(N);
  const Scenario& s = model.scenario();
  const double total = s.eps_s - s.eps_ec;

  std::vector<double> ps;
  if (s.symmetric) {
    ps = {0.5};
  } else if (s.fixed_p) {
    ps = {*s.fixed_p};
  } else {
    ps = s.grid.p_values();
  }
  const std::vector<double> axis = s.grid.eps_values(total);
  const int np = static_cast<int>(ps.size());
  const int ne = static_cast<int>(axis.size());

  std::vector<double> xis;
  for (double p : ps) {
    const auto acct = sift_counts(count, p);
    if (acct.n == 0 || acct.m < 2) continue;
    for (double pe : axis) {
      if (pe >= total) continue;
      const EstimationInput input{1.0 + s.xi_hat, 1.0, acct.m, s.bound_eps(pe)};
      xis.push_back(std::max(0.0, xi_upper_bound(input, s.bound_form)));
    }
  }
  model.cache().prefetch(xis, s.backend);

  // index (p, pe descending, pa ascending) so the scan order is the
  // tie-break preference order
  std::vector<double> rates(static_cast<std::size_t>(np) * ne * ne, kNoRate);
  auto fill = [&](int ip) {
    for (int ie = 0; ie < ne; ++ie) {
      const double pe = axis[ne - 1 - ie];
      for (int ia = 0; ia < ne; ++ia) {
        rates[(static_cast<std::size_t>(ip) * ne + ie) * ne + ia] =
            raw_rate(count, ps[ip], axis[ia], pe, model);
      }
    }
  };
  if (s.backend == Backend::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int ip = 0; ip < np; ++ip) fill(ip);
  } else {
    for (int ip = 0; ip < np; ++ip) fill(ip);
  }

  double best = kNoRate;
  int best_p = 0, best_e = 0, best_a = 0;
  for (int ip = 0; ip < np; ++ip) {
    for (int ie = 0; ie < ne; ++ie) {
      for (int ia = 0; ia < ne; ++ia) {
        const double r = rates[(static_cast<std::size_t>(ip) * ne + ie) * ne + ia];
        if (best == kNoRate ? r > kNoRate : r > best + s.grid.tie_tolerance) {
          best = r;
          best_p = ip;
          best_e = ie;
          best_a = ia;
        }
      }
    }
  }

  double p = ps[best_p];
  double pe = axis[ne - 1 - best_e];
  double pa = axis[best_a];

  if (best > kNoRate && s.grid.polish) {
    const double p_step = np > 1 ? (ps.back() - ps.front()) / (np - 1) : 0.0;
    const double log_lo = std::log10(axis.front());
    const double log_hi = std::log10(axis.back());
    const double log_step = (log_hi - log_lo) / (ne - 1);
    auto improve = [&](double candidate_value, double& slot, double candidate_rate) {
      if (candidate_rate > best + s.grid.tie_tolerance) {
        slot = candidate_value;
        best = candidate_rate;
      }
    };
    for (int round = 0; round < s.grid.polish_rounds; ++round) {
      if (np > 1) {
        const double a = std::max(ps.front(), p - p_step);
        const double b = std::min(ps.back(), p + p_step);
        auto [x, r] = golden_max([&](double q) { return raw_rate(count, q, pa, pe, model); }, a, b, 1e-7);
        improve(x, p, r);
      }
      for (double* slot : {&pe, &pa}) {
        const double centre = std::log10(*slot);
        const double a = std::max(log_lo, centre - log_step);
        const double b = std::min(log_hi, centre + log_step);
        auto f = [&](double lg) {
          const double v = std::pow(10.0, lg);
          return slot == &pe ? raw_rate(count, p, pa, v, model) : raw_rate(count, p, v, pe, model);
        };
        auto [x, r] = golden_max(f, a, b, 1e-5);
        improve(std::pow(10.0, x), *slot, r);
      }
    }
  }

  OperatingPoint pt = evaluate_point(count, p, pa, pe, total - pa - pe, model);
  if (!pt.has_key() && pt.reason.rfind("infeasible", 0) != 0) {
    pt.reason = "infeasible: no positive key at this N";
  }
  return pt;
}

std::vector<OperatingPoint> sweep_n(const RateModel& model, const std::vector<double>& n_grid) {
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (!(n_grid[i] >= 1.0)) throw std::invalid_argument("sweep_n: grid values must be >= 1");
    if (i > 0 && !(n_grid[i] > n_grid[i - 1])) {
      throw std::invalid_argument("sweep_n: grid must be strictly ascending");
    }
  }
  std::vector<OperatingPoint> out;
  out.reserve(n_grid.size());
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    try {
      out.push_back(optimize_point(n_grid[i], model));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("sweep_n index " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

std::vector<DistanceRow> sweep_distance(const Scenario& scenario, const std::vector<double>& n_values,
                                        const std::vector<double>& lengths_km) {
  if (n_values.empty() || lengths_km.empty()) throw std::invalid_argument("empty grid");
  for (std::size_t i = 0; i < lengths_km.size(); ++i) {
    if (!(lengths_km[i] >= 0.0) || (i > 0 && lengths_km[i] < lengths_km[i - 1])) {
      throw std::invalid_argument("sweep_distance: lengths must be non-negative and ascending");
    }
  }
  std::vector<double> ns = n_values;
  for (double N : ns) {
    if (!(N >= 1.0)) throw std::invalid_argument("sweep_distance: N values must be >= 1 or inf");
  }
  std::sort(ns.begin(), ns.end(), std::greater<>());

  auto cache = std::make_shared<HolevoCache>(scenario.source, scenario.holevo);
  std::vector<RateModel> models;
  models.reserve(lengths_km.size());
  for (double length : lengths_km) {
    Scenario s = scenario;
    s.channel.length_km = length;
    models.emplace_back(s, cache);
  }
  std::vector<DistanceRow> rows;
  rows.reserve(ns.size() * lengths_km.size());
  for (double N : ns) {
    for (std::size_t j = 0; j < lengths_km.size(); ++j) {
      rows.push_back({lengths_km[j], optimize_point(N, models[j])});
    }
  }
  return rows;
}

}  // namespace doqkd
