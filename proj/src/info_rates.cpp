#include "doqkd/info_rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace doqkd {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInvPhi = 0.6180339887498949;

// Constraint-tied epsilon with rounding noise at the root snapped to zero.
double tied_epsilon(double eta, double xi, double d) {
  const double eps = epsilon_from_eta(eta, xi, d);
  return (eps < 0.0 && eps > -1e-15) ? 0.0 : eps;
}

double profile_point(const SourceParams& source, double xi, double eta) {
  const double eps = tied_epsilon(eta, xi, source.d());
  if (eta < 0.0 || eps < 0.0) return kNegInf;
  const auto form = StandardForm::of(source, eta, eps);
  if (!form.is_positive_definite()) return kNegInf;
  const auto nu = form.symplectic_eigenvalues();
  if (nu[1] < kVacuumVariance - kPhysicalityTolerance) return kNegInf;
  const double cond = form.conditional_bob_eigenvalue();
  return g_entropy(nu[0]) + g_entropy(nu[1]) - g_entropy(std::max(cond, kVacuumVariance));
}

}  // namespace

double g_entropy(double nu) {
  if (!(nu >= kVacuumVariance - kPhysicalityTolerance)) {
    throw std::invalid_argument("g_entropy: symplectic eigenvalue below 1/2");
  }
  if (nu <= kVacuumVariance) return 0.0;
  const double hi = nu + 0.5;
  const double lo = nu - 0.5;
  return hi * std::log2(hi) - lo * std::log2(lo);
}

void RateParams::validate() const {
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw std::invalid_argument("rate.beta must lie in (0, 1]");
  }
}

double holevo_information(const SourceParams& source, double eta, double epsilon) {
  const auto form = StandardForm::of(source, eta, epsilon);
  if (!form.is_positive_definite()) {
    throw std::invalid_argument("holevo_information: covariance is not positive definite");
  }
  const auto nu = form.symplectic_eigenvalues();
  return g_entropy(nu[0]) + g_entropy(nu[1]) - g_entropy(form.conditional_bob_eigenvalue());
}

double holevo_information_reference(const SourceParams& source, double eta, double epsilon) {
  const auto gamma = build_covariance(source, NoiseParams{eta, epsilon, 0.0});
  const auto nu = symplectic_eigenvalues(gamma);
  const double cond = symplectic_eigenvalue(conditional_covariance_after_time_measurement(gamma));
  return g_entropy(nu[0]) + g_entropy(nu[1]) - g_entropy(cond);
}

void holevo_profile(const SourceParams& source, double xi, std::span<const double> etas,
                    std::span<double> out, Backend backend) {
  if (etas.size() != out.size()) throw std::invalid_argument("holevo_profile: size mismatch");
  const std::int64_t n = static_cast<std::int64_t>(etas.size());
  if (backend == Backend::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) out[i] = profile_point(source, xi, etas[i]);
  } else {
    for (std::int64_t i = 0; i < n; ++i) out[i] = profile_point(source, xi, etas[i]);
  }
}

HolevoResult holevo_worst_case(const SourceParams& source, double xi_max,
                               const HolevoSearch& search, Backend backend) {
  if (!std::isfinite(xi_max) || xi_max < 0.0) {
    throw std::invalid_argument("holevo_worst_case: xi_max must be finite and >= 0");
  }
  if (search.grid_points < 2 || !(search.eta_tolerance > 0.0)) {
    throw std::invalid_argument("holevo_worst_case: invalid search settings");
  }
  if (xi_max == 0.0) return {};

  const double eta_hi = eta_upper_bound(xi_max, source.d());
  const int n = search.grid_points;
  std::vector<double> etas(n), chi(n);
  for (int i = 0; i < n; ++i) etas[i] = eta_hi * i / (n - 1);
  etas[n - 1] = eta_hi;
  holevo_profile(source, xi_max, etas, chi, backend);
  if (chi[0] == kNegInf) {
    throw InfeasibleAttack("holevo_worst_case: the eta = 0 attack is already unphysical");
  }

  int best = 0;
  for (int i = 1; i < n; ++i) {
    if (chi[i] > chi[best]) best = i;
  }
  double best_eta = etas[best];
  double best_chi = chi[best];

  double a = etas[std::max(best - 1, 0)];
  double b = etas[std::min(best + 1, n - 1)];
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = profile_point(source, xi_max, x1);
  double f2 = profile_point(source, xi_max, x2);
  while (b - a > search.eta_tolerance) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = profile_point(source, xi_max, x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = profile_point(source, xi_max, x1);
    }
  }
  for (auto [x, f] : {std::pair{x1, f1}, std::pair{x2, f2}}) {
    if (f > best_chi) {
      best_chi = f;
      best_eta = x;
    }
  }

  HolevoResult r;
  r.chi = std::max(best_chi, 0.0);
  r.worst = NoiseParams{best_eta, tied_epsilon(best_eta, xi_max, source.d()), xi_max};
  return r;
}

SignalLaw arrival_time_law(const SourceParams& source, double xi, double jitter_rms) {
  if (!std::isfinite(xi) || xi < 0.0) throw std::invalid_argument("arrival_time_law: xi must be >= 0");
  if (!std::isfinite(jitter_rms) || jitter_rms < 0.0) {
    throw std::invalid_argument("arrival_time_law: jitter must be >= 0");
  }
  const double common = source.sigma_coh() * source.sigma_coh();
  const double separation = (1.0 + xi) * source.sigma_cor() * source.sigma_cor();
  const double jitter = jitter_rms * jitter_rms;
  SignalLaw law;
  law.var_a = common + 0.25 * separation + jitter;
  law.var_b = law.var_a;
  law.cov = common - 0.25 * separation;
  return law;
}

MixtureWeights coincidence_mixture(const LinkStatistics& link) {
  return {link.p_signal_coincidence, link.p_alice_signal_bob_dark, link.p_alice_dark_bob_signal,
          link.p_dark_dark};
}

double shannon_information(const SourceParams& source, const DetectorParams& detector,
                           const LinkStatistics& link, double xi, Backend backend) {
  detector.validate();
  if (!(link.p_coincidence() > 0.0)) {
    throw std::invalid_argument("shannon_information: link has no coincidences");
  }
  const SignalLaw law = arrival_time_law(source, xi, detector.jitter_rms);
  const BinGrid grid = BinGrid::centered(link.frame_duration, detector.bin_width);
  const auto table = joint_table(law, grid, coincidence_mixture(link), backend);
  return table_mutual_information(std::span<const double>(table), grid.count, backend);
}

double gaussian_mutual_information(const SignalLaw& law) {
  const double rho2 = law.cov * law.cov / (law.var_a * law.var_b);
  return -0.5 * std::log2(1.0 - rho2);
}

double asymptotic_rate(const RateParams& params, double shannon, double holevo) {
  params.validate();
  if (!(shannon >= 0.0) || !(holevo >= 0.0)) {
    throw std::invalid_argument("asymptotic_rate: information terms must be >= 0");
  }
  return params.beta * shannon - holevo;
}

InfoBreakdown info_breakdown(const RateParams& params, double shannon, const HolevoResult& holevo) {
  InfoBreakdown b;
  b.shannon_ab = shannon;
  b.holevo_ae = holevo.chi;
  b.worst_eta = holevo.worst.eta;
  b.worst_epsilon = holevo.worst.epsilon;
  b.r_do = asymptotic_rate(params, shannon, holevo.chi);
  return b;
}

}  // namespace doqkd
