// Asymptotic information quantities: Gaussian entropies, the worst-case
// Holevo information over admissible noise, the binned Alice-Bob Shannon
// information and the asymptotic rate.

#pragma once

#include "doqkd/channel_detector.hpp"
#include "doqkd/gaussian_model.hpp"
#include "doqkd/kernels.hpp"

#include <span>
#include <stdexcept>

namespace doqkd {

/// Von Neumann entropy in bits of a mode with symplectic eigenvalue nu.
double g_entropy(double nu);

struct RateParams {
  double beta = 0.9;  // reconciliation efficiency
  void validate() const;
};

struct InfoBreakdown {
  double shannon_ab = 0.0;
  double holevo_ae = 0.0;
  double worst_eta = 0.0;
  double worst_epsilon = 0.0;
  double r_do = 0.0;
};

/// Raised when even the eta = 0 attack is unphysical.
class InfeasibleAttack : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// chi(A;E) = S(AB) - S(B | Alice time measurement) for one noise pair,
/// evaluated on the standard form.
double holevo_information(const SourceParams& source, double eta, double epsilon);

/// Same quantity through the full covariance matrix and generic symplectic
/// eigensolver; slower, kept as a cross-check.
double holevo_information_reference(const SourceParams& source, double eta, double epsilon);

struct HolevoSearch {
  int grid_points = 2001;
  double eta_tolerance = 1e-9;
};

struct HolevoResult {
  double chi = 0.0;
  NoiseParams worst;
};

/// Maximum of chi over eta in [0, xi / (2 (d^2 - 1/4))] with epsilon tied to
/// eta; uniform grid then golden-section refinement around the best node.
HolevoResult holevo_worst_case(const SourceParams& source, double xi_max,
                               const HolevoSearch& search = {},
                               Backend backend = Backend::Serial);

/// chi at every eta of the list for fixed xi; inadmissible points give -inf.
void holevo_profile(const SourceParams& source, double xi, std::span<const double> etas,
                    std::span<double> out, Backend backend);

/// Signal arrival-time law: common emission time with variance sigma_coh^2,
/// photon separation with variance (1 + xi) sigma_cor^2, Gaussian jitter per
/// arm.
SignalLaw arrival_time_law(const SourceParams& source, double xi, double jitter_rms);

/// Mixture weights of the coincidence origins from link statistics.
MixtureWeights coincidence_mixture(const LinkStatistics& link);

/// Bits per post-selected coincidence in the arrival-time basis from the
/// binned joint arrival-time table over the frame window.
double shannon_information(const SourceParams& source, const DetectorParams& detector,
                           const LinkStatistics& link, double xi,
                           Backend backend = Backend::Serial);

/// Mutual information of a bivariate Gaussian, continuous (unbinned).
double gaussian_mutual_information(const SignalLaw& law);

/// beta I - chi; may be negative.
double asymptotic_rate(const RateParams& params, double shannon, double holevo);

InfoBreakdown info_breakdown(const RateParams& params, double shannon, const HolevoResult& holevo);

}  // namespace doqkd
