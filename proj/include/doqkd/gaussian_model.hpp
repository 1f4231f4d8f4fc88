// Two-mode covariance description of the time-energy
// entangled biphoton, eavesdropper noise insertions and physicality checks.
//
// Mode ordering is (Alice time, Alice frequency, Bob time, Bob frequency).
// Variances are in vacuum units where the vacuum variance is 1/2.

#pragma once

#include <Eigen/Dense>

#include <array>
#include <string>

namespace doqkd {

inline constexpr double kVacuumVariance = 0.5;
inline constexpr double kPhysicalityTolerance = 1e-9;
inline constexpr double kConstraintTolerance = 1e-9;

using Matrix2 = Eigen::Matrix2d;
using Matrix4 = Eigen::Matrix4d;

/// Biphoton source: pump coherence time, photon correlation time, the
/// coupling k of the covariance off-diagonals, and the Schmidt dimension
/// d = sigma_coh / sigma_cor.
class SourceParams {
 public:
  SourceParams(double sigma_coh, double sigma_cor, double k, double d);

  static SourceParams from_times(double sigma_coh, double sigma_cor, double k = 1.0);
  static SourceParams from_dimension(double d, double sigma_cor = 1.0, double k = 1.0);

  double sigma_coh() const { return sigma_coh_; }
  double sigma_cor() const { return sigma_cor_; }
  double k() const { return k_; }
  double d() const { return d_; }

  double u() const { return 16.0 * sigma_coh_ * sigma_coh_; }
  double v() const { return 4.0 * sigma_cor_ * sigma_cor_; }

 private:
  double sigma_coh_;
  double sigma_cor_;
  double k_;
  double d_;
};

/// Correlation degradation eta, excess noise epsilon and the observed
/// correlation-time increase xi (sigma'^2 = (1 + xi) sigma^2).
struct NoiseParams {
  double eta = 0.0;
  double epsilon = 0.0;
  double xi = 0.0;

  /// eta and epsilon tied to xi through the eta/epsilon/xi relation.
  static NoiseParams from_eta(double eta, double xi, double d);
  bool satisfies_constraint(double d, double tol = kConstraintTolerance) const;
};

/// Symmetric positive definite 4x4 covariance matrix.
class CovarianceMatrix {
 public:
  explicit CovarianceMatrix(const Matrix4& entries);

  const Matrix4& matrix() const { return m_; }
  double operator()(int r, int c) const { return m_(r, c); }

  /// 2x2 block for parties (0 = Alice, 1 = Bob).
  Matrix2 block(int row_party, int col_party) const {
    return m_.block<2, 2>(2 * row_party, 2 * col_party);
  }

  bool is_physical(double tol = kPhysicalityTolerance) const;

 private:
  Matrix4 m_;
};

CovarianceMatrix build_covariance(const SourceParams& source, const NoiseParams& noise);

/// Symplectic spectrum of a two-mode covariance matrix, sorted descending.
/// Computed from the Hermitian matrix Gamma^{1/2} (i Omega) Gamma^{1/2}, whose
/// eigenvalues are +-nu.
std::array<double, 2> symplectic_eigenvalues(const CovarianceMatrix& gamma);

/// Single-mode symplectic eigenvalue, sqrt(det) of a symmetric PD 2x2 block.
double symplectic_eigenvalue(const Matrix2& block);

/// Bob's covariance conditioned on an ideal measurement of Alice's time
/// quadrature: gamma_BB - gamma_BA (P gamma_AA P)^+ gamma_AB, P = diag(1, 0).
Matrix2 conditional_covariance_after_time_measurement(const CovarianceMatrix& gamma);

/// epsilon = (-2 eta (d^2 - 1/4) + xi) / (d^2 + 1/4)
double epsilon_from_eta(double eta, double xi, double d);

/// Largest eta keeping epsilon >= 0 at the given xi.
double eta_upper_bound(double xi, double d);

enum class AttackViolation {
  None,
  NonFinite,
  ConstraintMismatch,  // eta, epsilon, xi do not satisfy the relation
  NegativeNoise,       // eavesdropper may only degrade correlations
  Unphysical,          // a symplectic eigenvalue below the vacuum level
  InformationGain,     // noise raised Alice-Bob timing information
};

struct Admissibility {
  AttackViolation violation = AttackViolation::None;
  std::string reason;

  bool admissible() const { return violation == AttackViolation::None; }
  explicit operator bool() const { return admissible(); }
};

Admissibility check_attack_admissible(const SourceParams& source, const NoiseParams& noise);

/// The covariance family is locally symplectically equivalent (a time/frequency
/// shear on each mode) to a k-independent standard form whose time and
/// frequency quadratures decouple. Entropic quantities evaluated here match the
/// full-matrix routes and avoid the cancellations of the raw 4x4 entries.
struct StandardForm {
  // time quadratures [[x_aa, x_ab], [x_ab, x_bb]]
  double x_aa, x_ab, x_bb;
  // frequency quadratures [[p_aa, p_ab], [p_ab, p_bb]]
  double p_aa, p_ab, p_bb;

  static StandardForm of(const SourceParams& source, double eta, double epsilon);

  std::array<double, 2> symplectic_eigenvalues() const;
  /// sqrt(det) of Bob's block after Alice's time measurement.
  double conditional_bob_eigenvalue() const;
  /// Positive definiteness is preserved by the shear, so this decides it for
  /// the original matrix too.
  bool is_positive_definite() const;
};

}  // namespace doqkd
