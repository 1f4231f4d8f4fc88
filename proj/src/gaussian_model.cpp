#include "doqkd/gaussian_model.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace doqkd {

namespace {

bool all_finite(std::initializer_list<double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

// Symmetric PD 2x2 square root: (M + sqrt(det) I) / sqrt(tr + 2 sqrt(det)).
Matrix2 sqrt_spd(const Matrix2& m) {
  const double s = std::sqrt(m.determinant());
  const double t = std::sqrt(m.trace() + 2.0 * s);
  return (m + s * Matrix2::Identity()) / t;
}

// Eigenvalues of a symmetric 2x2 matrix, descending. The discriminant is a
// sum of squares so degenerate pairs stay degenerate to rounding.
std::array<double, 2> eig_sym2(const Matrix2& m) {
  const double mean = 0.5 * (m(0, 0) + m(1, 1));
  const double half_gap = 0.5 * std::hypot(m(0, 0) - m(1, 1), m(0, 1) + m(1, 0));
  return {mean + half_gap, mean - half_gap};
}

// Gaussian mutual information (bits) between the two time quadratures.
double time_information(double var_a, double var_b, double cov) {
  return -0.5 * std::log2(1.0 - cov * cov / (var_a * var_b));
}

}  // namespace

SourceParams::SourceParams(double sigma_coh, double sigma_cor, double k, double d)
    : sigma_coh_(sigma_coh), sigma_cor_(sigma_cor), k_(k), d_(d) {
  if (!all_finite({sigma_coh, sigma_cor, k, d})) {
    throw std::invalid_argument("SourceParams: non-finite parameter");
  }
  if (!(sigma_cor > 0.0) || !(sigma_coh > sigma_cor)) {
    throw std::invalid_argument("SourceParams: require sigma_coh > sigma_cor > 0");
  }
  if (k == 0.0) {
    throw std::invalid_argument("SourceParams: k must be nonzero");
  }
  if (std::abs(d - sigma_coh / sigma_cor) > 1e-9 * (sigma_coh / sigma_cor)) {
    throw std::invalid_argument("SourceParams: d must equal sigma_coh / sigma_cor");
  }
}

SourceParams SourceParams::from_times(double sigma_coh, double sigma_cor, double k) {
  return SourceParams(sigma_coh, sigma_cor, k, sigma_coh / sigma_cor);
}

SourceParams SourceParams::from_dimension(double d, double sigma_cor, double k) {
  return SourceParams(d * sigma_cor, sigma_cor, k, d);
}

NoiseParams NoiseParams::from_eta(double eta, double xi, double d) {
  return NoiseParams{eta, epsilon_from_eta(eta, xi, d), xi};
}

bool NoiseParams::satisfies_constraint(double d, double tol) const {
  return std::abs(epsilon - epsilon_from_eta(eta, xi, d)) <= tol;
}

CovarianceMatrix::CovarianceMatrix(const Matrix4& entries) : m_(entries) {
  if (!m_.allFinite()) {
    throw std::invalid_argument("CovarianceMatrix: non-finite entry");
  }
  if ((m_ - m_.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::invalid_argument("CovarianceMatrix: matrix is not symmetric");
  }
  Eigen::LLT<Matrix4> llt(m_);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("CovarianceMatrix: matrix is not positive definite");
  }
}

bool CovarianceMatrix::is_physical(double tol) const {
  const auto nu = symplectic_eigenvalues(*this);
  return nu[1] >= kVacuumVariance - tol;
}

CovarianceMatrix build_covariance(const SourceParams& source, const NoiseParams& noise) {
  if (!all_finite({noise.eta, noise.epsilon})) {
    throw std::invalid_argument("build_covariance: non-finite noise parameter");
  }
  const double u = source.u();
  const double v = source.v();
  const double k = source.k();
  const double sum = u + v;
  const double diff = u - v;
  // (4k^2 + uv) / (4k^2 uv)
  const double freq = (4.0 * k * k + u * v) / (4.0 * k * k * u * v);

  Matrix2 aa;
  aa << sum / 16.0, -sum / (8.0 * k),
        -sum / (8.0 * k), sum * freq;
  Matrix2 ab;
  ab << diff / 16.0, diff / (8.0 * k),
        -diff / (8.0 * k), -diff * freq;
  Matrix2 bb;
  bb << sum / 16.0, sum / (8.0 * k),
        sum / (8.0 * k), sum * freq;

  Matrix4 g;
  g.block<2, 2>(0, 0) = aa;
  g.block<2, 2>(0, 2) = (1.0 - noise.eta) * ab;
  g.block<2, 2>(2, 0) = (1.0 - noise.eta) * ab.transpose();
  g.block<2, 2>(2, 2) = (1.0 + noise.epsilon) * bb;
  return CovarianceMatrix(g);
}

std::array<double, 2> symplectic_eigenvalues(const CovarianceMatrix& gamma) {
  using Complex4 = Eigen::Matrix4cd;
  Eigen::SelfAdjointEigenSolver<Matrix4> es(gamma.matrix());
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("symplectic_eigenvalues: eigendecomposition failed");
  }
  const Complex4 root = es.operatorSqrt().cast<std::complex<double>>();

  Complex4 i_omega = Complex4::Zero();
  const std::complex<double> i(0.0, 1.0);
  for (int mode = 0; mode < 2; ++mode) {
    i_omega(2 * mode, 2 * mode + 1) = i;
    i_omega(2 * mode + 1, 2 * mode) = -i;
  }
  const Complex4 h = root * i_omega * root;
  Eigen::SelfAdjointEigenSolver<Complex4> hs(h, Eigen::EigenvaluesOnly);
  if (hs.info() != Eigen::Success) {
    throw std::runtime_error("symplectic_eigenvalues: eigendecomposition failed");
  }
  // ascending: -nu_max, -nu_min, nu_min, nu_max
  const auto& ev = hs.eigenvalues();
  return {0.5 * (ev(3) - ev(0)), 0.5 * (ev(2) - ev(1))};
}

double symplectic_eigenvalue(const Matrix2& block) {
  if (!block.allFinite() || std::abs(block(0, 1) - block(1, 0)) > 1e-12) {
    throw std::invalid_argument("symplectic_eigenvalue: block is not symmetric");
  }
  const double det = block.determinant();
  if (!(block(0, 0) > 0.0) || !(det > 0.0)) {
    throw std::invalid_argument("symplectic_eigenvalue: block is not positive definite");
  }
  return std::sqrt(det);
}

Matrix2 conditional_covariance_after_time_measurement(const CovarianceMatrix& gamma) {
  const double time_var = gamma(0, 0);
  if (!(time_var > 0.0)) {
    throw std::invalid_argument("conditional covariance: Alice time variance must be positive");
  }
  // (P gamma_AA P)^+ = diag(1 / gamma_AA(0,0), 0)
  const Eigen::Vector2d ba = gamma.block(1, 0).col(0);
  return gamma.block(1, 1) - ba * ba.transpose() / time_var;
}

double epsilon_from_eta(double eta, double xi, double d) {
  if (!all_finite({eta, xi, d})) {
    throw std::invalid_argument("epsilon_from_eta: non-finite input");
  }
  const double d2 = d * d;
  return (-2.0 * eta * (d2 - 0.25) + xi) / (d2 + 0.25);
}

double eta_upper_bound(double xi, double d) {
  return xi / (2.0 * (d * d - 0.25));
}

Admissibility check_attack_admissible(const SourceParams& source, const NoiseParams& noise) {
  if (!all_finite({noise.eta, noise.epsilon, noise.xi})) {
    return {AttackViolation::NonFinite, "non-finite noise parameter"};
  }
  if (noise.eta < 0.0 || noise.epsilon < 0.0) {
    return {AttackViolation::NegativeNoise,
            "negative eta or epsilon: an eavesdropper can only degrade the timing correlation"};
  }
  if (!noise.satisfies_constraint(source.d())) {
    return {AttackViolation::ConstraintMismatch,
            "eta and epsilon do not reproduce the observed correlation-time increase"};
  }
  const auto form = StandardForm::of(source, noise.eta, noise.epsilon);
  if (!form.is_positive_definite() ||
      form.symplectic_eigenvalues()[1] < kVacuumVariance - kPhysicalityTolerance) {
    return {AttackViolation::Unphysical, "symplectic eigenvalue below the vacuum level"};
  }
  const auto noisy = build_covariance(source, noise);
  const auto clean = build_covariance(source, NoiseParams{});
  const double i_noisy = time_information(noisy(0, 0), noisy(2, 2), noisy(0, 2));
  const double i_clean = time_information(clean(0, 0), clean(2, 2), clean(0, 2));
  if (i_noisy > i_clean + 1e-12) {
    return {AttackViolation::InformationGain,
            "insertion increased the Alice-Bob timing information"};
  }
  return {};
}

StandardForm StandardForm::of(const SourceParams& source, double eta, double epsilon) {
  const double u = source.u();
  const double v = source.v();
  const double corr = 1.0 - eta;
  const double bob = 1.0 + epsilon;
  StandardForm f;
  f.x_aa = (u + v) / 16.0;
  f.x_bb = bob * f.x_aa;
  f.x_ab = corr * (u - v) / 16.0;
  f.p_aa = (u + v) / (u * v);
  f.p_bb = bob * f.p_aa;
  f.p_ab = -corr * (u - v) / (u * v);
  return f;
}

std::array<double, 2> StandardForm::symplectic_eigenvalues() const {
  // nu^2 are the eigenvalues of X P = eig(X^{1/2} P X^{1/2}).
  Matrix2 x;
  x << x_aa, x_ab, x_ab, x_bb;
  Matrix2 p;
  p << p_aa, p_ab, p_ab, p_bb;
  const Matrix2 root = sqrt_spd(x);
  const Matrix2 y = root * p * root;
  const auto sq = eig_sym2(y);
  return {std::sqrt(std::max(sq[0], 0.0)), std::sqrt(std::max(sq[1], 0.0))};
}

double StandardForm::conditional_bob_eigenvalue() const {
  const double x_cond = x_bb - x_ab * x_ab / x_aa;
  return std::sqrt(x_cond * p_bb);
}

bool StandardForm::is_positive_definite() const {
  return x_aa > 0.0 && p_aa > 0.0 && x_aa * x_bb - x_ab * x_ab > 0.0 &&
         p_aa * p_bb - p_ab * p_ab > 0.0;
}

}  // namespace doqkd
