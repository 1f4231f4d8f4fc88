// Finite-size corrections: failure-probability budget, sifting counts, the
// chi-square confidence bound on the correlation time, and the finite-key rate.

#pragma once

#include <cstdint>

namespace doqkd {

/// eps_s = eps_ec + eps_pa + eps_pe + eps_bar.
class SecurityBudget {
 public:
  SecurityBudget(double eps_s, double eps_ec, double eps_pa, double eps_pe, double eps_bar);

  /// eps_bar takes whatever eps_s - eps_ec - eps_pa - eps_pe leaves.
  static SecurityBudget from_split(double eps_s, double eps_ec, double eps_pa, double eps_pe);

  double eps_s() const { return eps_s_; }
  double eps_ec() const { return eps_ec_; }
  double eps_pa() const { return eps_pa_; }
  double eps_pe() const { return eps_pe_; }
  double eps_bar() const { return eps_bar_; }

  /// Relative mismatch of the sum rule.
  double sum_rule_error() const;

 private:
  double eps_s_, eps_ec_, eps_pa_, eps_pe_, eps_bar_;
};

struct FrameAccounting {
  std::uint64_t N = 0;
  double p = 0.5;
  std::uint64_t n = 0;  // both parties in the arrival-time basis
  std::uint64_t m = 0;  // both parties in the dispersed basis
};

/// n = floor(p^2 N), m = floor((1 - p)^2 N); rejects p outside [1/2, 1).
FrameAccounting sift_counts(std::uint64_t N, double p);

double erf_inverse(double y);
/// erfc^{-1}(q) = erf^{-1}(1 - q) without forming 1 - q.
double erfc_inverse(double q);

enum class BoundForm { Literal, Centered };

struct EstimationInput {
  double sigma_hat_sq = 1.0;
  double sigma_cor_sq = 1.0;
  std::uint64_t m = 2;
  double eps_pe = 1e-5;
};

/// Upper confidence bound on xi. Literal is margin only,
/// (2 / sqrt(m)) erfc^{-1}(eps_pe) sigma_hat^2 / sigma^2; centered adds the
/// point estimate sigma_hat^2 / sigma^2 - 1. margin_scale multiplies the
/// margin and exists only to exercise failure paths.
double xi_upper_bound(const EstimationInput& input, BoundForm form, double margin_scale = 1.0);

enum class Accounting {
  Standard,  // prefactor n / N
  Strict,  // prefactor (n - m) / N
};

struct FiniteKeyRate {
  double raw = 0.0;
  double clamped = 0.0;  // max(raw, 0)
};

/// Finite-key rate in bits per coincidence.
FiniteKeyRate finite_key_rate(double r_do, const FrameAccounting& acct, const SecurityBudget& budget,
                              double d, Accounting accounting = Accounting::Standard);

/// Individual correction terms, bits per key-basis coincidence.
double error_correction_term(double n, double eps_ec);
double privacy_amplification_term(double n, double eps_pa);
double smooth_entropy_term(double n, double d, double eps_bar);

}  // namespace doqkd
