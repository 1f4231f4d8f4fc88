#include "doqkd/finite_key.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace doqkd {

namespace {

bool is_probability(double x) { return std::isfinite(x) && x > 0.0 && x < 1.0; }

// floor with slack for the representation error of p in binary
std::uint64_t floor_count(long double x) {
  return static_cast<std::uint64_t>(std::floor(x + 4e-16L * x + 1e-9L));
}

}  // namespace

SecurityBudget::SecurityBudget(double eps_s, double eps_ec, double eps_pa, double eps_pe,
                               double eps_bar)
    : eps_s_(eps_s), eps_ec_(eps_ec), eps_pa_(eps_pa), eps_pe_(eps_pe), eps_bar_(eps_bar) {
  for (double e : {eps_s, eps_ec, eps_pa, eps_pe, eps_bar}) {
    if (!is_probability(e)) {
      throw std::invalid_argument("SecurityBudget: every failure probability must lie in (0, 1)");
    }
  }
  if (sum_rule_error() > 1e-12) {
    throw std::invalid_argument("SecurityBudget: eps_ec + eps_pa + eps_pe + eps_bar must equal eps_s");
  }
}

SecurityBudget SecurityBudget::from_split(double eps_s, double eps_ec, double eps_pa, double eps_pe) {
  return SecurityBudget(eps_s, eps_ec, eps_pa, eps_pe, eps_s - eps_ec - eps_pa - eps_pe);
}

double SecurityBudget::sum_rule_error() const {
  return std::abs(eps_ec_ + eps_pa_ + eps_pe_ + eps_bar_ - eps_s_) / eps_s_;
}

FrameAccounting sift_counts(std::uint64_t N, double p) {
  if (!(p >= 0.5 && p < 1.0)) {
    throw std::invalid_argument("sift_counts: p must lie in [1/2, 1)");
  }
  FrameAccounting a;
  a.N = N;
  a.p = p;
  const long double total = static_cast<long double>(N);
  const long double pl = p;
  a.n = floor_count(pl * pl * total);
  a.m = floor_count((1.0L - pl) * (1.0L - pl) * total);
  return a;
}

double erf_inverse(double y) {
  if (!std::isfinite(y) || !(std::abs(y) < 1.0)) {
    throw std::invalid_argument("erf_inverse: argument must lie in (-1, 1)");
  }
  return boost::math::erf_inv(y);
}

double erfc_inverse(double q) {
  if (!std::isfinite(q) || !(q > 0.0 && q < 2.0)) {
    throw std::invalid_argument("erfc_inverse: argument must lie in (0, 2)");
  }
  return boost::math::erfc_inv(q);
}

double xi_upper_bound(const EstimationInput& input, BoundForm form, double margin_scale) {
  if (input.m < 2) throw std::invalid_argument("xi_upper_bound: m must be >= 2");
  if (!(input.sigma_cor_sq > 0.0) || !(input.sigma_hat_sq >= 0.0) ||
      !std::isfinite(input.sigma_hat_sq) || !std::isfinite(input.sigma_cor_sq)) {
    throw std::invalid_argument("xi_upper_bound: variances must be finite, sigma_cor^2 > 0");
  }
  if (!is_probability(input.eps_pe)) {
    throw std::invalid_argument("xi_upper_bound: eps_pe must lie in (0, 1)");
  }
  const double ratio = input.sigma_hat_sq / input.sigma_cor_sq;
  const double margin =
      margin_scale * 2.0 / std::sqrt(static_cast<double>(input.m)) * erfc_inverse(input.eps_pe) * ratio;
  return form == BoundForm::Centered ? (ratio - 1.0) + margin : margin;
}

double error_correction_term(double n, double eps_ec) { return std::log2(2.0 / eps_ec) / n; }

double privacy_amplification_term(double n, double eps_pa) {
  return 2.0 / n * std::log2(1.0 / eps_pa);
}

double smooth_entropy_term(double n, double d, double eps_bar) {
  return (2.0 * std::log2(d) + 3.0) * std::sqrt(std::log2(2.0 / eps_bar) / n);
}

FiniteKeyRate finite_key_rate(double r_do, const FrameAccounting& acct, const SecurityBudget& budget,
                              double d, Accounting accounting) {
  if (acct.n == 0 || acct.N == 0) throw std::invalid_argument("finite_key_rate: n must be >= 1");
  if (!std::isfinite(r_do)) throw std::invalid_argument("finite_key_rate: r_do must be finite");
  if (!(d > 1.0)) throw std::invalid_argument("finite_key_rate: d must exceed 1");
  const double n = static_cast<double>(acct.n);
  const double key_frames =
      accounting == Accounting::Strict ? static_cast<double>(acct.n) - static_cast<double>(acct.m) : n;
  const double bracket = r_do - error_correction_term(n, budget.eps_ec()) -
                         privacy_amplification_term(n, budget.eps_pa()) -
                         smooth_entropy_term(n, d, budget.eps_bar());
  FiniteKeyRate r;
  r.raw = key_frames / static_cast<double>(acct.N) * bracket;
  r.clamped = std::max(r.raw, 0.0);
  return r;
}

}  // namespace doqkd
