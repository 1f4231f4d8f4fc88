#include "doqkd/finite_key.hpp"

#include "fixtures.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <doctest.h>

#include <cmath>
#include <random>

using namespace doqkd;

namespace {

SecurityBudget equal_budget(double eps_s = 1e-5, double eps_ec = 1e-10) {
  const double share = (eps_s - eps_ec) / 3.0;
  return SecurityBudget::from_split(eps_s, eps_ec, share, share);
}

FrameAccounting frames(std::uint64_t n, double N, double p = 0.9) {
  FrameAccounting a;
  a.N = static_cast<std::uint64_t>(N);
  a.p = p;
  a.n = n;
  a.m = 0;
  return a;
}

}  // namespace

TEST_CASE("security budget") {
  const auto b = equal_budget();
  CHECK(b.sum_rule_error() <= 1e-12);
  CHECK(b.eps_bar() > 0.0);
  CHECK_THROWS_AS(SecurityBudget(1e-5, 1e-10, 1e-6, 1e-6, 1e-6), std::invalid_argument);
  CHECK_THROWS_AS(SecurityBudget::from_split(1e-5, 1e-10, 5e-6, 5e-6), std::invalid_argument);
  CHECK_THROWS_AS(SecurityBudget(1e-5, 0.0, 5e-6, 2e-6, 3e-6), std::invalid_argument);
}

TEST_CASE("sifting counts") {
  const auto a = sift_counts(1000000, 0.9);
  CHECK(a.n == 810000u);
  CHECK(a.m == 10000u);
  const auto s = sift_counts(1000000, 0.5);
  CHECK(s.n == 250000u);
  CHECK(s.m == 250000u);
  const auto z = sift_counts(0, 0.7);
  CHECK(z.n == 0u);
  CHECK(z.m == 0u);
  CHECK_THROWS_AS(sift_counts(100, 0.49), std::invalid_argument);
  CHECK_THROWS_AS(sift_counts(100, 1.0), std::invalid_argument);

  std::mt19937_64 r(5);
  for (int i = 0; i < 200; ++i) {
    const double p = std::uniform_real_distribution<double>(0.5, 0.999)(r);
    const std::uint64_t N = r() % 100000000000ull;
    const auto c = sift_counts(N, p);
    CHECK(c.m <= c.n);
    CHECK(static_cast<double>(c.n) <= p * p * static_cast<double>(N) * (1.0 + 1e-15) + 1e-9);
    CHECK(static_cast<double>(c.n) > p * p * static_cast<double>(N) - 1.0 - 1e-6);
  }
}

TEST_CASE("inverse error function") {
  CHECK(erf_inverse(0.0) == 0.0);
  CHECK(erf_inverse(0.99) == doctest::Approx(fixtures::kErfInv099).epsilon(1e-12));
  CHECK(erf_inverse(1.0 - 1e-5) == doctest::Approx(fixtures::kErfInvTail).epsilon(1e-10));
  CHECK(erfc_inverse(1e-5) == doctest::Approx(fixtures::kErfInvTail).epsilon(1e-12));
  CHECK(erf_inverse(-0.5) == doctest::Approx(-0.4769362762044699).epsilon(1e-12));
  CHECK_THROWS_AS(erf_inverse(1.0), std::invalid_argument);
  CHECK_THROWS_AS(erf_inverse(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(erfc_inverse(0.0), std::invalid_argument);

  for (double q : {1e-15, 1e-12, 1e-9, 1e-6, 1e-3, 0.1, 0.5}) {
    const double x = erfc_inverse(q);
    CHECK(boost::math::erfc(x) == doctest::Approx(q).epsilon(1e-12));
  }
}

TEST_CASE("xi upper bound") {
  EstimationInput in{1.21, 1.0, 10000, 1e-5};
  const double margin = 0.02 * fixtures::kErfInvTail * 1.21;
  CHECK(xi_upper_bound(in, BoundForm::Literal) == doctest::Approx(margin).epsilon(1e-12));
  CHECK(xi_upper_bound(in, BoundForm::Literal) == doctest::Approx(0.07559).epsilon(1e-4));
  CHECK(xi_upper_bound(in, BoundForm::Centered) == doctest::Approx(0.21 + margin).epsilon(1e-12));
  CHECK(xi_upper_bound(in, BoundForm::Literal, 2.0) == doctest::Approx(2.0 * margin).epsilon(1e-12));

  in.m = 1000000000000000000ull;
  CHECK(std::abs(xi_upper_bound(in, BoundForm::Centered) - 0.21) < 1e-6);

  in.m = 1;
  CHECK_THROWS_AS(xi_upper_bound(in, BoundForm::Centered), std::invalid_argument);
  in.m = 100;
  in.eps_pe = 0.0;
  CHECK_THROWS_AS(xi_upper_bound(in, BoundForm::Centered), std::invalid_argument);
}

TEST_CASE("xi upper bound is monotone in m and eps") {
  for (BoundForm form : {BoundForm::Literal, BoundForm::Centered}) {
    double prev = INFINITY;
    for (std::uint64_t m = 2; m < 10000000000ull; m *= 3) {
      const double x = xi_upper_bound({1.21, 1.0, m, 1e-5}, form);
      CHECK(x < prev);
      prev = x;
    }
    prev = -INFINITY;
    for (double e = 0.5; e > 1e-14; e /= 7.0) {
      const double x = xi_upper_bound({1.21, 1.0, 1000, e}, form);
      CHECK(x > prev);
      prev = x;
    }
  }
}

TEST_CASE("correction terms") {
  CHECK(error_correction_term(1e6, 1e-10) == doctest::Approx(fixtures::kEcTerm1e6).epsilon(1e-13));
  CHECK(smooth_entropy_term(1e6, 8.0, 1e-7) == doctest::Approx(fixtures::kSmoothTerm1e6).epsilon(1e-13));
  CHECK(privacy_amplification_term(1e6, 0.5) == doctest::Approx(2e-6).epsilon(1e-14));
}

TEST_CASE("finite key rate") {
  const auto b = equal_budget();
  const auto acct = sift_counts(1000000, 0.9);
  const auto r = finite_key_rate(1.8, acct, b, 8.0);
  const double n = 810000.0;
  const double expected = 0.81 * (1.8 - error_correction_term(n, b.eps_ec()) -
                                  privacy_amplification_term(n, b.eps_pa()) -
                                  smooth_entropy_term(n, 8.0, b.eps_bar()));
  CHECK(r.raw == doctest::Approx(expected).epsilon(1e-14));
  CHECK(r.clamped == r.raw);

  const auto strict = finite_key_rate(1.8, acct, b, 8.0, Accounting::Strict);
  CHECK(strict.raw == doctest::Approx(expected * 800000.0 / 810000.0).epsilon(1e-14));

  const auto neg = finite_key_rate(0.01, sift_counts(10000, 0.7), b, 8.0);
  CHECK(neg.raw < 0.0);
  CHECK(neg.clamped == 0.0);

  CHECK_THROWS_AS(finite_key_rate(1.0, sift_counts(0, 0.7), b, 8.0), std::invalid_argument);
  CHECK_THROWS_AS(finite_key_rate(NAN, acct, b, 8.0), std::invalid_argument);
}

TEST_CASE("finite key rate approaches p^2 r_do") {
  const auto b = equal_budget();
  const double p = 0.9;
  const double N = 1e18 / (p * p);
  const auto acct = frames(1000000000000000000ull, N, p);
  const double r = finite_key_rate(1.9, acct, b, 8.0).raw;
  const double limit = static_cast<double>(acct.n) / static_cast<double>(acct.N) * 1.9;
  CHECK(std::abs(r - limit) / limit < 1e-6);
  CHECK(limit == doctest::Approx(p * p * 1.9).epsilon(1e-9));
}

TEST_CASE("finite key rate bounds and monotonicity") {
  const auto b = equal_budget();
  double prev = -INFINITY;
  for (double n = 1e3; n <= 1e12; n *= 10.0) {
    const auto acct = frames(static_cast<std::uint64_t>(n), n / 0.81);
    const double r = finite_key_rate(1.5, acct, b, 8.0).raw;
    CHECK(r > prev);
    CHECK(r <= static_cast<double>(acct.n) / static_cast<double>(acct.N) * 1.5);
    prev = r;
  }
}

TEST_CASE("doubling d changes only the smooth entropy coefficient") {
  const auto b = equal_budget();
  for (double d : {4.0, 8.0, 32.0}) {
    const auto acct = sift_counts(100000000, 0.95);
    const double lo = finite_key_rate(1.5, acct, b, d).raw;
    const double hi = finite_key_rate(1.5, acct, b, 2.0 * d).raw;
    const double n = static_cast<double>(acct.n);
    const double expected = n / 1e8 * 2.0 * std::sqrt(std::log2(2.0 / b.eps_bar()) / n);
    CHECK(std::abs((lo - hi) - expected) < 1e-12);
  }
}
