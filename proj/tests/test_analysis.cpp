// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "obr/analysis.hpp"
#include "obr/composite.hpp"
#include "obr/detector.hpp"
#include "obr/radar.hpp"
#include "obr/rng.hpp"
#include "testutil.hpp"

using namespace obr;

namespace {

// Empirical CDF of lambda_1 (z_1 + sqrt(d2_1))^2 + lambda_2 (z_2 + sqrt(d2_2))^2,
// a direct sampling oracle for the characteristic-function inversion.
double quadratic_form_mc_cdf(const double lambda[2], const double delta2[2],
                             double x, std::size_t n_draws, RngStream& rng) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n_draws; ++i) {
    const double z1 = rng.next_normal() + std::sqrt(delta2[0]);
    const double z2 = rng.next_normal() + std::sqrt(delta2[1]);
    if (lambda[0] * z1 * z1 + lambda[1] * z2 * z2 <= x) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n_draws);
}

Scenario small_scenario(std::size_t n) {
  RngStream rng(314, 1);
  return make_scenario(2, 2, n, 0.25 * kPi, 0.25 * kPi, 1.0, rng);
}

}  // namespace

TEST_CASE("quadratic form cdf reproduces the scaled chi-square closed forms",
          "[analysis]") {
  const std::vector<double> xs = {0.2, 0.5, 1.0, 2.5, 5.0, 9.21, 15.0};

  SECTION("unit weights, central") {
    const double lambda[2] = {1.0, 1.0}, delta2[2] = {0.0, 0.0};
    for (double x : xs) {
      const double want = 1.0 - std::exp(-0.5 * x);
      REQUIRE(std::fabs(imhof_cdf(lambda, delta2, x) - want) < 1e-8);
    }
  }
  SECTION("equal weights, central, scaled") {
    const double lambda[2] = {0.7, 0.7}, delta2[2] = {0.0, 0.0};
    for (double x : xs) {
      const double want = 1.0 - std::exp(-0.5 * x / 0.7);
      REQUIRE(std::fabs(imhof_cdf(lambda, delta2, x) - want) < 1e-8);
    }
  }
}

TEST_CASE("quadratic form cdf agrees with the noncentral series route",
          "[analysis]") {
  // Equal weights collapse the two-component form to a chi-square with two
  // degrees of freedom; the Poisson mixture series is an independent path.
  const std::vector<double> xs = {0.5, 1.0, 2.5, 5.0, 9.21, 15.0};
  SECTION("unit weights") {
    const double lambda[2] = {1.0, 1.0}, delta2[2] = {1.1, 2.3};
    for (double x : xs) {
      const double want = 1.0 - noncentral_chi2_2_tail(1.1 + 2.3, x);
      REQUIRE(std::fabs(imhof_cdf(lambda, delta2, x) - want) < 5e-8);
    }
  }
  SECTION("scaled weights") {
    const double lambda[2] = {0.7, 0.7}, delta2[2] = {0.5, 1.5};
    for (double x : xs) {
      const double want = 1.0 - noncentral_chi2_2_tail(2.0, x / 0.7);
      REQUIRE(std::fabs(imhof_cdf(lambda, delta2, x) - want) < 5e-8);
    }
  }
}

TEST_CASE("quadratic form cdf matches direct sampling for distinct weights",
          "[analysis]") {
  const std::size_t n_draws = 400000;
  RngStream rng(99, 7);
  const double la[2] = {1.7, 0.4}, da[2] = {1.2, 0.3};
  for (double x : {1.0, 3.0, 6.0, 10.0}) {
    const double got = imhof_cdf(la, da, x);
    const double mc = quadratic_form_mc_cdf(la, da, x, n_draws, rng);
    REQUIRE(std::fabs(got - mc) < 4.0 * testutil::binomial_sigma(got, n_draws));
  }
  const double lb[2] = {2.5, 0.15}, db[2] = {0.0, 2.0};
  for (double x : {2.0, 5.0, 12.0}) {
    const double got = imhof_cdf(lb, db, x);
    const double mc = quadratic_form_mc_cdf(lb, db, x, n_draws, rng);
    REQUIRE(std::fabs(got - mc) < 4.0 * testutil::binomial_sigma(got, n_draws));
  }
}

TEST_CASE("quadratic form cdf is a proper distribution function", "[analysis]") {
  const double lambda[2] = {1.7, 0.4}, delta2[2] = {1.2, 0.3};
  REQUIRE(imhof_cdf(lambda, delta2, 0.0) == 0.0);
  REQUIRE(imhof_cdf(lambda, delta2, -3.0) == 0.0);
  double prev = 0.0;
  for (double x = 0.25; x <= 40.0; x += 0.25) {
    const double f = imhof_cdf(lambda, delta2, x);
    REQUIRE(f >= 0.0);
    REQUIRE(f <= 1.0);
    REQUIRE(f >= prev - 1e-8);
    prev = f;
  }
  // deep in the tail the mass left is ~exp(-x / (2 max lambda)), so 40 is
  // still at the 1e-4 level for lambda = 1.7; 120 is comfortably past 1e-8
  REQUIRE(imhof_cdf(lambda, delta2, 120.0) > 1.0 - 1e-8);

  const double bad[2] = {-1.0, 1.0}, neg[2] = {-0.5, 0.0};
  REQUIRE_THROWS_AS(imhof_cdf(bad, delta2, 1.0), InvalidArgument);
  REQUIRE_THROWS_AS(imhof_cdf(lambda, neg, 1.0), InvalidArgument);
}

TEST_CASE("noncentral chi-square tail has the right limits", "[analysis]") {
  // Zero noncentrality reduces to the exponential tail.
  for (double x : {0.5, 2.0, 9.21, 13.8}) {
    REQUIRE(std::fabs(noncentral_chi2_2_tail(0.0, x) - std::exp(-0.5 * x)) <
            1e-14);
  }
  REQUIRE(noncentral_chi2_2_tail(3.0, 0.0) == 1.0);
  REQUIRE(noncentral_chi2_2_tail(3.0, -1.0) == 1.0);
  REQUIRE_THROWS_AS(noncentral_chi2_2_tail(-0.1, 1.0), InvalidArgument);

  // Monotone decreasing in x, increasing in the noncentrality.
  double prev = 1.0;
  for (double x = 0.5; x <= 30.0; x += 0.5) {
    const double t = noncentral_chi2_2_tail(4.0, x);
    REQUIRE(t <= prev + 1e-15);
    prev = t;
  }
  prev = 0.0;
  for (double d2 = 0.0; d2 <= 12.0; d2 += 0.5) {
    const double t = noncentral_chi2_2_tail(d2, 6.0);
    REQUIRE(t >= prev - 1e-15);
    prev = t;
  }

  // Against direct sampling at a noncentrality the detector actually meets.
  RngStream rng(55, 3);
  const std::size_t n_draws = 400000;
  for (double x : {2.0, 6.0, 12.0}) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n_draws; ++i) {
      const double z1 = rng.next_normal() + std::sqrt(3.0);
      const double z2 = rng.next_normal();
      if (z1 * z1 + z2 * z2 > x) ++hits;
    }
    const double mc = static_cast<double>(hits) / static_cast<double>(n_draws);
    const double got = noncentral_chi2_2_tail(3.0, x);
    REQUIRE(std::fabs(got - mc) < 4.0 * testutil::binomial_sigma(got, n_draws));
  }
}

TEST_CASE("mismatch analysis collapses when the truth is the assumed model",
          "[analysis]") {
  const Scenario sc = small_scenario(80);
  const DetectorTables det = build_detector_tables(sc, 1e-7, RngStream(21, 0));
  const MismatchAnalysis mm =
      analyze_mismatch(det, sc.comp, 1e-6, RngStream(21, 1));

  REQUIRE(mm.upsilon_sq == det.upsilon_sq);
  REQUIRE(std::fabs(mm.upsilon1_sq - det.upsilon_sq) < 2e-4 * det.upsilon_sq);
  REQUIRE(std::fabs(mm.varsigma1_sq - det.upsilon_sq) < 1e-3 * det.upsilon_sq);
  REQUIRE(std::fabs(mm.varsigma2_sq - det.upsilon_sq) < 1e-3 * det.upsilon_sq);
  // The two signal-response forms are images of each other under the
  // quarter-turn, so they agree to rounding, not just to quadrature error.
  REQUIRE(std::fabs(mm.varsigma1_sq - mm.varsigma2_sq) <
          1e-9 * std::fabs(mm.varsigma1_sq));
  for (std::size_t j = 0; j < mm.o_prime.size(); ++j)
    REQUIRE(std::fabs(mm.o_prime[j] - det.noise.o[j]) < 1e-5);

  // With matched scales the corrected tail is the nominal exponential one.
  for (double g : {1.0, 4.0, 9.21})
    REQUIRE(std::fabs(pfa_mismatched(g, det.upsilon_sq, mm.upsilon1_sq) -
                      std::exp(-0.5 * g)) < 1e-3);

  // The low-snr detection approximations also coincide at matched scales.
  const cplx beta(0.05, 0.03);
  for (double g : {2.0, 4.60517, 9.21034}) {
    REQUIRE(std::fabs(pd_low_snr_mismatched(g, mm, beta) -
                      pd_low_snr(g, det, beta)) < 2e-3);
  }
}

TEST_CASE("mismatched tail and threshold are mutual inverses", "[analysis]") {
  const double ups = 3.7, ups1 = 4.4;
  for (double pfa : {0.3, 0.1, 0.01, 1e-3}) {
    const double g = threshold_mismatched(pfa, ups, ups1);
    REQUIRE(std::fabs(pfa_mismatched(g, ups, ups1) - pfa) < 1e-12 * pfa);
  }
  // The scaled-exponential form itself.
  REQUIRE(std::fabs(pfa_mismatched(5.0, 2.0, 2.5) -
                    std::exp(-0.5 * 2.0 * 5.0 / 2.5)) < 1e-15);
  REQUIRE(pfa_mismatched(0.0, 2.0, 2.5) == 1.0);
  REQUIRE(pfa_mismatched(-1.0, 2.0, 2.5) == 1.0);
  REQUIRE_THROWS_AS(pfa_mismatched(1.0, -1.0, 2.0), InvalidArgument);
  REQUIRE_THROWS_AS(threshold_mismatched(0.0, 2.0, 2.0), InvalidArgument);
  REQUIRE_THROWS_AS(threshold_mismatched(1.0, 2.0, 2.0), InvalidArgument);
}

TEST_CASE("averaged false alarm rate collapses for a degenerate prior",
          "[analysis]") {
  const Scenario sc = small_scenario(60);
  const DetectorTables det = build_detector_tables(sc, 1e-7, RngStream(31, 0));
  const Vec gammas = {0.5, 2.0, 4.60517, 9.21034};
  const PriorSampler fixed = [&sc](RngStream&) { return sc.sigma_n; };

  // First-order mode: a zero correlation increment leaves the Fisher scale
  // untouched, so the collapse is exact.
  const Vec taylor = avg_pfa(gammas, det, fixed, 3, AvgPfaMode::taylor, 1e-6,
                             RngStream(31, 1));
  for (std::size_t g = 0; g < gammas.size(); ++g)
    REQUIRE(std::fabs(taylor[g] - std::exp(-0.5 * gammas[g])) < 1e-12);

  // Direct mode re-evaluates the pattern probabilities by quadrature.
  const Vec direct = avg_pfa(gammas, det, fixed, 3, AvgPfaMode::direct, 1e-6,
                             RngStream(31, 2));
  for (std::size_t g = 0; g < gammas.size(); ++g)
    REQUIRE(std::fabs(direct[g] - std::exp(-0.5 * gammas[g])) <
            1e-3 * std::exp(-0.5 * gammas[g]));

  REQUIRE_THROWS_AS(
      avg_pfa(gammas, det, fixed, 0, AvgPfaMode::direct, 1e-6, RngStream(31, 3)),
      InvalidArgument);
}

TEST_CASE("first-order averaged false alarm rate tracks the direct route",
          "[analysis]") {
  const Scenario sc = small_scenario(60);
  const DetectorTables det = build_detector_tables(sc, 1e-7, RngStream(41, 0));

  // One fixed perturbed covariance removes prior sampling noise from the
  // comparison, leaving only the expansion error at this perturbation size.
  RngStream perturb_rng(41, 5);
  const CMat fixed_cov = perturb_cov(sc.sigma_n, 0.02, perturb_rng);
  const PriorSampler fixed = [&fixed_cov](RngStream&) { return fixed_cov; };

  const Vec gammas = {2.0, 4.60517, 9.21034};
  const Vec taylor = avg_pfa(gammas, det, fixed, 1, AvgPfaMode::taylor, 1e-6,
                             RngStream(41, 1));
  const Vec direct = avg_pfa(gammas, det, fixed, 1, AvgPfaMode::direct, 1e-6,
                             RngStream(41, 2));
  for (std::size_t g = 0; g < gammas.size(); ++g) {
    REQUIRE(taylor[g] > 0.0);
    REQUIRE(std::fabs(taylor[g] - direct[g]) < 0.02 * direct[g]);
  }
}

TEST_CASE("signal moments vanish without a target", "[analysis]") {
  const Scenario sc = small_scenario(50);
  const DetectorTables det = build_detector_tables(sc, 1e-7, RngStream(51, 0));
  const NonNullMoments mom =
      non_null_moments(det, cplx(0.0, 0.0), nullptr, 1e-6, RngStream(51, 1));

  REQUIRE(std::fabs(mom.u_w[0]) < 1e-3);
  REQUIRE(std::fabs(mom.u_w[1]) < 1e-3);
  REQUIRE(std::fabs(mom.sigma_w(0, 0) - 1.0) < 2e-3);
  REQUIRE(std::fabs(mom.sigma_w(1, 1) - 1.0) < 2e-3);
  REQUIRE(std::fabs(mom.sigma_w(0, 1)) < 2e-3);
  REQUIRE(std::fabs(mom.lambda[0] - 1.0) < 3e-3);
  REQUIRE(std::fabs(mom.lambda[1] - 1.0) < 3e-3);

  // The statistic then reduces to its null distribution.
  for (double g : {2.0, 4.60517, 9.21034})
    REQUIRE(std::fabs(pd_exact(g, mom) - std::exp(-0.5 * g)) < 2e-3);
  REQUIRE(pd_exact(0.0, mom) == 1.0);
}

TEST_CASE("moment route approaches the weak-signal approximation", "[analysis]") {
  const Scenario sc = small_scenario(50);
  const DetectorTables det = build_detector_tables(sc, 1e-7, RngStream(61, 0));

  const double beta_lo = beta_for_snr(sc.sigma_n, sc.p, -30.0);
  const NonNullMoments weak =
      non_null_moments(det, cplx(beta_lo, 0.0), nullptr, 1e-6, RngStream(61, 1));
  for (double g : {2.0, 4.60517, 9.21034})
    REQUIRE(std::fabs(pd_exact(g, weak) - pd_low_snr(g, det, beta_lo)) < 2e-3);

  // At a strong signal the two routes separate; the moment route keeps more
  // of the curvature, so only a loose agreement is expected.
  const double beta_hi = beta_for_snr(sc.sigma_n, sc.p, -5.0);
  const NonNullMoments strong =
      non_null_moments(det, cplx(beta_hi, 0.0), nullptr, 1e-6, RngStream(61, 2));
  double max_gap = 0.0;
  double prev = 1.0;
  for (double g = 0.5; g <= 18.0; g += 0.5) {
    const double pe = pd_exact(g, strong);
    REQUIRE(pe >= 0.0);
    REQUIRE(pe <= 1.0);
    REQUIRE(pe <= prev + 1e-9);
    prev = pe;
    max_gap = std::max(max_gap, std::fabs(pe - pd_low_snr(g, det, beta_hi)));
  }
  REQUIRE(max_gap < 0.2);
  REQUIRE(std::isfinite(strong.m2[0]));
  REQUIRE(std::isfinite(strong.m2[1]));
}

TEST_CASE("one-bit covariance estimate recovers the coherence", "[analysis]") {
  RngStream rng(71, 0);
  const Scenario sc = make_scenario(2, 2, 120000, 0.25 * kPi, 0.25 * kPi, 1.0, rng);
  RngStream data_rng(71, 1);
  const QuantizedData q = simulate_quantized(sc, cplx(0.0, 0.0), data_rng);
  const CompositeCovariance est = estimate_composite_one_bit(q);

  const std::size_t k = 2 * sc.m;
  REQUIRE(est.d.size() == k);
  for (double dv : est.d) REQUIRE(dv == 0.5);
  for (std::size_t r = 0; r < k; ++r) {
    REQUIRE(est.c(r, r) == 1.0);
    for (std::size_t s = 0; s < k; ++s) {
      REQUIRE(std::fabs(est.c(r, s) - sc.comp.c(r, s)) < 0.02);
      REQUIRE(est.c(r, s) == est.c(s, r));
    }
  }
  const Vec eig = jacobi_eigenvalues(est.c, nullptr);
  REQUIRE(eig[0] >= -1e-10);

  QuantizedData tiny;
  tiny.m = 1;
  tiny.n = 1;
  tiny.re = {1};
  tiny.im = {1};
  REQUIRE_THROWS_AS(estimate_composite_one_bit(tiny), InvalidArgument);
}
