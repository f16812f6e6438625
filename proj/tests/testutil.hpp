// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>

#include "obr/linalg.hpp"
#include "obr/orthant.hpp"
#include "obr/radar.hpp"
#include "obr/rng.hpp"

namespace testutil {

// Reference complementary error function, independent of the library's
// rational-approximation path: Taylor series of erf in long double for small
// arguments, Lentz continued fraction for the tail.
inline double erfc_reference(double x) {
  if (x < 0.0) return 2.0 - erfc_reference(-x);
  const long double xl = x;
  if (x < 3.0) {
    // erf(x) = 2/sqrt(pi) sum (-1)^n x^(2n+1) / (n! (2n+1))
    long double term = xl, sum = xl;
    for (int n = 1; n < 200; ++n) {
      term *= -xl * xl / n;
      const long double add = term / (2 * n + 1);
      sum += add;
      if (std::fabs(static_cast<double>(add)) <
          1e-22 * std::fabs(static_cast<double>(sum)))
        break;
    }
    const long double erf =
        sum * 2.0L / std::sqrt(3.14159265358979323846264338328L);
    return static_cast<double>(1.0L - erf);
  }
  // erfc(x) = exp(-x^2)/sqrt(pi) / (x+) (1/2)/(x+) 1/(x+) (3/2)/(x+) ...
  long double c = 1e300L, d = 1.0L / xl, f = d;
  for (int n = 1; n < 300; ++n) {
    const long double a = n * 0.5L;
    d = 1.0L / (xl + a * d);
    c = xl + a / c;
    const long double delta = c * d;
    f *= delta;
    if (std::fabs(static_cast<double>(delta) - 1.0) < 1e-19) break;
  }
  const long double pref =
      std::exp(-xl * xl) / std::sqrt(3.14159265358979323846264338328L);
  return static_cast<double>(pref * f);
}

// Plain Monte Carlo orthant probability P(X > 0), X ~ N(mu, sigma).
// Returns the estimate and its standard error. No QMC, no reordering, so it
// shares nothing with the library's quadrature path.
inline std::pair<double, double> mc_orthant(const obr::Vec& mu,
                                            const obr::Mat& sigma,
                                            std::size_t n_draws,
                                            obr::RngStream& rng) {
  const std::size_t k = mu.size();
  const obr::Mat chol = obr::cholesky_jittered(sigma);
  std::size_t hits = 0;
  obr::Vec z(k * 1024);
  std::size_t done = 0;
  while (done < n_draws) {
    const std::size_t batch = std::min<std::size_t>(1024, n_draws - done);
    rng.fill_normal(std::span<double>(z.data(), batch * k));
    for (std::size_t b = 0; b < batch; ++b) {
      bool inside = true;
      for (std::size_t r = 0; r < k && inside; ++r) {
        double acc = mu[r];
        for (std::size_t c = 0; c <= r; ++c) acc += chol(r, c) * z[b * k + c];
        inside = acc > 0.0;
      }
      hits += inside;
    }
    done += batch;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(n_draws);
  return {p, std::sqrt(std::max(p * (1.0 - p), 1e-12) /
                       static_cast<double>(n_draws))};
}

inline double binomial_sigma(double p, std::size_t n) {
  return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n));
}

// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
inline double ks_distance(obr::Vec sample,
                          const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
    d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

inline double chi2_2_cdf(double x) { return x <= 0.0 ? 0.0 : 1.0 - std::exp(-0.5 * x); }

// Random symmetric positive definite matrix with unit-scale eigenvalues.
inline obr::Mat random_spd(std::size_t k, obr::RngStream& rng) {
  obr::Mat a(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) a(i, j) = rng.next_normal();
  obr::Mat s(k, k, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      double acc = 0.0;
      for (std::size_t l = 0; l < k; ++l) acc += a(i, l) * a(j, l);
      s(i, j) = acc / static_cast<double>(k);
    }
  for (std::size_t i = 0; i < k; ++i) s(i, i) += 0.25;
  return s;
}

// Definitional Rao statistic for single-antenna scenarios, built from
// nothing but bivariate orthant probabilities: the score is a central
// finite difference of the one-bit log-likelihood in (Re beta, Im beta) at
// zero, the information matrix is the exact pattern-averaged outer product
// of finite-difference log-probability gradients, and the statistic is
// score^T I^{-1} score. Shares no code with the table pipeline.
inline double definitional_rao_m1(const obr::Scenario& sc,
                                  const obr::QuantizedData& q) {
  const obr::CompositeCovariance& comp = sc.comp;
  obr::RngStream dummy(0, 0);
  const auto pattern_prob = [&](int t0, int t1, double a, double b,
                                std::size_t l) {
    const obr::Vec nu = obr::composite_mean({sc.w(0, l)}, obr::cplx(a, b));
    obr::Vec mu = {t0 * nu[0] / std::sqrt(comp.d[0]),
                   t1 * nu[1] / std::sqrt(comp.d[1])};
    obr::Mat cj(2, 2);
    cj(0, 0) = cj(1, 1) = 1.0;
    cj(0, 1) = cj(1, 0) = t0 * t1 * comp.c(0, 1);
    return obr::orthant_prob(mu, cj, 1e-9, dummy).value;
  };

  const double h = 1e-5;
  // score via FD of the observed log-likelihood
  double s_a = 0.0, s_b = 0.0;
  for (std::size_t l = 0; l < q.n; ++l) {
    const int t0 = q.re[l], t1 = q.im[l];
    s_a += (std::log(pattern_prob(t0, t1, h, 0.0, l)) -
            std::log(pattern_prob(t0, t1, -h, 0.0, l))) /
           (2.0 * h);
    s_b += (std::log(pattern_prob(t0, t1, 0.0, h, l)) -
            std::log(pattern_prob(t0, t1, 0.0, -h, l))) /
           (2.0 * h);
  }

  // information via the pattern-averaged outer product of FD gradients
  double i_aa = 0.0, i_bb = 0.0, i_ab = 0.0;
  for (std::size_t l = 0; l < q.n; ++l)
    for (int t0 : {-1, 1})
      for (int t1 : {-1, 1}) {
        const double p0 = pattern_prob(t0, t1, 0.0, 0.0, l);
        const double ga = (std::log(pattern_prob(t0, t1, h, 0.0, l)) -
                           std::log(pattern_prob(t0, t1, -h, 0.0, l))) /
                          (2.0 * h);
        const double gb = (std::log(pattern_prob(t0, t1, 0.0, h, l)) -
                           std::log(pattern_prob(t0, t1, 0.0, -h, l))) /
                          (2.0 * h);
        i_aa += p0 * ga * ga;
        i_bb += p0 * gb * gb;
        i_ab += p0 * ga * gb;
      }

  const double det = i_aa * i_bb - i_ab * i_ab;
  return (s_a * s_a * i_bb - 2.0 * s_a * s_b * i_ab + s_b * s_b * i_aa) / det;
}

// Unit-diagonal version of random_spd.
inline obr::Mat random_coherence(std::size_t k, obr::RngStream& rng) {
  obr::Mat s = random_spd(k, rng);
  obr::Vec inv_sd(k);
  for (std::size_t i = 0; i < k; ++i) inv_sd[i] = 1.0 / std::sqrt(s(i, i));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) s(i, j) *= inv_sd[i] * inv_sd[j];
  for (std::size_t i = 0; i < k; ++i) s(i, i) = 1.0;
  obr::symmetrize(s);
  return s;
}

// Coherence of a random circular complex covariance; unlike random_coherence
// this carries the quarter-turn invariance the pattern-table builder needs.
inline obr::Mat random_composite_coherence(std::size_t m, obr::RngStream& rng) {
  return obr::complex_to_composite(obr::random_noise_cov(m, 1.0, rng)).c;
}

}  // namespace testutil
