// SPDX-License-Identifier: Apache-2.0
#include "obr/radar.hpp"

#include <cmath>

namespace obr {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244008443621048490;

cplx unit_phasor(double arg) { return {std::cos(arg), std::sin(arg)}; }

}  // namespace

CVec ula_steering(std::size_t count, double angle) {
  if (count == 0) throw InvalidArgument("ula_steering: empty array");
  CVec a(count);
  const double step = kPi * std::sin(angle);
  for (std::size_t k = 0; k < count; ++k) a[k] = unit_phasor(step * static_cast<double>(k));
  return a;
}

CMat lfm_waveform(std::size_t p, std::size_t n, double theta) {
  if (p == 0 || n == 0) throw InvalidArgument("lfm_waveform: empty waveform");
  CMat s(p, n);
  const double inv_n = 1.0 / static_cast<double>(n);
  const double amp = 1.0 / std::sqrt(static_cast<double>(p));
  const double st = std::sin(theta);
  for (std::size_t k = 0; k < p; ++k) {
    for (std::size_t l = 0; l < n; ++l) {
      const double dl = static_cast<double>(l);
      const double arg = inv_n * (2.0 * kPi * dl + kPi * dl * dl + static_cast<double>(k) * st);
      s(k, l) = amp * unit_phasor(arg);
    }
  }
  return s;
}

CMat random_noise_cov(std::size_t m, double alpha, RngStream& rng) {
  if (m == 0) throw InvalidArgument("random_noise_cov: m must be positive");
  if (alpha < 0.0) throw InvalidArgument("random_noise_cov: alpha must be nonnegative");
  CMat h(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      h(i, j) = cplx(rng.next_normal() * kInvSqrt2, rng.next_normal() * kInvSqrt2);
  CMat sigma(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      cplx acc = 0.0;
      for (std::size_t k = 0; k < m; ++k) acc += h(i, k) * std::conj(h(j, k));
      sigma(i, j) = alpha * acc;
      sigma(j, i) = std::conj(sigma(i, j));
    }
    sigma(i, i) = cplx(sigma(i, i).real() + 1.0, 0.0);
  }
  return sigma;
}

CMat perturb_cov(const CMat& sigma_n, double rho, RngStream& rng) {
  if (!sigma_n.square()) throw InvalidArgument("perturb_cov: matrix must be square");
  if (rho < 0.0) throw InvalidArgument("perturb_cov: rho must be nonnegative");
  const std::size_t m = sigma_n.rows();
  if (rho == 0.0 || m == 1) return sigma_n;

  for (int attempt = 0; attempt < 100; ++attempt) {
    CMat out = sigma_n;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) {
        const cplx delta(rho * rng.next_normal(), rho * rng.next_normal());
        out(i, j) += delta;
        out(j, i) = std::conj(out(i, j));
      }
    }
    // Positive definiteness of the complex matrix is equivalent to that of
    // its real embedding.
    CompositeCovariance comp;
    try {
      comp = complex_to_composite(out);
    } catch (const InvalidArgument&) {
      continue;  // PSD validation failed, redraw
    }
    Mat lower;
    if (cholesky(comp.sigma, lower)) return out;
  }
  throw NumericError("perturb_cov: no positive definite draw in 100 attempts");
}

Scenario make_scenario(std::size_t m, std::size_t p, std::size_t n, double phi,
                       double theta, const CMat& sigma_n) {
  if (!sigma_n.square() || sigma_n.rows() != m)
    throw InvalidArgument("make_scenario: sigma_n must be m x m");
  Scenario sc;
  sc.m = m;
  sc.p = p;
  sc.n = n;
  sc.phi = phi;
  sc.theta = theta;
  sc.a_r = ula_steering(m, phi);
  sc.a_t = ula_steering(p, phi);
  sc.s = lfm_waveform(p, n, theta);
  sc.w = CMat(m, n);
  for (std::size_t l = 0; l < n; ++l) {
    cplx g = 0.0;  // a_t^T s_l, plain transpose
    for (std::size_t k = 0; k < p; ++k) g += sc.a_t[k] * sc.s(k, l);
    for (std::size_t i = 0; i < m; ++i) sc.w(i, l) = sc.a_r[i] * g;
  }
  sc.sigma_n = sigma_n;
  sc.comp = complex_to_composite(sigma_n);
  return sc;
}

Scenario make_scenario(std::size_t m, std::size_t p, std::size_t n, double phi,
                       double theta, double alpha, RngStream& rng) {
  Scenario sc = make_scenario(m, p, n, phi, theta, random_noise_cov(m, alpha, rng));
  sc.alpha = alpha;
  return sc;
}

double snr_db(const CMat& sigma_n, std::size_t p, cplx beta) {
  double tr = 0.0;
  for (std::size_t i = 0; i < sigma_n.rows(); ++i) tr += sigma_n(i, i).real();
  return 10.0 * std::log10(static_cast<double>(p) * std::norm(beta) / tr);
}

double beta_for_snr(const CMat& sigma_n, std::size_t p, double snr_db) {
  double tr = 0.0;
  for (std::size_t i = 0; i < sigma_n.rows(); ++i) tr += sigma_n(i, i).real();
  return std::sqrt(tr * std::pow(10.0, snr_db / 10.0) / static_cast<double>(p));
}

QuantizedData simulate_quantized(const Scenario& sc, cplx beta, RngStream& rng) {
  const std::size_t m = sc.m, n = sc.n, k = 2 * m;
  QuantizedData q;
  q.m = m;
  q.n = n;
  q.re.resize(m * n);
  q.im.resize(m * n);

  const Mat lower = cholesky_jittered(sc.comp.sigma);
  Vec z(k), x(k);
  for (std::size_t l = 0; l < n; ++l) {
    CVec wl(m);
    for (std::size_t i = 0; i < m; ++i) wl[i] = sc.w(i, l);
    const Vec mu = composite_mean(wl, beta);
    rng.fill_normal(z);
    for (std::size_t i = 0; i < k; ++i) {
      double acc = mu[i];
      for (std::size_t j = 0; j <= i; ++j) acc += lower(i, j) * z[j];
      x[i] = acc;
    }
    for (std::size_t i = 0; i < m; ++i) {
      q.re[l * m + i] = x[i] >= 0.0 ? 1 : -1;
      q.im[l * m + i] = x[m + i] >= 0.0 ? 1 : -1;
    }
  }
  return q;
}

}  // namespace obr
