// SPDX-License-Identifier: Apache-2.0
#include "obr/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "obr/orthant.hpp"

namespace obr {

namespace {

// Sum over snapshots of delta(i,j)^2, per pattern.
Vec column_square_sums(const Mat& delta) {
  Vec out(delta.cols(), 0.0);
  for (std::size_t i = 0; i < delta.rows(); ++i)
    for (std::size_t j = 0; j < delta.cols(); ++j)
      out[j] += delta(i, j) * delta(i, j);
  return out;
}

Mat pattern_conjugate(const Mat& c, const std::int8_t* tau) {
  const std::size_t k = c.rows();
  Mat out(k, k);
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t q = 0; q < k; ++q)
      out(p, q) = static_cast<double>(tau[p]) * static_cast<double>(tau[q]) * c(p, q);
  return out;
}

// Diagonal rescale from the assumed composite diagonal to the true one:
// a'_i = sqrt(d_assumed / d_true) elementwise times a_i.
Vec diag_rescale(const Vec& d_assumed, const Vec& d_true) {
  Vec s(d_assumed.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(d_true[i] > 0.0))
      throw InvalidArgument("mismatch analysis: true diagonal must be positive");
    s[i] = std::sqrt(d_assumed[i] / d_true[i]);
  }
  return s;
}

}  // namespace

MismatchAnalysis analyze_mismatch(const DetectorTables& t,
                                  const CompositeCovariance& truth, double tol,
                                  RngStream rng) {
  if (truth.half() != t.m)
    throw InvalidArgument("analyze_mismatch: dimension mismatch");
  const std::size_t kappa = pattern_count(t.m);
  const std::size_t k = 2 * t.m;

  const NoiseTables primed = build_noise_tables(truth.c, tol, rng);

  MismatchAnalysis mm;
  mm.o_prime = primed.o;
  mm.g.resize(kappa);
  for (std::size_t j = 0; j < kappa; ++j)
    mm.g[j] = primed.o[j] / (t.noise.o[j] * t.noise.o[j]);
  mm.upsilon_sq = t.upsilon_sq;

  const Vec cs1 = column_square_sums(t.delta1);
  const Vec cs2 = column_square_sums(t.delta2);
  double u1 = 0.0, u2 = 0.0;
  for (std::size_t j = 0; j < kappa; ++j) {
    u1 += cs1[j] * mm.g[j];
    u2 += cs2[j] * mm.g[j];
  }
  if (std::fabs(u1 - u2) > 1e-6 * std::fabs(u1))
    throw NumericError("analyze_mismatch: reweighted Fisher identity violated");
  mm.upsilon1_sq = 0.5 * (u1 + u2);

  const Vec scale = diag_rescale(t.d_diag, truth.d);
  double s1 = 0.0, s2 = 0.0;
  Vec ap(k), bp(k);
  for (std::size_t i = 0; i < t.n; ++i) {
    for (std::size_t x = 0; x < k; ++x) {
      ap[x] = scale[x] * t.a_cols(i, x);
      bp[x] = scale[x] * t.b_cols(i, x);
    }
    for (std::size_t j = 0; j < kappa; ++j) {
      const double* dj = primed.d.row(j);
      double da = 0.0, db = 0.0;
      for (std::size_t x = 0; x < k; ++x) {
        da += ap[x] * dj[x];
        db += bp[x] * dj[x];
      }
      s1 += t.delta1(i, j) * da / t.noise.o[j];
      s2 += t.delta2(i, j) * db / t.noise.o[j];
    }
  }
  mm.varsigma1_sq = s1;
  mm.varsigma2_sq = s2;
  return mm;
}

double pfa_mismatched(double gamma, double upsilon_sq, double upsilon1_sq) {
  if (!(upsilon_sq > 0.0 && upsilon1_sq > 0.0))
    throw InvalidArgument("pfa_mismatched: scales must be positive");
  if (gamma <= 0.0) return 1.0;
  return std::exp(-0.5 * upsilon_sq * gamma / upsilon1_sq);
}

double threshold_mismatched(double pfa, double upsilon_sq, double upsilon1_sq) {
  if (!(pfa > 0.0 && pfa < 1.0))
    throw InvalidArgument("threshold_mismatched: pfa must lie in (0,1)");
  if (!(upsilon_sq > 0.0 && upsilon1_sq > 0.0))
    throw InvalidArgument("threshold_mismatched: scales must be positive");
  return -2.0 * upsilon1_sq * std::log(pfa) / upsilon_sq;
}

Vec avg_pfa(const Vec& gammas, const DetectorTables& t, const PriorSampler& prior,
            std::size_t n_draws, AvgPfaMode mode, double tol, RngStream rng) {
  if (n_draws == 0) throw InvalidArgument("avg_pfa: need at least one draw");
  const std::size_t k = 2 * t.m;
  const Vec cs1 = column_square_sums(t.delta1);
  const Vec zero(k, 0.0);

  // Per-orbit constants: the pattern probabilities are orbit-invariant for
  // any composite coherence, so one representative per orbit suffices.
  struct OrbitInfo {
    std::array<std::uint32_t, 4> members;
    std::vector<std::int8_t> tau;
    double o_sq;        // assumed O_j^2 (orbit constant)
    double cs_total;    // sum over the orbit of column square sums
    Vec grad;           // taylor mode: orthant gradient in vech order at C_j
  };
  std::vector<OrbitInfo> orbits;
  orbits.reserve(t.noise.orbits.size());
  for (const auto& orb : t.noise.orbits) {
    OrbitInfo info;
    info.members = orb;
    info.tau.resize(k);
    pattern_signs(orb[0], k, info.tau.data());
    info.o_sq = t.noise.o[orb[0]] * t.noise.o[orb[0]];
    info.cs_total = 0.0;
    for (std::uint32_t e : orb) info.cs_total += cs1[e];
    if (mode == AvgPfaMode::taylor) {
      const Mat cj = pattern_conjugate(t.noise.c, info.tau.data());
      RngStream sub(rng.next_u64(), rng.next_u64());
      info.grad = orthant_grad_corr_all(cj, tol, sub);
    }
    orbits.push_back(std::move(info));
  }

  Vec acc(gammas.size(), 0.0);
  for (std::size_t draw = 0; draw < n_draws; ++draw) {
    RngStream prior_rng(rng.next_u64(), rng.next_u64());
    const CompositeCovariance truth = complex_to_composite(prior(prior_rng));
    if (truth.half() != t.m)
      throw InvalidArgument("avg_pfa: prior sample has wrong dimension");

    double u1_sq = 0.0;
    if (mode == AvgPfaMode::direct) {
      for (const auto& orb : orbits) {
        const Mat cpj = pattern_conjugate(truth.c, orb.tau.data());
        RngStream sub(rng.next_u64(), rng.next_u64());
        const double op = orthant_prob(zero, cpj, tol, sub).value;
        u1_sq += orb.cs_total * op / orb.o_sq;
      }
    } else {
      u1_sq = t.upsilon_sq;
      for (const auto& orb : orbits) {
        double doj = 0.0;
        std::size_t idx = 0;
        for (std::size_t r = 0; r + 1 < k; ++r)
          for (std::size_t s = r + 1; s < k; ++s, ++idx) {
            const double sign = static_cast<double>(orb.tau[r]) *
                                static_cast<double>(orb.tau[s]);
            doj += orb.grad[idx] * sign * (truth.c(r, s) - t.noise.c(r, s));
          }
        u1_sq += orb.cs_total * doj / orb.o_sq;
      }
    }

    if (!(u1_sq > 0.0)) continue;  // degenerate draw contributes zero tail mass
    for (std::size_t g = 0; g < gammas.size(); ++g)
      acc[g] += std::exp(-0.5 * t.upsilon_sq * gammas[g] / u1_sq);
  }
  for (double& v : acc) v /= static_cast<double>(n_draws);
  return acc;
}

double imhof_cdf(const double lambda[2], const double delta2[2], double x) {
  const double l1 = lambda[0], l2 = lambda[1];
  const double q1 = delta2[0], q2 = delta2[1];
  if (!(l1 > 0.0 && l2 > 0.0))
    throw InvalidArgument("imhof_cdf: weights must be positive");
  if (q1 < 0.0 || q2 < 0.0)
    throw InvalidArgument("imhof_cdf: noncentralities must be nonnegative");
  if (x <= 0.0) return 0.0;

  const auto theta = [&](double u) {
    const double a1 = l1 * u, a2 = l2 * u;
    return 0.5 * (std::atan(a1) + std::atan(a2) + q1 * a1 / (1.0 + a1 * a1) +
                  q2 * a2 / (1.0 + a2 * a2)) -
           0.5 * x * u;
  };
  const auto theta_deriv = [&](double u) {
    const double b1 = 1.0 + l1 * l1 * u * u, b2 = 1.0 + l2 * l2 * u * u;
    return 0.5 * (l1 / b1 + l2 / b2 + q1 * l1 * (2.0 - b1) / (b1 * b1) +
                  q2 * l2 * (2.0 - b2) / (b2 * b2)) -
           0.5 * x;
  };
  const auto rho = [&](double u) {
    const double b1 = 1.0 + l1 * l1 * u * u, b2 = 1.0 + l2 * l2 * u * u;
    return std::pow(b1 * b2, 0.25) *
           std::exp(0.5 * (q1 * (b1 - 1.0) / b1 + q2 * (b2 - 1.0) / b2));
  };
  const auto integrand = [&](double u) {
    if (u < 1e-12) return theta_deriv(0.0);
    return std::sin(theta(u)) / (u * rho(u));
  };

  // Truncation point: past U the integrand is a decaying oscillation around
  // frequency x/2; an explicit endpoint correction removes the leading tail
  // term, leaving a residual ~ 8 C / (pi x^2 U^2) with C the envelope scale.
  const double lmin = std::min(l1, l2);
  const double envelope = 1.0 / (std::sqrt(l1 * l2) * std::exp(0.5 * (q1 + q2)));
  const double s1 = 0.5 * ((1.0 - q1) / l1 + (1.0 - q2) / l2);
  constexpr double kTailEps = 1e-10;
  double trunc = std::sqrt(8.0 * envelope / (kPi * x * x * kTailEps));
  trunc = std::max({trunc, 100.0 / lmin, 8.0 * kPi / x,
                    3.0 * std::sqrt(std::fabs(s1) / x + 1.0)});
  trunc = std::min(trunc, 1e7);

  // Panel width resolves the fastest phase; each panel gets 24-point
  // Gauss-Legendre, good for a couple of oscillation periods.
  const double freq = 0.5 * (l1 * (1.0 + q1) + l2 * (1.0 + q2) + x);
  const GaussLegendre& gl = gauss_legendre(24);

  double prev = 0.0;
  for (int refine = 0;; ++refine) {
    const double width0 = 2.0 * kPi / freq / std::ldexp(1.0, refine);
    const std::size_t n_panels = std::min<std::size_t>(
        static_cast<std::size_t>(trunc / width0) + 1, 500000);
    const double width = trunc / static_cast<double>(n_panels);
    double sum = 0.0;
    for (std::size_t p = 0; p < n_panels; ++p) {
      const double mid = (static_cast<double>(p) + 0.5) * width;
      double acc = 0.0;
      for (std::size_t i = 0; i < 24; ++i)
        acc += gl.w[i] * integrand(mid + 0.5 * width * gl.x[i]);
      sum += acc * 0.5 * width;
    }
    // First-order endpoint correction for the truncated oscillatory tail.
    const double td = theta_deriv(trunc);
    if (std::fabs(td) > 1e-8)
      sum += std::cos(theta(trunc)) / (trunc * rho(trunc) * td);

    if (refine > 0 && std::fabs(sum - prev) < 1e-9 * std::max(1.0, std::fabs(sum)))
      return std::clamp(0.5 - sum / kPi, 0.0, 1.0);
    if (refine >= 4)
      throw NumericError("imhof_cdf: quadrature failed to settle");
    prev = sum;
  }
}

double noncentral_chi2_2_tail(double delta2, double x) {
  if (delta2 < 0.0)
    throw InvalidArgument("noncentral_chi2_2_tail: negative noncentrality");
  if (x <= 0.0) return 1.0;

  // Poisson mixture of central tails; the inner tail sum is extended
  // incrementally alongside the Poisson weight.
  const double q = 0.5 * delta2, h = 0.5 * x;
  double pois = std::exp(-q);       // Poisson pmf at k
  double term = std::exp(-h);       // (h^k / k!) e^-h
  double inner = term;              // Pr{chi^2_{2k+2} > x}
  double tail = pois * inner;
  double pois_mass = pois;
  const std::size_t kmax =
      64 + static_cast<std::size_t>(q + 12.0 * std::sqrt(q + 1.0));
  for (std::size_t k = 1; k <= kmax; ++k) {
    pois *= q / static_cast<double>(k);
    term *= h / static_cast<double>(k);
    inner += term;
    tail += pois * inner;
    pois_mass += pois;
    if (1.0 - pois_mass < 1e-15 && k > q) break;
  }
  return std::clamp(tail, 0.0, 1.0);
}

NonNullMoments non_null_moments(const DetectorTables& t, cplx beta,
                                const CompositeCovariance* truth, double tol,
                                RngStream rng) {
  const std::size_t kappa = pattern_count(t.m);
  const std::size_t k = 2 * t.m;
  const double a = beta.real(), b = beta.imag();

  const Mat& c_used = truth ? truth->c : t.noise.c;
  Vec scale(k, 1.0);
  if (truth) scale = diag_rescale(t.d_diag, truth->d);

  std::vector<Mat> cj(kappa);
  std::vector<std::vector<std::int8_t>> taus(kappa, std::vector<std::int8_t>(k));
  for (std::uint32_t j = 0; j < kappa; ++j) {
    pattern_signs(j, k, taus[j].data());
    cj[j] = pattern_conjugate(c_used, taus[j].data());
  }

  double u1 = 0.0, u2 = 0.0;
  double v11 = 0.0, v22 = 0.0, v12 = 0.0;  // E[score^2] style sums
  double r1 = 0.0, r2 = 0.0, r12 = 0.0;    // per-snapshot mean products
  Vec nu(k), mu(k);
  for (std::size_t i = 0; i < t.n; ++i) {
    for (std::size_t xx = 0; xx < k; ++xx)
      nu[xx] = scale[xx] * (a * t.a_cols(i, xx) + b * t.b_cols(i, xx));
    double row1 = 0.0, row2 = 0.0;
    for (std::uint32_t j = 0; j < kappa; ++j) {
      for (std::size_t xx = 0; xx < k; ++xx)
        mu[xx] = static_cast<double>(taus[j][xx]) * nu[xx];
      RngStream sub(rng.next_u64(), rng.next_u64());
      const double qij = orthant_prob(mu, cj[j], tol, sub).value;
      const double oj = t.noise.o[j];
      const double e1 = t.delta1(i, j) / oj, e2 = t.delta2(i, j) / oj;
      u1 += qij * e1;
      u2 += qij * e2;
      v11 += qij * e1 * e1;
      v22 += qij * e2 * e2;
      v12 += qij * e1 * e2;
      row1 += qij * e1;
      row2 += qij * e2;
    }
    r1 += row1 * row1;
    r2 += row2 * row2;
    r12 += row1 * row2;
  }

  NonNullMoments mom;
  const double ups = std::sqrt(t.upsilon_sq);
  mom.u_w = {u1 / ups, u2 / ups};
  mom.sigma_w = Mat(2, 2);
  mom.sigma_w(0, 0) = (v11 - r1) / t.upsilon_sq;
  mom.sigma_w(1, 1) = (v22 - r2) / t.upsilon_sq;
  mom.sigma_w(0, 1) = mom.sigma_w(1, 0) = (v12 - r12) / t.upsilon_sq;

  Mat vecs;
  mom.lambda = jacobi_eigenvalues(mom.sigma_w, &vecs);
  if (!(mom.lambda[0] > 1e-12))
    throw NumericError("non_null_moments: score covariance is degenerate");
  mom.m2.resize(2);
  for (std::size_t l = 0; l < 2; ++l) {
    const double proj = vecs(0, l) * mom.u_w[0] + vecs(1, l) * mom.u_w[1];
    mom.m2[l] = proj * proj / mom.lambda[l];
  }
  return mom;
}

double pd_exact(double gamma, const NonNullMoments& mom) {
  if (gamma <= 0.0) return 1.0;
  const double lambda[2] = {mom.lambda[0], mom.lambda[1]};
  const double delta2[2] = {mom.m2[0], mom.m2[1]};
  return 1.0 - imhof_cdf(lambda, delta2, gamma);
}

double pd_low_snr(double gamma, const DetectorTables& t, cplx beta) {
  if (gamma <= 0.0) return 1.0;
  return noncentral_chi2_2_tail(t.upsilon_sq * std::norm(beta), gamma);
}

double pd_low_snr_mismatched(double gamma, const MismatchAnalysis& mm, cplx beta) {
  if (gamma <= 0.0) return 1.0;
  const double a = beta.real(), b = beta.imag();
  const double num = a * a * mm.varsigma1_sq * mm.varsigma1_sq +
                     b * b * mm.varsigma2_sq * mm.varsigma2_sq;
  const double d2 = num / mm.upsilon1_sq;
  return noncentral_chi2_2_tail(d2, gamma * mm.upsilon_sq / mm.upsilon1_sq);
}

CompositeCovariance estimate_composite_one_bit(const QuantizedData& noise_only) {
  const std::size_t m = noise_only.m, n = noise_only.n, k = 2 * m;
  if (m == 0 || n < 2)
    throw InvalidArgument("estimate_composite_one_bit: need m >= 1 and n >= 2");

  // Sign correlation, then the inverse arcsine law entrywise.
  Mat r(k, k, 0.0);
  Vec tau(k);
  for (std::size_t l = 0; l < n; ++l) {
    for (std::size_t i = 0; i < m; ++i) {
      tau[i] = static_cast<double>(noise_only.re[l * m + i]);
      tau[m + i] = static_cast<double>(noise_only.im[l * m + i]);
    }
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t q = 0; q <= p; ++q) r(p, q) += tau[p] * tau[q];
  }
  Mat c(k, k);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t q = 0; q < p; ++q) {
      const double rv = std::clamp(r(p, q) * inv_n, -1.0, 1.0);
      c(p, q) = c(q, p) = std::sin(0.5 * kPi * rv);
    }
    c(p, p) = 1.0;
  }

  // The population coherence is quarter-turn invariant; averaging the raw
  // estimate over the rotation removes the sampling defect from that
  // symmetry (and keeps the tables builder happy with it downstream).
  c = quarter_turn_project(c);

  // Eigenvalue floor keeps the estimate usable as a coherence matrix, then
  // the unit diagonal is restored exactly.
  Mat vecs;
  Vec eig = jacobi_eigenvalues(c, &vecs);
  if (eig[0] < 1e-8) {
    for (double& e : eig) e = std::max(e, 1e-8);
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t q = 0; q <= p; ++q) {
        double acc = 0.0;
        for (std::size_t l = 0; l < k; ++l)
          acc += vecs(p, l) * eig[l] * vecs(q, l);
        c(p, q) = c(q, p) = acc;
      }
    Vec inv_sd(k);
    for (std::size_t p = 0; p < k; ++p) inv_sd[p] = 1.0 / std::sqrt(c(p, p));
    for (std::size_t p = 0; p < k; ++p) {
      for (std::size_t q = 0; q < k; ++q) c(p, q) *= inv_sd[p] * inv_sd[q];
      c(p, p) = 1.0;
    }
    symmetrize(c);
  }

  // Signs carry no amplitude, so the composite diagonal is a convention.
  return composite_from_parts(Vec(k, 0.5), c);
}

}  // namespace obr
