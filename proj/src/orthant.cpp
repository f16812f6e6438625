// SPDX-License-Identifier: Apache-2.0
#include "obr/orthant.hpp"

#include <algorithm>
#include <cmath>

#include "obr/kernels.hpp"
#include "obr/normal.hpp"
#include "obr/qmc.hpp"

namespace obr {

namespace {

constexpr double kTwoPi = 2.0 * kPi;

double sheppard(double rho) { return 0.25 + std::asin(rho) / kTwoPi; }

// Expected value of a standard normal truncated to (alpha, inf).
double truncated_mean(double alpha) {
  if (alpha > 8.0) return alpha + 1.0 / alpha;  // asymptotic, avoids 0/0
  const double p = 1.0 - std_normal_cdf(alpha);
  if (p < 1e-300) return std::max(alpha, 0.0);
  return std_normal_pdf(alpha) / p;
}

// Separation-of-variables evaluator for k >= 3. Holds the reordered
// Cholesky factor and scratch buffers; run() drives the RQMC loop.
class GenzEvaluator {
 public:
  GenzEvaluator(Vec lower, Mat corr) : k_(lower.size()), a_(std::move(lower)) {
    reorder_cholesky(std::move(corr));
  }

  OrthantResult run(const OrthantOptions& opt, RngStream& rng) {
    const std::size_t S = std::max<std::size_t>(2, opt.n_shifts);
    std::vector<SobolSequence> seqs;
    seqs.reserve(S);
    for (std::size_t s = 0; s < S; ++s) {
      const std::uint64_t sd = rng.next_u64(), id = rng.next_u64();
      seqs.emplace_back(k_ - 1, RngStream(sd, id));
    }
    std::vector<double> sum(S, 0.0);
    std::size_t per_shift = 0;
    std::size_t round = opt.first_batch;
    OrthantResult res;
    while (true) {
      for (std::size_t s = 0; s < S; ++s)
        sum[s] += accumulate(seqs[s], per_shift, round);
      per_shift += round;
      res.n_points = per_shift * S;

      double mean = 0.0;
      for (std::size_t s = 0; s < S; ++s) mean += sum[s] / static_cast<double>(per_shift);
      mean /= static_cast<double>(S);
      double var = 0.0;
      for (std::size_t s = 0; s < S; ++s) {
        const double d = sum[s] / static_cast<double>(per_shift) - mean;
        var += d * d;
      }
      res.value = std::clamp(mean, 0.0, 1.0);
      res.err_estimate = std::sqrt(var / (static_cast<double>(S) * (static_cast<double>(S) - 1.0)));
      if (res.err_estimate <= opt.tol || res.n_points >= opt.max_points) break;
      round = std::min(per_shift, (opt.max_points - res.n_points) / S + 1);
    }
    return res;
  }

 private:
  // Gibson-Glasbey-Elston ordering: at each step pick the remaining variable
  // with the smallest conditional probability of satisfying its limit, using
  // truncated means as stand-ins for the integration variables.
  void reorder_cholesky(Mat c) {
    l_ = Mat(k_, k_);
    Vec y(k_, 0.0);
    for (std::size_t t = 0; t < k_; ++t) {
      std::size_t best = t;
      double best_alpha = 0.0, best_v = 0.0;
      bool first = true;
      for (std::size_t j = t; j < k_; ++j) {
        double s = 0.0, v = c(j, j);
        for (std::size_t l = 0; l < t; ++l) {
          s += l_(j, l) * y[l];
          v -= l_(j, l) * l_(j, l);
        }
        if (v < -1e-8 * static_cast<double>(k_))
          throw NumericError("orthant_prob: covariance not PSD beyond jitter");
        v = std::max(v, 0.0);
        const double denom = std::sqrt(std::max(v, 1e-300));
        const double alpha = (a_[j] - s) / denom;
        // Largest standardized limit == smallest conditional success mass.
        if (first || alpha > best_alpha) {
          first = false;
          best = j;
          best_alpha = alpha;
          best_v = v;
        }
      }
      if (best != t) {
        std::swap(a_[t], a_[best]);
        for (std::size_t l = 0; l < k_; ++l) std::swap(l_(t, l), l_(best, l));
        for (std::size_t l = 0; l < k_; ++l) std::swap(c(t, l), c(best, l));
        for (std::size_t l = 0; l < k_; ++l) std::swap(c(l, t), c(l, best));
      }
      const double ltt = std::sqrt(std::max(best_v, 0.0));
      l_(t, t) = ltt;
      for (std::size_t i = t + 1; i < k_; ++i) {
        double s = c(i, t);
        for (std::size_t l = 0; l < t; ++l) s -= l_(i, l) * l_(t, l);
        l_(i, t) = ltt > 0.0 ? s / ltt : 0.0;
      }
      y[t] = truncated_mean(best_alpha);
    }
    // Standardized first limit never changes across points.
    d0_ = std_normal_cdf(a_[0] / std::max(l_(0, 0), 1e-150));
  }

  // Adds `count` points starting at sequence position `start`; returns the
  // sum of integrand values.
  double accumulate(const SobolSequence& seq, std::size_t start, std::size_t count) {
    constexpr std::size_t kBlock = 1024;
    const auto& kb = kernels::active_batch();
    const std::size_t du = k_ - 1;
    u_.resize(kBlock * du);
    y_.resize((k_ > 1 ? k_ - 1 : 0) * kBlock);
    f_.resize(kBlock);
    arg_.resize(kBlock);
    prob_.resize(kBlock);

    double total = 0.0;
    std::size_t done = 0;
    while (done < count) {
      const std::size_t b = std::min(kBlock, count - done);
      seq.generate(start + done, b, u_.data());

      for (std::size_t i = 0; i < b; ++i) {
        f_[i] = 1.0 - d0_;
        arg_[i] = d0_ + u_[i * du] * (1.0 - d0_);
      }
      kb.norm_icdf(arg_.data(), y_.data(), b);

      for (std::size_t t = 1; t < k_; ++t) {
        const double inv_ltt = 1.0 / std::max(l_(t, t), 1e-150);
        const double at = a_[t];
        for (std::size_t i = 0; i < b; ++i) {
          double s = 0.0;
          for (std::size_t l = 0; l < t; ++l) s += l_(t, l) * y_[l * kBlock + i];
          // Phi is exactly 0 or 1 in double beyond |x| ~ 38.5; the clamp also
          // keeps degenerate rows (guarded tiny diagonal) finite.
          arg_[i] = std::clamp((at - s) * inv_ltt, -40.0, 40.0);
        }
        kb.norm_cdf(arg_.data(), prob_.data(), b);
        if (t < k_ - 1) {
          for (std::size_t i = 0; i < b; ++i) {
            const double dt = prob_[i];
            f_[i] *= 1.0 - dt;
            arg_[i] = dt + u_[i * du + t] * (1.0 - dt);
          }
          kb.norm_icdf(arg_.data(), y_.data() + t * kBlock, b);
        } else {
          for (std::size_t i = 0; i < b; ++i) f_[i] *= 1.0 - prob_[i];
        }
      }
      for (std::size_t i = 0; i < b; ++i) total += f_[i];
      done += b;
    }
    return total;
  }

  std::size_t k_;
  Vec a_;
  Mat l_;
  double d0_ = 0.0;
  std::vector<double> u_, y_, f_, arg_, prob_;
};

Mat correlation_from(const Mat& sigma, const Vec& sd) {
  const std::size_t k = sigma.rows();
  Mat c(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      double v = sigma(i, j) / (sd[i] * sd[j]);
      if (std::fabs(v) > 1.0 + 1e-8)
        throw InvalidArgument("orthant_prob: sigma is not a covariance matrix");
      c(i, j) = std::clamp(v, -1.0, 1.0);
    }
    c(i, i) = 1.0;
  }
  return c;
}

}  // namespace

double bvn_upper(double h, double k, double r) {
  const auto phid = [](double x) { return std_normal_cdf(x); };
  if (r == 0.0) return phid(-h) * phid(-k);
  if (r >= 1.0) return phid(-std::max(h, k));
  if (r <= -1.0) return std::max(0.0, phid(-h) - phid(k));

  double hk = h * k;
  double bvn = 0.0;
  const std::size_t ng = std::fabs(r) < 0.3 ? 6 : (std::fabs(r) < 0.75 ? 12 : 20);
  const GaussLegendre& gl = gauss_legendre(ng);

  if (std::fabs(r) < 0.925) {
    const double hs = (h * h + k * k) / 2.0;
    const double asr = std::asin(r) / 2.0;
    for (std::size_t i = 0; i < ng; ++i) {
      const double sn = std::sin(asr * (1.0 + gl.x[i]));
      bvn += gl.w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
    }
    return std::clamp(bvn * asr / kTwoPi + phid(-h) * phid(-k), 0.0, 1.0);
  }

  // |r| >= 0.925: Genz's expansion about |r| = 1 plus a correction integral.
  double kk = k;
  if (r < 0.0) {
    kk = -k;
    hk = -hk;
  }
  const double as = (1.0 - r) * (1.0 + r);
  double a = std::sqrt(as);
  const double bs = (h - kk) * (h - kk);
  const double c = (4.0 - hk) / 8.0;
  const double d = (12.0 - hk) / 16.0;
  double asr = -(bs / as + hk) / 2.0;
  if (asr > -100.0)
    bvn = a * std::exp(asr) *
          (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
  if (-hk < 100.0) {
    const double b = std::sqrt(bs);
    const double sp = std::sqrt(kTwoPi) * phid(-b / a);
    bvn -= std::exp(-hk / 2.0) * sp * b * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
  }
  a /= 2.0;
  for (std::size_t i = 0; i < ng; ++i) {
    const double xi = a * (gl.x[i] + 1.0);
    const double xs = xi * xi;
    const double rs = std::sqrt(1.0 - xs);
    asr = -(bs / xs + hk) / 2.0;
    if (asr > -100.0) {
      const double sp = 1.0 + c * xs * (1.0 + d * xs);
      const double ep = std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs;
      bvn += a * gl.w[i] * std::exp(asr) * (ep - sp);
    }
  }
  bvn = -bvn / kTwoPi;
  if (r > 0.0)
    bvn += phid(-std::max(h, kk));
  else {
    bvn = -bvn;
    if (kk > h) bvn += phid(kk) - phid(h);
  }
  return std::clamp(bvn, 0.0, 1.0);
}

OrthantResult orthant_prob(const Vec& mu, const Mat& sigma, double tol,
                           RngStream rng) {
  OrthantOptions opt;
  opt.tol = tol;
  return orthant_prob(mu, sigma, opt, rng);
}

OrthantResult orthant_prob(const Vec& mu, const Mat& sigma,
                           const OrthantOptions& opt, RngStream rng) {
  const std::size_t k = mu.size();
  if (!sigma.square() || sigma.rows() != k)
    throw InvalidArgument("orthant_prob: dimension mismatch");
  if (k == 0) return {1.0, 0.0, 0};

  Vec sd(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (!(sigma(i, i) > 0.0))
      throw InvalidArgument("orthant_prob: sigma has a non-positive diagonal entry");
    sd[i] = std::sqrt(sigma(i, i));
  }
  Vec nu(k);
  for (std::size_t i = 0; i < k; ++i) nu[i] = mu[i] / sd[i];

  if (k == 1) return {std_normal_cdf(nu[0]), 0.0, 0};

  bool diagonal = true;
  for (std::size_t i = 0; i < k && diagonal; ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (i != j && sigma(i, j) != 0.0) {
        diagonal = false;
        break;
      }
  if (diagonal) {
    double p = 1.0;
    for (std::size_t i = 0; i < k; ++i) p *= std_normal_cdf(nu[i]);
    return {p, 0.0, 0};
  }

  const Mat c = correlation_from(sigma, sd);
  if (k == 2) {
    const bool zero_mean = mu[0] == 0.0 && mu[1] == 0.0;
    const double v = zero_mean ? sheppard(c(0, 1)) : bvn_upper(-nu[0], -nu[1], c(0, 1));
    return {v, 5e-16, 0};
  }

  Vec lower(k);
  for (std::size_t i = 0; i < k; ++i) lower[i] = -nu[i];
  GenzEvaluator ev(std::move(lower), c);
  return ev.run(opt, rng);
}

double orthant_grad_mean(const Vec& mu, const Mat& sigma, std::size_t j,
                         double tol, RngStream rng) {
  const std::size_t k = mu.size();
  if (!sigma.square() || sigma.rows() != k || j >= k)
    throw InvalidArgument("orthant_grad_mean: bad dimensions or index");
  const double sjj = sigma(j, j);
  if (!(sjj > 0.0))
    throw InvalidArgument("orthant_grad_mean: sigma(j,j) must be positive");

  Mat r = remove_row_col(sigma, j);
  Vec rj(k - 1);
  for (std::size_t i = 0, t = 0; i < k; ++i)
    if (i != j) rj[t++] = sigma(i, j);
  for (std::size_t p = 0; p < k - 1; ++p)
    for (std::size_t q = 0; q < k - 1; ++q) r(p, q) -= rj[p] * rj[q] / sjj;
  symmetrize(r);

  // conditioning x_j on 0 shifts the remaining means by -sigma(i,j) mu_j / sjj
  Vec omega(k - 1);
  for (std::size_t i = 0, t = 0; i < k; ++i)
    if (i != j) omega[t++] = mu[i] - sigma(i, j) * mu[j] / sjj;

  const double scale =
      std::exp(-0.5 * mu[j] * mu[j] / sjj) / std::sqrt(kTwoPi * sjj);
  if (k == 1) return scale;
  return scale * orthant_prob(omega, r, tol, rng).value;
}

double orthant_grad_corr(const Mat& c, std::size_t r, std::size_t s, double tol,
                         RngStream rng) {
  const std::size_t k = c.rows();
  if (!c.square() || r >= k || s >= k || r == s)
    throw InvalidArgument("orthant_grad_corr: bad indices");
  for (std::size_t i = 0; i < k; ++i)
    if (std::fabs(c(i, i) - 1.0) > 1e-12)
      throw InvalidArgument("orthant_grad_corr: matrix must have a unit diagonal");
  if (r > s) std::swap(r, s);
  const double crs = c(r, s);
  if (std::fabs(crs) >= 1.0 - 1e-10)
    throw NumericError("orthant_grad_corr: |c(r,s)| too close to 1");

  const double scale = 1.0 / (kTwoPi * std::sqrt(1.0 - crs * crs));
  if (k == 2) return scale;

  const Mat cinv = inverse_spd(c);
  Mat reduced = remove_row_col(remove_row_col(cinv, r), s - 1);
  Mat cbar = inverse_spd(reduced);
  symmetrize(cbar);
  const Vec zero(k - 2, 0.0);
  return scale * orthant_prob(zero, cbar, tol, rng).value;
}

Vec orthant_grad_corr_all(const Mat& c, double tol, RngStream rng) {
  const std::size_t k = c.rows();
  if (!c.square() || k < 2) throw InvalidArgument("orthant_grad_corr_all: need k >= 2");
  Vec out;
  out.reserve(k * (k - 1) / 2);
  for (std::size_t r = 0; r + 1 < k; ++r)
    for (std::size_t s = r + 1; s < k; ++s) {
      RngStream sub(rng.next_u64(), rng.next_u64());
      out.push_back(orthant_grad_corr(c, r, s, tol, sub));
    }
  return out;
}

}  // namespace obr
