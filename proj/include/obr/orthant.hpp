// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "obr/linalg.hpp"
#include "obr/rng.hpp"

namespace obr {

// Orthant probability P(mu, sigma) = Pr{x > 0 componentwise}, x ~ N(mu, sigma).
//
// Closed forms: k = 0 returns 1; k = 1 is Phi(mu/sd); k = 2 is the arcsine
// formula at zero mean and the bivariate normal CDF otherwise; any exactly
// diagonal sigma factorizes into a product of Phi terms. k >= 3 runs a
// randomized-QMC separation-of-variables evaluator (reordered Cholesky,
// Sobol points with independent digital shifts per replicate).
struct OrthantResult {
  double value = 0.0;
  double err_estimate = 0.0;  // standard error across shift replicates
  std::size_t n_points = 0;   // QMC points consumed (0 for closed forms)
};

struct OrthantOptions {
  double tol = 1e-6;              // absolute; stop when err_estimate <= tol
  std::size_t max_points = 1u << 20;
  std::size_t n_shifts = 8;
  std::size_t first_batch = 128;  // initial points per shift; rounds double
};

OrthantResult orthant_prob(const Vec& mu, const Mat& sigma, double tol,
                           RngStream rng);
OrthantResult orthant_prob(const Vec& mu, const Mat& sigma,
                           const OrthantOptions& opt, RngStream rng);

// d/d mu(j) of P(mu, sigma) evaluated by dimension reduction: the scaled
// orthant probability of the conditional covariance
//   R(sigma, j) = Theta(sigma, j) - r_j r_j^T / sigma(j,j),
// with the j-th coordinate of mu dropped unchanged. The identity is exact at
// mu = 0, which is the only point the detector needs; away from zero it is
// the printed form of the reduction, not a full gradient.
double orthant_grad_mean(const Vec& mu, const Mat& sigma, std::size_t j,
                         double tol, RngStream rng);

// d/d c(r,s) of P(0, c) for a unit-diagonal correlation matrix c:
//   P(0_{k-2}, cbar) / (2 pi sqrt(1 - c(r,s)^2)),
// cbar the inverse of C^{-1} with rows/columns r and s deleted.
// Throws NumericError when |c(r,s)| >= 1 - 1e-10.
double orthant_grad_corr(const Mat& c, std::size_t r, std::size_t s, double tol,
                         RngStream rng);

// All pairwise derivatives in half-vectorized order
// (0,1),(0,2),...,(0,k-1),(1,2),...,(k-2,k-1).
Vec orthant_grad_corr_all(const Mat& c, double tol, RngStream rng);

// Pr{X > h, Y > k} for a standard bivariate normal pair with correlation r.
// Exposed because the two-dimensional closed form is independently testable.
double bvn_upper(double h, double k, double r);

}  // namespace obr
