// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

#include "obr/detector.hpp"

namespace obr {

// Null-distribution correction when the data's noise covariance differs from
// the one the tables assume. g_j = o'_j / o_j^2 reweights the Fisher scale to
//   upsilon1_sq = tr(delta_1^T delta_1 G) (= the delta_2 form structurally),
// and varsigma_l_sq = tr(delta_l^T delta'_l O^-1) carries the first-order
// effect on the signal response, with the primed quantities built from the
// true covariance.
struct MismatchAnalysis {
  Vec o_prime;          // per-pattern orthant probabilities under the truth
  Vec g;                // o'_j / o_j^2
  double upsilon_sq = 0.0;
  double upsilon1_sq = 0.0;
  double varsigma1_sq = 0.0;
  double varsigma2_sq = 0.0;
};

MismatchAnalysis analyze_mismatch(const DetectorTables& t,
                                  const CompositeCovariance& truth, double tol,
                                  RngStream rng);

// Scaled-exponential null tail and the threshold restoring a target false
// alarm rate under mismatch.
double pfa_mismatched(double gamma, double upsilon_sq, double upsilon1_sq);
double threshold_mismatched(double pfa, double upsilon_sq, double upsilon1_sq);

// False alarm probability averaged over a prior on the true covariance,
// approximated from K prior draws. `direct` evaluates the per-draw pattern
// probabilities by quadrature; `taylor` replaces them with a first-order
// expansion in the correlation entries around the assumed coherence, which
// needs the (closed-form friendly) correlation gradients only once.
enum class AvgPfaMode { direct, taylor };
using PriorSampler = std::function<CMat(RngStream&)>;

Vec avg_pfa(const Vec& gammas, const DetectorTables& t, const PriorSampler& prior,
            std::size_t n_draws, AvgPfaMode mode, double tol, RngStream rng);

// CDF of sum_l lambda_l chi^2_1(delta2_l) at x, two components, evaluated by
// numerical inversion of the characteristic function. Oscillation-aware
// panel quadrature plus an analytic first-order tail correction; absolute
// accuracy around 1e-8 in the regimes the detector meets.
double imhof_cdf(const double lambda[2], const double delta2[2], double x);

// Tail of the noncentral chi-square with 2 degrees of freedom,
// Pr{chi^2_2(delta2) > x}, by the Poisson mixture series.
double noncentral_chi2_2_tail(double delta2, double x);

// Signal-response moments of the score pair under a target with amplitude
// `beta`. With `truth` null the data follows the assumed covariance;
// otherwise the primed pattern probabilities are used. The statistic is
// lambda_1 chi^2_1(m2_1) + lambda_2 chi^2_1(m2_2).
struct NonNullMoments {
  Vec u_w;      // length 2
  Mat sigma_w;  // 2 x 2
  Vec lambda;   // eigenvalues, ascending
  Vec m2;       // squared standardized means per component
};

NonNullMoments non_null_moments(const DetectorTables& t, cplx beta,
                                const CompositeCovariance* truth, double tol,
                                RngStream rng);

// Detection probabilities: the near-exact route through the moments above
// and the low-SNR noncentral chi-square approximations.
double pd_exact(double gamma, const NonNullMoments& mom);
double pd_low_snr(double gamma, const DetectorTables& t, cplx beta);
double pd_low_snr_mismatched(double gamma, const MismatchAnalysis& mm, cplx beta);

// One-bit noise covariance estimation from sign-only training snapshots:
// inverse arcsine law on the sign correlation, eigenvalue floor, unit
// diagonal restored. The flat composite diagonal reflects that amplitude is
// not identifiable from signs.
CompositeCovariance estimate_composite_one_bit(const QuantizedData& noise_only);

}  // namespace obr
