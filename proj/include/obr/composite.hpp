// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "obr/linalg.hpp"
#include "obr/rng.hpp"

namespace obr {

// Real embedding of a complex circular Gaussian: a length-m complex vector
// becomes the length-2m stack [real; imag], whose covariance is
//   sigma = 1/2 [ Re(S)  -Im(S) ; Im(S)  Re(S) ]
// for a complex covariance S. `d` is diag(sigma) and `c` the unit-diagonal
// coherence D^{-1/2} sigma D^{-1/2}.
struct CompositeCovariance {
  Mat sigma;  // 2m x 2m
  Vec d;      // diagonal of sigma
  Mat c;      // coherence matrix
  std::size_t half() const { return d.size() / 2; }
};

// Validates Hermitian symmetry (defect <= 1e-10) and positive
// semidefiniteness (eigenvalues >= -1e-10 * max eigenvalue), then embeds.
// Throws InvalidArgument when the input fails either check.
CompositeCovariance complex_to_composite(const CMat& sigma_n);

// Assemble a composite covariance from a diagonal and a coherence matrix
// (used by the one-bit covariance estimator and the white-noise tables).
CompositeCovariance composite_from_parts(Vec d, Mat c);

// Mean of the embedded snapshot for signal column w and amplitude beta:
// [Re(beta w); Im(beta w)].
Vec composite_mean(const CVec& w_col, cplx beta);

// Covariances of embedded circular vectors commute with the quarter turn
// (re, im) -> (im, -re). quarter_turn_defect measures how far a 2m x 2m
// matrix is from that invariance; quarter_turn_project averages the matrix
// with its rotated image, which restores the invariance exactly and is a
// no-op on matrices that already have it.
double quarter_turn_defect(const Mat& a);
Mat quarter_turn_project(const Mat& a);

// Gaussian sample mu + L z with L from a PSD-tolerant Cholesky; one jitter
// retry of 1e-12 * trace/k on the diagonal before giving up. An all-zero
// sigma returns mu exactly.
Vec mvn_sample(const Vec& mu, const Mat& sigma, RngStream& rng);

}  // namespace obr
