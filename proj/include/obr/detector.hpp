// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>

#include "obr/composite.hpp"
#include "obr/linalg.hpp"
#include "obr/radar.hpp"
#include "obr/rng.hpp"

namespace obr {

// Sign patterns tau in {-1,+1}^{2m} are indexed by mapping element l to bit
// (2m-1-l) with bit value (1+tau_l)/2, so the first element is the most
// significant bit. kappa = 2^{2m} patterns total.
std::size_t pattern_count(std::size_t m);
std::uint32_t pattern_index(const std::int8_t* tau, std::size_t len);
void pattern_signs(std::uint32_t idx, std::size_t len, std::int8_t* tau);

// Index of the quarter-turn image [tau_bot; -tau_top] of pattern `idx`.
// Applying it twice flips every sign, four times is the identity, and no
// pattern returns to itself early, so the pattern set splits into orbits of
// exactly four.
std::uint32_t pattern_rotate(std::uint32_t idx, std::size_t m);

// Pattern index of snapshot l of a quantized record: real parts fill the top
// half of tau, imaginary parts the bottom.
std::uint32_t data_pattern(const QuantizedData& q, std::size_t l);

// Per-pattern noise geometry for a coherence matrix c: the orthant
// probability o_j = P(0, G_j c G_j) and the gradient vector
// d_j = G_j dP(mu, G_j c G_j)/dmu at mu = 0, G_j = diag(tau_j).
// Only one pattern per orbit is evaluated; the other three are images under
// the quarter-turn, which also makes downstream symmetry identities hold to
// rounding error instead of quadrature error.
struct NoiseTables {
  std::size_t m = 0;
  Mat c;       // 2m x 2m coherence
  Vec o;       // kappa orthant probabilities
  Mat d;       // kappa x 2m, row j = d_j
  std::vector<std::array<std::uint32_t, 4>> orbits;  // [rep, images...]
  double tol = 0.0;  // orthant tolerance the tables were built with
};

NoiseTables build_noise_tables(const Mat& coherence, double tol, RngStream rng);

// Identity coherence: every orthant probability is 4^-m and gradients
// factorize, so the tables are exact closed forms.
NoiseTables white_noise_tables(std::size_t m);

// Tables cache on disk (JSON). The key folds the coherence bit patterns so
// a cache entry is only reused for the exact same matrix.
std::uint64_t coherence_key(const Mat& c);
void save_noise_tables(const NoiseTables& t, const std::string& path);
NoiseTables load_noise_tables(const std::string& path);

// Everything the statistic needs for a fixed scenario and assumed noise
// covariance. Rows of a_cols/b_cols are the scaled signal directions
//   a_i = D^-1/2 [Re w_i; Im w_i],  b_i = D^-1/2 [-Im w_i; Re w_i],
// delta_l(i, j) = <a_i or b_i, d_j>, and score_l = delta_l(i,j)/(o_j v) so a
// data pass only sums one score row entry per snapshot. v^2 is the Fisher
// scale tr(delta_1^T delta_1 O^-1), which equals the delta_2 form
// structurally; construction cross-checks the two.
struct DetectorTables {
  std::size_t m = 0, n = 0;
  NoiseTables noise;
  Vec d_diag;            // assumed composite diagonal (2m)
  Mat a_cols, b_cols;    // n x 2m
  Mat delta1, delta2;    // n x kappa
  Mat score1, score2;    // n x kappa
  double upsilon_sq = 0.0;
};

// `assumed` supplies both the diagonal scaling and, through its coherence,
// the noise tables; pass prebuilt tables to reuse them across scenarios.
DetectorTables build_detector_tables(const Scenario& sc,
                                     const CompositeCovariance& assumed,
                                     NoiseTables noise);
DetectorTables build_detector_tables(const Scenario& sc, double tol, RngStream rng);

// The white-noise detector: identity coherence, flat diagonal. Scale drops
// out of the statistic, so the diagonal level is cosmetic.
DetectorTables white_detector_tables(const Scenario& sc);

// Score pair (w_1, w_2); the statistic is their squared sum.
std::pair<double, double> score_pair(const DetectorTables& t, const QuantizedData& q);
double rao_statistic(const DetectorTables& t, const QuantizedData& q);

// Threshold for a target false alarm probability under the asymptotic null.
double threshold_for_pfa(double pfa);

}  // namespace obr
