// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "obr/composite.hpp"
#include "obr/linalg.hpp"
#include "obr/rng.hpp"

namespace obr {

// Colocated MIMO setup: half-wavelength ULAs on both ends, an orthogonal
// LFM burst steered at `theta`, and colored noise alpha H H^H + I with H
// drawn once per scenario. `w` collects the per-snapshot signal columns
// a_r (a_t^T s_l), so a data snapshot is x_l = beta w_l + n_l.
struct Scenario {
  std::size_t m = 0;  // receive elements
  std::size_t p = 0;  // transmit elements
  std::size_t n = 0;  // snapshots
  double phi = 0.0;   // target direction
  double theta = 0.0; // transmit steering direction
  double alpha = 0.0; // noise coloring strength (0 when sigma_n was supplied)
  CVec a_r, a_t;
  CMat s;                  // p x n waveform
  CMat w;                  // m x n signal columns
  CMat sigma_n;            // m x m noise covariance
  CompositeCovariance comp;  // real embedding of sigma_n
};

// Steering vector of a half-wavelength ULA: element k is
// exp(i pi k sin(angle)), k = 0..count-1.
CVec ula_steering(std::size_t count, double angle);

// Orthogonal LFM burst steered at `theta`, unit total power per snapshot:
// s(k,l) = exp{(i/n)[2 pi l + pi l^2 + k sin(theta)]} / sqrt(p)
// with k = 0..p-1, l = 0..n-1.
CMat lfm_waveform(std::size_t p, std::size_t n, double theta);

// alpha H H^H + I with H i.i.d. standard complex Gaussian. Hermitian by
// construction and positive definite for alpha >= 0.
CMat random_noise_cov(std::size_t m, double alpha, RngStream& rng);

// Hermitian perturbation of the off-diagonal entries only: real and
// imaginary parts of each upper-triangular entry get independent N(0, rho^2)
// increments, the diagonal stays put. Draws are rejected until the result is
// positive definite; throws NumericError after 100 rejections.
CMat perturb_cov(const CMat& sigma_n, double rho, RngStream& rng);

Scenario make_scenario(std::size_t m, std::size_t p, std::size_t n, double phi,
                       double theta, const CMat& sigma_n);
Scenario make_scenario(std::size_t m, std::size_t p, std::size_t n, double phi,
                       double theta, double alpha, RngStream& rng);

// SNR convention 10 log10(p |beta|^2 / tr(sigma_n)) and its inverse (the
// returned amplitude is real nonnegative).
double snr_db(const CMat& sigma_n, std::size_t p, cplx beta);
double beta_for_snr(const CMat& sigma_n, std::size_t p, double snr_db);

// Sign-quantized observations, snapshot-major: entry (i, l) of either part
// sits at l*m + i and holds -1 or +1. Zero quantizes to +1.
struct QuantizedData {
  std::size_t m = 0, n = 0;
  std::vector<std::int8_t> re, im;
};

// One coherent processing interval through the one-bit front end.
QuantizedData simulate_quantized(const Scenario& sc, cplx beta, RngStream& rng);

}  // namespace obr
