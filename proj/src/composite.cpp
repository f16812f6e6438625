// SPDX-License-Identifier: Apache-2.0
#include "obr/composite.hpp"

#include <algorithm>
#include <cmath>

namespace obr {

CompositeCovariance complex_to_composite(const CMat& sigma_n) {
  if (!sigma_n.square() || sigma_n.rows() == 0)
    throw InvalidArgument("complex_to_composite: need a square nonempty matrix");
  if (hermitian_defect(sigma_n) > 1e-10)
    throw InvalidArgument("complex_to_composite: matrix is not Hermitian");

  const std::size_t m = sigma_n.rows();
  CompositeCovariance out;
  out.sigma = Mat(2 * m, 2 * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double re = 0.5 * sigma_n(i, j).real();
      const double im = 0.5 * sigma_n(i, j).imag();
      out.sigma(i, j) = re;
      out.sigma(i + m, j + m) = re;
      out.sigma(i, j + m) = -im;
      out.sigma(i + m, j) = im;
    }
  symmetrize(out.sigma);

  const Vec eig = jacobi_eigenvalues(out.sigma);
  if (eig.front() < -1e-10 * std::max(1.0, eig.back()))
    throw InvalidArgument("complex_to_composite: matrix is not positive semidefinite");

  out.d.resize(2 * m);
  for (std::size_t i = 0; i < 2 * m; ++i) out.d[i] = out.sigma(i, i);
  out.c = Mat(2 * m, 2 * m);
  for (std::size_t i = 0; i < 2 * m; ++i)
    for (std::size_t j = 0; j < 2 * m; ++j)
      out.c(i, j) = out.sigma(i, j) / std::sqrt(out.d[i] * out.d[j]);
  for (std::size_t i = 0; i < 2 * m; ++i) out.c(i, i) = 1.0;
  return out;
}

CompositeCovariance composite_from_parts(Vec d, Mat c) {
  if (!c.square() || c.rows() != d.size() || d.size() % 2 != 0)
    throw InvalidArgument("composite_from_parts: dimension mismatch");
  CompositeCovariance out;
  out.sigma = Mat(c.rows(), c.cols());
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (std::size_t j = 0; j < c.cols(); ++j)
      out.sigma(i, j) = c(i, j) * std::sqrt(d[i] * d[j]);
  out.d = std::move(d);
  out.c = std::move(c);
  return out;
}

namespace {

// Image of entry (p, q) under the quarter turn: index shifts by m modulo 2m
// and the sign flips once per index crossing the halves.
double rotated_entry(const Mat& a, std::size_t p, std::size_t q, std::size_t m) {
  const std::size_t k = 2 * m;
  const double sp = p < m ? 1.0 : -1.0;
  const double sq = q < m ? 1.0 : -1.0;
  return sp * sq * a((p + m) % k, (q + m) % k);
}

}  // namespace

double quarter_turn_defect(const Mat& a) {
  if (!a.square() || a.rows() % 2 != 0)
    throw InvalidArgument("quarter_turn_defect: need a square matrix of even size");
  const std::size_t m = a.rows() / 2;
  double worst = 0.0;
  for (std::size_t p = 0; p < a.rows(); ++p)
    for (std::size_t q = 0; q < a.cols(); ++q)
      worst = std::max(worst, std::fabs(a(p, q) - rotated_entry(a, p, q, m)));
  return worst;
}

Mat quarter_turn_project(const Mat& a) {
  if (!a.square() || a.rows() % 2 != 0)
    throw InvalidArgument("quarter_turn_project: need a square matrix of even size");
  const std::size_t m = a.rows() / 2;
  Mat out(a.rows(), a.cols());
  for (std::size_t p = 0; p < a.rows(); ++p)
    for (std::size_t q = 0; q < a.cols(); ++q)
      out(p, q) = 0.5 * (a(p, q) + rotated_entry(a, p, q, m));
  return out;
}

Vec composite_mean(const CVec& w_col, cplx beta) {
  const std::size_t m = w_col.size();
  Vec mu(2 * m);
  for (std::size_t i = 0; i < m; ++i) {
    const cplx bw = beta * w_col[i];
    mu[i] = bw.real();
    mu[i + m] = bw.imag();
  }
  return mu;
}

Vec mvn_sample(const Vec& mu, const Mat& sigma, RngStream& rng) {
  if (!sigma.square() || sigma.rows() != mu.size())
    throw InvalidArgument("mvn_sample: dimension mismatch");
  const Mat l = cholesky_jittered(sigma);
  const std::size_t k = mu.size();
  Vec z(k), x = mu;
  rng.fill_normal(z);
  for (std::size_t i = 0; i < k; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j <= i; ++j) s += l(i, j) * z[j];
    x[i] += s;
  }
  return x;
}

}  // namespace obr
