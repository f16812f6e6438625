// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "obr/common.hpp"

namespace obr {

using Vec = std::vector<double>;
using CVec = std::vector<cplx>;

// Dense row-major real matrix. Everything in this project is at most
// (2m x 2m) with m <= 6, so no effort is spent on blocking or views.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

  static Mat identity(std::size_t k) {
    Mat m(k, k);
    for (std::size_t i = 0; i < k; ++i) m(i, i) = 1.0;
    return m;
  }

  double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }
  double* data() { return a_.data(); }
  const double* data() const { return a_.data(); }

  const double* row(std::size_t i) const { return a_.data() + i * cols_; }
  double* row(std::size_t i) { return a_.data() + i * cols_; }

  bool operator==(const Mat& o) const = default;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> a_;
};

// Same layout for complex entries; std::complex<double> keeps the (re, im)
// pair explicit in memory.
class CMat {
 public:
  CMat() = default;
  CMat(std::size_t rows, std::size_t cols, cplx fill = {})
      : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

  static CMat identity(std::size_t k) {
    CMat m(k, k);
    for (std::size_t i = 0; i < k; ++i) m(i, i) = 1.0;
    return m;
  }

  cplx& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  cplx operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }
  cplx* data() { return a_.data(); }
  const cplx* data() const { return a_.data(); }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<cplx> a_;
};

Mat operator*(const Mat& a, const Mat& b);
Vec operator*(const Mat& a, const Vec& x);
Mat operator+(const Mat& a, const Mat& b);
Mat operator-(const Mat& a, const Mat& b);
Mat transpose(const Mat& a);
CMat operator*(const CMat& a, const CMat& b);
CMat operator+(const CMat& a, const CMat& b);
CMat adjoint(const CMat& a);

double dot(const Vec& a, const Vec& b);
double max_abs_diff(const Mat& a, const Mat& b);

// Largest |A - A^H| entry; 0 for an exactly Hermitian matrix.
double hermitian_defect(const CMat& a);

// In-place symmetrization helper used before factorizing matrices assembled
// from rounded pieces.
void symmetrize(Mat& a);

// Plain Cholesky, lower triangular. Returns false if a pivot is not strictly
// positive. `a` must be symmetric.
bool cholesky(const Mat& a, Mat& lower);

// PSD-tolerant variant: pivots below `tiny` produce a zero column instead of
// failing, which is the correct factor for exactly semidefinite inputs.
bool cholesky_psd(const Mat& a, Mat& lower, double tiny = 1e-300);

// Cholesky with one jitter retry (scale * trace/k added to the diagonal).
// Throws NumericError if the matrix stays indefinite.
Mat cholesky_jittered(const Mat& a, double jitter_scale = 1e-12);

// Cyclic Jacobi for symmetric matrices. Returns eigenvalues ascending;
// optionally fills `vectors` with the corresponding columns.
Vec jacobi_eigenvalues(const Mat& sym, Mat* vectors = nullptr);

// Inverse of a symmetric positive definite matrix via Cholesky.
Mat inverse_spd(const Mat& a);

// The matrix with row/column `idx` removed.
Mat remove_row_col(const Mat& a, std::size_t idx);

// Gauss-Legendre nodes/weights on [-1, 1], generated by Newton iteration on
// the three-term recurrence. Cached internally per n.
struct GaussLegendre {
  Vec x, w;
};
const GaussLegendre& gauss_legendre(std::size_t n);

}  // namespace obr
