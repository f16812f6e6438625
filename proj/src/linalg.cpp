// SPDX-License-Identifier: Apache-2.0
#include "obr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace obr {

Mat operator*(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) throw InvalidArgument("Mat*: dimension mismatch");
  Mat c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Vec operator*(const Mat& a, const Vec& x) {
  if (a.cols() != x.size()) throw InvalidArgument("Mat*Vec: dimension mismatch");
  Vec y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    const double* r = a.row(i);
    for (std::size_t j = 0; j < x.size(); ++j) s += r[j] * x[j];
    y[i] = s;
  }
  return y;
}

Mat operator+(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidArgument("Mat+: dimension mismatch");
  Mat c = a;
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (std::size_t j = 0; j < c.cols(); ++j) c(i, j) += b(i, j);
  return c;
}

Mat operator-(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidArgument("Mat-: dimension mismatch");
  Mat c = a;
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (std::size_t j = 0; j < c.cols(); ++j) c(i, j) -= b(i, j);
  return c;
}

Mat transpose(const Mat& a) {
  Mat t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

CMat operator*(const CMat& a, const CMat& b) {
  if (a.cols() != b.rows()) throw InvalidArgument("CMat*: dimension mismatch");
  CMat c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const cplx aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

CMat operator+(const CMat& a, const CMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidArgument("CMat+: dimension mismatch");
  CMat c = a;
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (std::size_t j = 0; j < c.cols(); ++j) c(i, j) += b(i, j);
  return c;
}

CMat adjoint(const CMat& a) {
  CMat t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = std::conj(a(i, j));
  return t;
}

double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw InvalidArgument("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double max_abs_diff(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidArgument("max_abs_diff: dimension mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      m = std::max(m, std::fabs(a(i, j) - b(i, j)));
  return m;
}

double hermitian_defect(const CMat& a) {
  if (!a.square()) throw InvalidArgument("hermitian_defect: matrix not square");
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      m = std::max(m, std::abs(a(i, j) - std::conj(a(j, i))));
  return m;
}

void symmetrize(Mat& a) {
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      const double v = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = a(j, i) = v;
    }
}

bool cholesky(const Mat& a, Mat& lower) {
  if (!a.square()) throw InvalidArgument("cholesky: matrix not square");
  const std::size_t k = a.rows();
  lower = Mat(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a(i, j);
      for (std::size_t l = 0; l < j; ++l) s -= lower(i, l) * lower(j, l);
      if (i == j) {
        if (s <= 0.0) return false;
        lower(i, i) = std::sqrt(s);
      } else {
        lower(i, j) = s / lower(j, j);
      }
    }
  }
  return true;
}

bool cholesky_psd(const Mat& a, Mat& lower, double tiny) {
  if (!a.square()) throw InvalidArgument("cholesky_psd: matrix not square");
  const std::size_t k = a.rows();
  lower = Mat(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a(i, j);
      for (std::size_t l = 0; l < j; ++l) s -= lower(i, l) * lower(j, l);
      if (i == j) {
        if (s < -tiny) return false;
        lower(i, i) = s > tiny ? std::sqrt(s) : 0.0;
      } else {
        lower(i, j) = lower(j, j) > 0.0 ? s / lower(j, j) : 0.0;
      }
    }
  }
  return true;
}

Mat cholesky_jittered(const Mat& a, double jitter_scale) {
  Mat l;
  if (cholesky_psd(a, l, 1e-14)) return l;
  double tr = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) tr += a(i, i);
  const double jitter = jitter_scale * tr / static_cast<double>(a.rows());
  Mat aj = a;
  for (std::size_t i = 0; i < a.rows(); ++i) aj(i, i) += jitter;
  if (cholesky_psd(aj, l, 1e-14)) return l;
  throw NumericError("cholesky_jittered: matrix not positive semidefinite after jitter");
}

Vec jacobi_eigenvalues(const Mat& sym, Mat* vectors) {
  if (!sym.square()) throw InvalidArgument("jacobi_eigenvalues: matrix not square");
  const std::size_t k = sym.rows();
  Mat a = sym;
  Mat v = Mat::identity(k);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t q = p + 1; q < k; ++q) {
        if (std::fabs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < k; ++i) {
          const double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (std::size_t j = 0; j < k; ++j) {
          const double apj = a(p, j), aqj = a(q, j);
          a(p, j) = c * apj - s * aqj;
          a(q, j) = s * apj + c * aqj;
        }
        for (std::size_t i = 0; i < k; ++i) {
          const double vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
  }
  std::vector<std::size_t> order(k);
  for (std::size_t i = 0; i < k; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  Vec eig(k);
  for (std::size_t i = 0; i < k; ++i) eig[i] = a(order[i], order[i]);
  if (vectors) {
    *vectors = Mat(k, k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) (*vectors)(i, j) = v(i, order[j]);
  }
  return eig;
}

Mat inverse_spd(const Mat& a) {
  Mat l;
  if (!cholesky(a, l)) throw NumericError("inverse_spd: matrix not positive definite");
  const std::size_t k = a.rows();
  // Invert L in place, then form L^-T L^-1.
  Mat li(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    li(i, i) = 1.0 / l(i, i);
    for (std::size_t j = 0; j < i; ++j) {
      double s = 0.0;
      for (std::size_t m = j; m < i; ++m) s += l(i, m) * li(m, j);
      li(i, j) = -s / l(i, i);
    }
  }
  Mat inv(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t m = i; m < k; ++m) s += li(m, i) * li(m, j);
      inv(i, j) = inv(j, i) = s;
    }
  return inv;
}

Mat remove_row_col(const Mat& a, std::size_t idx) {
  if (!a.square() || idx >= a.rows())
    throw InvalidArgument("remove_row_col: bad index or non-square matrix");
  Mat r(a.rows() - 1, a.cols() - 1);
  for (std::size_t i = 0, ri = 0; i < a.rows(); ++i) {
    if (i == idx) continue;
    for (std::size_t j = 0, rj = 0; j < a.cols(); ++j) {
      if (j == idx) continue;
      r(ri, rj) = a(i, j);
      ++rj;
    }
    ++ri;
  }
  return r;
}

const GaussLegendre& gauss_legendre(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, GaussLegendre> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  GaussLegendre gl;
  gl.x.resize(n);
  gl.w.resize(n);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    // Chebyshev-based initial guess, then Newton on P_n.
    double x = std::cos(kPi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (std::size_t j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    gl.x[i] = -x;
    gl.x[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    gl.w[i] = w;
    gl.w[n - 1 - i] = w;
  }
  return cache.emplace(n, std::move(gl)).first->second;
}

}  // namespace obr
