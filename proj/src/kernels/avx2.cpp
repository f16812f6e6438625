// SPDX-License-Identifier: Apache-2.0
//
// AVX2 + FMA variants of the batched kernels. Compiled with -mavx2 -mfma in
// its own translation unit; only reached after runtime CPU detection.
//
// norm_cdf uses Cody's rational erfc expansion (the three-region CALERF
// scheme, with the split-argument exp(-y^2) trick that keeps relative error
// flat across the tail). norm_icdf is Acklam's rational initial guess plus
// one Halley step against the vector CDF, matching the scalar reference to
// a couple of ulps.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cstddef>

#include "obr/kernels.hpp"

namespace obr::kernels {

namespace {

inline __m256d splat(double v) { return _mm256_set1_pd(v); }

// exp(x) for x in [-708, 709]; lanes with x < -708 return exactly 0.
inline __m256d exp_pd(__m256d x) {
  const __m256d underflow = _mm256_cmp_pd(x, splat(-708.0), _CMP_LT_OQ);
  x = _mm256_max_pd(x, splat(-708.0));
  x = _mm256_min_pd(x, splat(709.0));

  const __m256d log2e = splat(1.4426950408889634073599246810019);
  __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                              _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  // Cody-Waite argument reduction.
  __m256d r = _mm256_fnmadd_pd(n, splat(6.93145751953125e-1), x);
  r = _mm256_fnmadd_pd(n, splat(1.42860682030941723212e-6), r);

  const __m256d z = _mm256_mul_pd(r, r);
  __m256d p = splat(1.26177193074810590878e-4);
  p = _mm256_fmadd_pd(p, z, splat(3.02994407707441961300e-2));
  p = _mm256_fmadd_pd(p, z, splat(9.99999999999999999910e-1));
  const __m256d px = _mm256_mul_pd(r, p);
  __m256d q = splat(3.00198505138664455042e-6);
  q = _mm256_fmadd_pd(q, z, splat(2.52448340349684104192e-3));
  q = _mm256_fmadd_pd(q, z, splat(2.27265548208155028766e-1));
  q = _mm256_fmadd_pd(q, z, splat(2.00000000000000000005e0));
  __m256d e = _mm256_div_pd(px, _mm256_sub_pd(q, px));
  e = _mm256_fmadd_pd(splat(2.0), e, splat(1.0));

  // Scale by 2^n through the exponent field; |n| <= 1024 here.
  const __m128i n32 = _mm256_cvtpd_epi32(n);
  const __m256i n64 = _mm256_cvtepi32_epi64(n32);
  const __m256i pow2 =
      _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
  e = _mm256_mul_pd(e, _mm256_castsi256_pd(pow2));
  return _mm256_andnot_pd(underflow, e);
}

// log(x) for normal (non-subnormal) positive x.
inline __m256d log_pd(__m256d x) {
  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i expo_bits = _mm256_srli_epi64(bits, 52);
  // Unbiased exponent as double, via int32 gymnastics (values are small).
  const __m256i expo64 =
      _mm256_sub_epi64(_mm256_and_si256(expo_bits, _mm256_set1_epi64x(0x7FF)),
                       _mm256_set1_epi64x(1023));
  alignas(32) long long ebuf[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(ebuf), expo64);
  __m256d e = _mm256_set_pd(static_cast<double>(ebuf[3]), static_cast<double>(ebuf[2]),
                            static_cast<double>(ebuf[1]), static_cast<double>(ebuf[0]));

  const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
  const __m256i one_bits = _mm256_set1_epi64x(0x3FF0000000000000LL);
  __m256d m = _mm256_castsi256_pd(
      _mm256_or_si256(_mm256_and_si256(bits, mant_mask), one_bits));

  // Keep m in [sqrt(1/2), sqrt(2)) so z = m-1 stays small.
  const __m256d sqrt2 = splat(1.4142135623730951);
  const __m256d above = _mm256_cmp_pd(m, sqrt2, _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, splat(0.5)), above);
  e = _mm256_add_pd(e, _mm256_and_pd(above, splat(1.0)));

  const __m256d z = _mm256_sub_pd(m, splat(1.0));
  __m256d p = splat(1.01875663804580931796e-4);
  p = _mm256_fmadd_pd(p, z, splat(4.97494994976747001425e-1));
  p = _mm256_fmadd_pd(p, z, splat(4.70579119878881725854e0));
  p = _mm256_fmadd_pd(p, z, splat(1.44989225341610930846e1));
  p = _mm256_fmadd_pd(p, z, splat(1.79368678507819816313e1));
  p = _mm256_fmadd_pd(p, z, splat(7.70838733755885391666e0));
  __m256d q = splat(1.0);
  q = _mm256_fmadd_pd(q, z, splat(1.12873587189167450590e1));
  q = _mm256_fmadd_pd(q, z, splat(4.52279145837532221105e1));
  q = _mm256_fmadd_pd(q, z, splat(8.29875266912776603211e1));
  q = _mm256_fmadd_pd(q, z, splat(7.11544750618563894466e1));
  q = _mm256_fmadd_pd(q, z, splat(2.31251620126765340583e1));

  const __m256d z2 = _mm256_mul_pd(z, z);
  const __m256d z3 = _mm256_mul_pd(z2, z);
  __m256d y = _mm256_mul_pd(z3, _mm256_div_pd(p, q));
  y = _mm256_fmadd_pd(e, splat(-2.121944400546905827679e-4), y);
  y = _mm256_fnmadd_pd(splat(0.5), z2, y);
  y = _mm256_add_pd(z, y);
  return _mm256_fmadd_pd(e, splat(0.693359375), y);
}

// Cody's CALERF, regions 1..3, for y = |z|. Returns erfc(y).
inline __m256d erfc_nonneg(__m256d y) {
  const __m256d ysq = _mm256_mul_pd(y, y);

  // Region 1: |z| <= 0.46875, erfc = 1 - y*R1(y^2).
  const double a[5] = {3.16112374387056560e0, 1.13864154151050156e2,
                       3.77485237685302021e2, 3.20937758913846947e3,
                       1.85777706184603153e-1};
  const double b[4] = {2.36012909523441209e1, 2.44024637934444173e2,
                       1.28261652607737228e3, 2.84423683343917062e3};
  __m256d xnum = _mm256_mul_pd(splat(a[4]), ysq);
  __m256d xden = ysq;
  for (int i = 0; i < 3; ++i) {
    xnum = _mm256_mul_pd(_mm256_add_pd(xnum, splat(a[i])), ysq);
    xden = _mm256_mul_pd(_mm256_add_pd(xden, splat(b[i])), ysq);
  }
  const __m256d erf1 = _mm256_div_pd(
      _mm256_mul_pd(y, _mm256_add_pd(xnum, splat(a[3]))),
      _mm256_add_pd(xden, splat(b[3])));
  const __m256d r1 = _mm256_sub_pd(splat(1.0), erf1);

  // Shared split-argument exponential for regions 2 and 3:
  // exp(-y^2) = exp(-ysq16^2) * exp(-del), ysq16 = trunc(16 y)/16.
  const __m256d ysq16 = _mm256_mul_pd(
      _mm256_round_pd(_mm256_mul_pd(y, splat(16.0)),
                      _MM_FROUND_TO_ZERO | _MM_FROUND_NO_EXC),
      splat(0.0625));
  const __m256d del =
      _mm256_mul_pd(_mm256_sub_pd(y, ysq16), _mm256_add_pd(y, ysq16));
  const __m256d expfac =
      _mm256_mul_pd(exp_pd(_mm256_mul_pd(_mm256_mul_pd(ysq16, ysq16), splat(-1.0))),
                    exp_pd(_mm256_mul_pd(del, splat(-1.0))));

  // Region 2: 0.46875 < y <= 4.
  const double c[9] = {5.64188496988670089e-1, 8.88314979438837594e0,
                       6.61191906371416295e1,  2.98635138197400131e2,
                       8.81952221241769090e2,  1.71204761263407058e3,
                       2.05107837782607147e3,  1.23033935479799725e3,
                       2.15311535474403846e-8};
  const double d[8] = {1.57449261107098347e1, 1.17693950891312499e2,
                       5.37181101862009858e2, 1.62138957456669019e3,
                       3.29079923573345963e3, 4.36261909014324716e3,
                       3.43936767414372164e3, 1.23033935480374942e3};
  xnum = _mm256_mul_pd(splat(c[8]), y);
  xden = y;
  for (int i = 0; i < 7; ++i) {
    xnum = _mm256_mul_pd(_mm256_add_pd(xnum, splat(c[i])), y);
    xden = _mm256_mul_pd(_mm256_add_pd(xden, splat(d[i])), y);
  }
  const __m256d r2 = _mm256_mul_pd(
      expfac, _mm256_div_pd(_mm256_add_pd(xnum, splat(c[7])),
                            _mm256_add_pd(xden, splat(d[7]))));

  // Region 3: y > 4.
  const double p[6] = {3.05326634961232344e-1, 3.60344899949804439e-1,
                       1.25781726111229246e-1, 1.60837851487422766e-2,
                       6.58749161529837803e-4, 1.63153871373020978e-2};
  const double q[5] = {2.56852019228982242e0, 1.87295284992346047e0,
                       5.27905102951428412e-1, 6.05183413124413191e-2,
                       2.33520497626869185e-3};
  const __m256d safe_y = _mm256_max_pd(y, splat(0.5));  // avoid 0/0 in unused lanes
  const __m256d w = _mm256_div_pd(splat(1.0), _mm256_mul_pd(safe_y, safe_y));
  xnum = _mm256_mul_pd(splat(p[5]), w);
  xden = w;
  for (int i = 0; i < 4; ++i) {
    xnum = _mm256_mul_pd(_mm256_add_pd(xnum, splat(p[i])), w);
    xden = _mm256_mul_pd(_mm256_add_pd(xden, splat(q[i])), w);
  }
  __m256d r3 = _mm256_mul_pd(w, _mm256_div_pd(_mm256_add_pd(xnum, splat(p[4])),
                                              _mm256_add_pd(xden, splat(q[4]))));
  r3 = _mm256_div_pd(_mm256_sub_pd(splat(5.6418958354775628695e-1), r3), safe_y);
  r3 = _mm256_mul_pd(expfac, r3);

  const __m256d in1 = _mm256_cmp_pd(y, splat(0.46875), _CMP_LE_OQ);
  const __m256d in2 = _mm256_cmp_pd(y, splat(4.0), _CMP_LE_OQ);
  return _mm256_blendv_pd(_mm256_blendv_pd(r3, r2, in2), r1, in1);
}

inline __m256d erfc_pd(__m256d z) {
  const __m256d neg = _mm256_cmp_pd(z, _mm256_setzero_pd(), _CMP_LT_OQ);
  const __m256d y = _mm256_andnot_pd(splat(-0.0), z);  // |z|
  const __m256d e = erfc_nonneg(y);
  return _mm256_blendv_pd(e, _mm256_sub_pd(splat(2.0), e), neg);
}

inline __m256d norm_cdf_pd(__m256d x) {
  const __m256d z = _mm256_mul_pd(x, splat(-0.7071067811865475244));
  return _mm256_mul_pd(splat(0.5), erfc_pd(z));
}

inline __m256d norm_icdf_pd(__m256d p) {
  p = _mm256_max_pd(p, splat(1e-300));
  p = _mm256_min_pd(p, splat(1.0 - 1.1e-16));

  // Central region |p - 1/2| <= 0.425.
  const __m256d qc = _mm256_sub_pd(p, splat(0.5));
  const __m256d r = _mm256_mul_pd(qc, qc);
  __m256d na = splat(-3.969683028665376e+01);
  na = _mm256_fmadd_pd(na, r, splat(2.209460984245205e+02));
  na = _mm256_fmadd_pd(na, r, splat(-2.759285104469687e+02));
  na = _mm256_fmadd_pd(na, r, splat(1.383577518672690e+02));
  na = _mm256_fmadd_pd(na, r, splat(-3.066479806614716e+01));
  na = _mm256_fmadd_pd(na, r, splat(2.506628277459239e+00));
  __m256d da = splat(-5.447609879822406e+01);
  da = _mm256_fmadd_pd(da, r, splat(1.615858368580409e+02));
  da = _mm256_fmadd_pd(da, r, splat(-1.556989798598866e+02));
  da = _mm256_fmadd_pd(da, r, splat(6.680131188771972e+01));
  da = _mm256_fmadd_pd(da, r, splat(-1.328068155288572e+01));
  da = _mm256_fmadd_pd(da, r, splat(1.0));
  const __m256d xc = _mm256_div_pd(_mm256_mul_pd(na, qc), da);

  // Tail region: q = sqrt(-2 log(min(p, 1-p))), signed by the side.
  const __m256d pmin = _mm256_min_pd(p, _mm256_sub_pd(splat(1.0), p));
  const __m256d qt =
      _mm256_sqrt_pd(_mm256_mul_pd(splat(-2.0), log_pd(pmin)));
  __m256d nt = splat(-7.784894002430293e-03);
  nt = _mm256_fmadd_pd(nt, qt, splat(-3.223964580411365e-01));
  nt = _mm256_fmadd_pd(nt, qt, splat(-2.400758277161838e+00));
  nt = _mm256_fmadd_pd(nt, qt, splat(-2.549732539343734e+00));
  nt = _mm256_fmadd_pd(nt, qt, splat(4.374664141464968e+00));
  nt = _mm256_fmadd_pd(nt, qt, splat(2.938163982698783e+00));
  __m256d dt = splat(7.784695709041462e-03);
  dt = _mm256_fmadd_pd(dt, qt, splat(3.224671290700398e-01));
  dt = _mm256_fmadd_pd(dt, qt, splat(2.445134137142996e+00));
  dt = _mm256_fmadd_pd(dt, qt, splat(3.754408661907416e+00));
  dt = _mm256_fmadd_pd(dt, qt, splat(1.0));
  __m256d xt = _mm256_div_pd(nt, dt);
  // Lower tail keeps the (negative) value; upper tail mirrors it.
  const __m256d upper = _mm256_cmp_pd(p, splat(0.5), _CMP_GT_OQ);
  xt = _mm256_blendv_pd(xt, _mm256_sub_pd(_mm256_setzero_pd(), xt), upper);

  const __m256d central =
      _mm256_cmp_pd(_mm256_andnot_pd(splat(-0.0), qc), splat(0.425), _CMP_LE_OQ);
  __m256d x = _mm256_blendv_pd(xt, xc, central);

  // One Halley step: e = Phi(x) - p, u = e*sqrt(2pi)*exp(x^2/2).
  const __m256d e = _mm256_sub_pd(norm_cdf_pd(x), p);
  const __m256d half_x2 =
      _mm256_min_pd(_mm256_mul_pd(_mm256_mul_pd(x, x), splat(0.5)), splat(700.0));
  const __m256d u = _mm256_mul_pd(
      _mm256_mul_pd(e, splat(2.5066282746310005024)), exp_pd(half_x2));
  const __m256d corr = _mm256_div_pd(
      u, _mm256_fmadd_pd(_mm256_mul_pd(x, u), splat(0.5), splat(1.0)));
  return _mm256_sub_pd(x, corr);
}

void norm_cdf_avx2(const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, norm_cdf_pd(_mm256_loadu_pd(x + i)));
  if (i < n) {
    alignas(32) double xin[4] = {0, 0, 0, 0}, xout[4];
    for (std::size_t j = i; j < n; ++j) xin[j - i] = x[j];
    _mm256_store_pd(xout, norm_cdf_pd(_mm256_load_pd(xin)));
    for (std::size_t j = i; j < n; ++j) y[j] = xout[j - i];
  }
}

void norm_icdf_avx2(const double* p, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, norm_icdf_pd(_mm256_loadu_pd(p + i)));
  if (i < n) {
    alignas(32) double pin[4] = {0.5, 0.5, 0.5, 0.5}, pout[4];
    for (std::size_t j = i; j < n; ++j) pin[j - i] = p[j];
    _mm256_store_pd(pout, norm_icdf_pd(_mm256_load_pd(pin)));
    for (std::size_t j = i; j < n; ++j) y[j] = pout[j - i];
  }
}

}  // namespace

const Batch* avx2_batch_impl() {
  static const Batch b{norm_cdf_avx2, norm_icdf_avx2, "avx2"};
  return &b;
}

}  // namespace obr::kernels

#endif  // x86_64
