// AVX2+FMA kernel variants. Compiled with -mavx2 -mfma for this translation
// unit only; callers must check cpu support before dispatching here.
//
// exp/log follow the classic Agner Fog VCL construction: Cody-Waite range
// reduction plus a degree-13 Taylor core for exp, exponent extraction plus an
// atanh-series core for log. Tails of non-multiple-of-4 arrays fall back to
// libm; backends agree within a few ulp per element, not bitwise.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>

#include "rdp/kernels.hpp"

namespace rdp::kernels {
namespace {

constexpr double kExpMax = 708.39;

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_max_sd(lo, sh));
}

// 2^n for integer-valued n in [-1022, 1023], via exponent-field assembly.
inline __m256d pow2n(__m256d n) {
  const __m256d pow2_52 = _mm256_set1_pd(4503599627370496.0);
  const __m256d bias = _mm256_set1_pd(1023.0);
  __m256d a = _mm256_add_pd(n, _mm256_add_pd(bias, pow2_52));
  __m256i b = _mm256_castpd_si256(a);
  __m256i c = _mm256_slli_epi64(b, 52);
  return _mm256_castsi256_pd(c);
}

inline __m256d exp_pd(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.44269504088896340736);
  const __m256d ln2_hi = _mm256_set1_pd(0.693145751953125);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);

  const __m256d p2 = _mm256_set1_pd(1.0 / 2.0);
  const __m256d p3 = _mm256_set1_pd(1.0 / 6.0);
  const __m256d p4 = _mm256_set1_pd(1.0 / 24.0);
  const __m256d p5 = _mm256_set1_pd(1.0 / 120.0);
  const __m256d p6 = _mm256_set1_pd(1.0 / 720.0);
  const __m256d p7 = _mm256_set1_pd(1.0 / 5040.0);
  const __m256d p8 = _mm256_set1_pd(1.0 / 40320.0);
  const __m256d p9 = _mm256_set1_pd(1.0 / 362880.0);
  const __m256d p10 = _mm256_set1_pd(1.0 / 3628800.0);
  const __m256d p11 = _mm256_set1_pd(1.0 / 39916800.0);
  const __m256d p12 = _mm256_set1_pd(1.0 / 479001600.0);
  const __m256d p13 = _mm256_set1_pd(1.0 / 6227020800.0);

  __m256d r = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                              _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d xx = _mm256_fnmadd_pd(r, ln2_hi, x);
  xx = _mm256_fnmadd_pd(r, ln2_lo, xx);

  // Taylor core: xx + p2 xx^2 + ... + p13 xx^13, evaluated Estrin-style.
  __m256d x2 = _mm256_mul_pd(xx, xx);
  __m256d x4 = _mm256_mul_pd(x2, x2);
  __m256d x8 = _mm256_mul_pd(x4, x4);
  __m256d t3 = _mm256_fmadd_pd(p3, xx, p2);
  __m256d t5 = _mm256_fmadd_pd(p5, xx, p4);
  __m256d t7 = _mm256_fmadd_pd(p7, xx, p6);
  __m256d t9 = _mm256_fmadd_pd(p9, xx, p8);
  __m256d t11 = _mm256_fmadd_pd(p11, xx, p10);
  __m256d t13 = _mm256_fmadd_pd(p13, xx, p12);
  __m256d u3 = _mm256_fmadd_pd(t3, x2, xx);
  __m256d u7 = _mm256_fmadd_pd(t7, x2, t5);
  __m256d u11 = _mm256_fmadd_pd(t11, x2, t9);
  __m256d v7 = _mm256_fmadd_pd(u7, x4, u3);
  __m256d v13 = _mm256_fmadd_pd(t13, x4, u11);
  __m256d z = _mm256_fmadd_pd(v13, x8, v7);

  z = _mm256_mul_pd(_mm256_add_pd(z, _mm256_set1_pd(1.0)), pow2n(r));

  // Saturate out-of-range lanes; NaN propagates.
  const __m256d maxx = _mm256_set1_pd(kExpMax);
  __m256d too_big = _mm256_cmp_pd(x, maxx, _CMP_GT_OQ);
  __m256d too_small = _mm256_cmp_pd(x, _mm256_sub_pd(_mm256_setzero_pd(), maxx), _CMP_LT_OQ);
  __m256d nan_mask = _mm256_cmp_pd(x, x, _CMP_UNORD_Q);
  z = _mm256_blendv_pd(z, _mm256_set1_pd(std::numeric_limits<double>::infinity()), too_big);
  z = _mm256_blendv_pd(z, _mm256_setzero_pd(), too_small);
  z = _mm256_blendv_pd(z, x, nan_mask);
  return z;
}

// Exact for the 11-bit exponent-field range it is used on.
inline __m256d int64_as_pd(__m256i v) {
  // values < 2^31, so the 32-bit conversion path is fine
  __m128i lo = _mm256_castsi256_si128(v);
  __m128i hi = _mm256_extracti128_si256(v, 1);
  __m128i packed = _mm_unpacklo_epi64(_mm_shuffle_epi32(lo, 0x08), _mm_shuffle_epi32(hi, 0x08));
  return _mm256_cvtepi32_pd(packed);
}

// log via m in [sqrt(0.5), sqrt(2)), log m = 2 atanh((m-1)/(m+1)).
inline __m256d log_pd(__m256d x) {
  const __m256d ln2_hi = _mm256_set1_pd(0.693359375);
  const __m256d ln2_lo = _mm256_set1_pd(-2.121944400546905827679e-4);
  const __m256d one = _mm256_set1_pd(1.0);

  // Rescale subnormals so the exponent field is usable.
  const __m256d tiny = _mm256_set1_pd(2.2250738585072014e-308);
  __m256d is_sub = _mm256_and_pd(_mm256_cmp_pd(x, tiny, _CMP_LT_OQ),
                                 _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_GT_OQ));
  __m256d xs = _mm256_blendv_pd(x, _mm256_mul_pd(x, _mm256_set1_pd(4503599627370496.0)), is_sub);
  __m256d sub_bias = _mm256_and_pd(is_sub, _mm256_set1_pd(52.0));

  __m256i bits = _mm256_castpd_si256(xs);
  __m256i expfield = _mm256_srli_epi64(bits, 52);
  expfield = _mm256_and_si256(expfield, _mm256_set1_epi64x(0x7FF));
  // n = unbiased exponent + 1, matching mantissa normalised to [0.5, 1)
  __m256d n = _mm256_sub_pd(int64_as_pd(expfield), _mm256_set1_pd(1022.0));

  __m256i mant = _mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL));
  mant = _mm256_or_si256(mant, _mm256_set1_epi64x(0x3FE0000000000000LL));  // [0.5, 1)
  __m256d m = _mm256_castsi256_pd(mant);

  const __m256d sqrt_half = _mm256_set1_pd(0.70710678118654752440);
  __m256d lt = _mm256_cmp_pd(m, sqrt_half, _CMP_LT_OQ);
  m = _mm256_blendv_pd(m, _mm256_add_pd(m, m), lt);
  n = _mm256_blendv_pd(n, _mm256_sub_pd(n, one), lt);
  n = _mm256_sub_pd(n, sub_bias);

  __m256d zn = _mm256_sub_pd(m, one);
  __m256d zd = _mm256_add_pd(m, one);
  __m256d zq = _mm256_div_pd(zn, zd);
  __m256d w = _mm256_mul_pd(zq, zq);

  // atanh series: z (1 + w/3 + w^2/5 + ... + w^9/19)
  __m256d poly = _mm256_set1_pd(1.0 / 19.0);
  poly = _mm256_fmadd_pd(poly, w, _mm256_set1_pd(1.0 / 17.0));
  poly = _mm256_fmadd_pd(poly, w, _mm256_set1_pd(1.0 / 15.0));
  poly = _mm256_fmadd_pd(poly, w, _mm256_set1_pd(1.0 / 13.0));
  poly = _mm256_fmadd_pd(poly, w, _mm256_set1_pd(1.0 / 11.0));
  poly = _mm256_fmadd_pd(poly, w, _mm256_set1_pd(1.0 / 9.0));
  poly = _mm256_fmadd_pd(poly, w, _mm256_set1_pd(1.0 / 7.0));
  poly = _mm256_fmadd_pd(poly, w, _mm256_set1_pd(1.0 / 5.0));
  poly = _mm256_fmadd_pd(poly, w, _mm256_set1_pd(1.0 / 3.0));

  // log x = n ln2 + 2 z + 2 z w poly ; keep the ln2 split compensated.
  __m256d z2 = _mm256_add_pd(zq, zq);
  __m256d res = _mm256_fmadd_pd(_mm256_mul_pd(z2, w), poly, _mm256_mul_pd(n, ln2_lo));
  res = _mm256_add_pd(res, z2);
  res = _mm256_fmadd_pd(n, ln2_hi, res);

  // Specials: 0 -> -inf, negative/NaN -> NaN, +inf -> +inf.
  __m256d zero_mask = _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_EQ_OQ);
  __m256d neg_mask = _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_LT_OQ);
  __m256d nan_mask = _mm256_cmp_pd(x, x, _CMP_UNORD_Q);
  __m256d inf_mask = _mm256_cmp_pd(x, _mm256_set1_pd(std::numeric_limits<double>::infinity()),
                                   _CMP_EQ_OQ);
  res = _mm256_blendv_pd(res, _mm256_set1_pd(-std::numeric_limits<double>::infinity()), zero_mask);
  res = _mm256_blendv_pd(res, _mm256_set1_pd(std::numeric_limits<double>::quiet_NaN()),
                         _mm256_or_pd(neg_mask, nan_mask));
  res = _mm256_blendv_pd(res, _mm256_set1_pd(std::numeric_limits<double>::infinity()), inf_mask);
  return res;
}

double reduce_max_(const double* x, std::size_t n) {
  std::size_t i = 0;
  double m = -std::numeric_limits<double>::infinity();
  if (n >= 4) {
    __m256d acc = _mm256_loadu_pd(x);
    for (i = 4; i + 4 <= n; i += 4) acc = _mm256_max_pd(acc, _mm256_loadu_pd(x + i));
    m = hmax(acc);
  }
  for (; i < n; ++i)
    if (x[i] > m) m = x[i];
  return m;
}

double reduce_sum_(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

double dot_(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double s = hsum(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_exp_(const double* x, double shift, std::size_t n) {
  const __m256d sh = _mm256_set1_pd(shift);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, exp_pd(_mm256_sub_pd(_mm256_loadu_pd(x + i), sh)));
  double s = hsum(acc);
  for (; i < n; ++i) s += std::exp(x[i] - shift);
  return s;
}

double dot_exp_(const double* w, const double* x, double shift, std::size_t n) {
  const __m256d sh = _mm256_set1_pd(shift);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i),
                          exp_pd(_mm256_sub_pd(_mm256_loadu_pd(x + i), sh)), acc);
  double s = hsum(acc);
  for (; i < n; ++i) s += w[i] * std::exp(x[i] - shift);
  return s;
}

void vexp_(const double* x, double shift, double* out, std::size_t n) {
  const __m256d sh = _mm256_set1_pd(shift);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, exp_pd(_mm256_sub_pd(_mm256_loadu_pd(x + i), sh)));
  for (; i < n; ++i) out[i] = std::exp(x[i] - shift);
}

double max_decay_(const double* u, const double* t, double theta, std::size_t n) {
  const __m256d th = _mm256_set1_pd(theta);
  std::size_t i = 0;
  double m = -std::numeric_limits<double>::infinity();
  if (n >= 4) {
    __m256d acc = _mm256_fnmadd_pd(th, _mm256_loadu_pd(t), _mm256_loadu_pd(u));
    for (i = 4; i + 4 <= n; i += 4)
      acc = _mm256_max_pd(acc, _mm256_fnmadd_pd(th, _mm256_loadu_pd(t + i), _mm256_loadu_pd(u + i)));
    m = hmax(acc);
  }
  for (; i < n; ++i) {
    const double z = u[i] - theta * t[i];
    if (z > m) m = z;
  }
  return m;
}

void decay_exp_pair_(const double* u, const double* t, double theta, double shift,
                     std::size_t n, double* s0, double* s1) {
  const __m256d th = _mm256_set1_pd(theta);
  const __m256d sh = _mm256_set1_pd(shift);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d tv = _mm256_loadu_pd(t + i);
    __m256d z = _mm256_sub_pd(_mm256_fnmadd_pd(th, tv, _mm256_loadu_pd(u + i)), sh);
    __m256d e = exp_pd(z);
    acc0 = _mm256_add_pd(acc0, e);
    acc1 = _mm256_fmadd_pd(tv, e, acc1);
  }
  double a = hsum(acc0), b = hsum(acc1);
  for (; i < n; ++i) {
    const double e = std::exp(u[i] - theta * t[i] - shift);
    a += e;
    b += t[i] * e;
  }
  *s0 = a;
  *s1 = b;
}

double kl_sum_(const double* p, const double* q, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d pv = _mm256_loadu_pd(p + i);
    __m256d qv = _mm256_loadu_pd(q + i);
    __m256d diff = _mm256_sub_pd(log_pd(pv), log_pd(qv));
    __m256d mask = _mm256_cmp_pd(pv, _mm256_setzero_pd(), _CMP_GT_OQ);
    diff = _mm256_and_pd(diff, mask);  // 0 log 0 := 0
    acc = _mm256_fmadd_pd(pv, diff, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i)
    if (p[i] > 0.0) s += p[i] * (std::log(p[i]) - std::log(q[i]));
  return s;
}

double l1_dist_(const double* a, const double* b, std::size_t n) {
  const __m256d signmask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7FFFFFFFFFFFFFFFLL));
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_and_pd(d, signmask));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += std::abs(a[i] - b[i]);
  return s;
}

}  // namespace

const Ops& avx2_ops() {
  static const Ops ops{
      "avx2",     reduce_max_, reduce_sum_,     dot_,     sum_exp_, dot_exp_,
      vexp_,      max_decay_,  decay_exp_pair_, kl_sum_,  l1_dist_,
  };
  return ops;
}

}  // namespace rdp::kernels

#endif  // x86_64
