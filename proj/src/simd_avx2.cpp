// AVX2/FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma; nothing here runs unless the runtime cpuid check passed.

#include "kaf/simd.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstdint>

namespace kaf::simd::detail {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

// exp via Cody-Waite range reduction and a degree-13 Taylor polynomial on
// |r| <= ln2/2, with a two-step 2^k scaling so the denormal tail is handled
// by the multiplies themselves.  Accurate to a couple of ulp.
constexpr double kLog2E = 1.4426950408889634074;
constexpr double kLn2Hi = 6.93147180369123816490e-01;
constexpr double kLn2Lo = 1.90821492927058770002e-10;
constexpr double kExpMax = 709.782712893384;
constexpr double kExpMin = -745.133219101941108420;

constexpr double kC[14] = {
    1.0,
    1.0,
    5.0e-01,
    1.6666666666666666667e-01,
    4.1666666666666666667e-02,
    8.3333333333333333333e-03,
    1.3888888888888888889e-03,
    1.9841269841269841270e-04,
    2.4801587301587301587e-05,
    2.7557319223985890653e-06,
    2.7557319223985890653e-07,
    2.5052108385441718775e-08,
    2.0876756987868098979e-09,
    1.6059043836821614599e-10,
};

inline __m256d pow2i(__m128i k32) {
  __m256i k64 = _mm256_cvtepi32_epi64(k32);
  __m256i bits =
      _mm256_slli_epi64(_mm256_add_epi64(k64, _mm256_set1_epi64x(1023)), 52);
  return _mm256_castsi256_pd(bits);
}

inline __m256d exp_pd(__m256d x) {
  const __m256d kd = _mm256_round_pd(
      _mm256_mul_pd(x, _mm256_set1_pd(kLog2E)),
      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(kd, _mm256_set1_pd(kLn2Hi), x);
  r = _mm256_fnmadd_pd(kd, _mm256_set1_pd(kLn2Lo), r);

  __m256d p = _mm256_set1_pd(kC[13]);
  for (int i = 12; i >= 0; --i)
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(kC[i]));

  // k = k1 + k2 with both halves in the normal-exponent range
  const __m256d kd1 = _mm256_round_pd(
      _mm256_mul_pd(kd, _mm256_set1_pd(0.5)),
      _MM_FROUND_TO_NEG_INF | _MM_FROUND_NO_EXC);
  const __m256d kd2 = _mm256_sub_pd(kd, kd1);
  p = _mm256_mul_pd(_mm256_mul_pd(p, pow2i(_mm256_cvtpd_epi32(kd1))),
                    pow2i(_mm256_cvtpd_epi32(kd2)));

  p = _mm256_blendv_pd(p, _mm256_set1_pd(HUGE_VAL),
                       _mm256_cmp_pd(x, _mm256_set1_pd(kExpMax), _CMP_GT_OQ));
  p = _mm256_blendv_pd(p, _mm256_setzero_pd(),
                       _mm256_cmp_pd(x, _mm256_set1_pd(kExpMin), _CMP_LT_OQ));
  p = _mm256_blendv_pd(p, x, _mm256_cmp_pd(x, x, _CMP_UNORD_Q));
  return p;
}

// Scalar mirror of exp_pd for loop remainders, so a value's result does not
// depend on which lane it lands in.
inline double exp_poly1(double x) {
  if (x != x) return x;
  if (x > kExpMax) return HUGE_VAL;
  if (x < kExpMin) return 0.0;
  const double kd = std::nearbyint(x * kLog2E);
  double r = x - kd * kLn2Hi;
  r -= kd * kLn2Lo;
  double p = kC[13];
  for (int i = 12; i >= 0; --i) p = p * r + kC[i];
  const double k1 = std::floor(kd * 0.5);
  const double k2 = kd - k1;
  return p * std::ldexp(1.0, static_cast<int>(k1)) *
         std::ldexp(1.0, static_cast<int>(k2));
}

} // namespace

bool cpu_has_avx2() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d yv = _mm256_loadu_pd(y + i);
    yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv);
    _mm256_storeu_pd(y + i, yv);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double dot_axpy_avx2(const double* row, double xi, const double* x, double* y,
                     std::size_t n) {
  const __m256d xiv = _mm256_set1_pd(xi);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d rv = _mm256_loadu_pd(row + i);
    acc = _mm256_fmadd_pd(rv, _mm256_loadu_pd(x + i), acc);
    __m256d yv = _mm256_loadu_pd(y + i);
    yv = _mm256_fmadd_pd(xiv, rv, yv);
    _mm256_storeu_pd(y + i, yv);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    s += row[i] * x[i];
    y[i] += xi * row[i];
  }
  return s;
}

void sqdist_cols_avx2(const double* cols, std::size_t stride, std::size_t dim,
                      std::size_t count, const double* q, double* out) {
  std::size_t j = 0;
  for (; j + 4 <= count; j += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t k = 0; k < dim; ++k) {
      const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(cols + k * stride + j),
                                      _mm256_set1_pd(q[k]));
      acc = _mm256_fmadd_pd(d, d, acc);
    }
    _mm256_storeu_pd(out + j, acc);
  }
  for (; j < count; ++j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      const double d = cols[k * stride + j] - q[k];
      acc += d * d;
    }
    out[j] = acc;
  }
}

void exp_scale_avx2(const double* src, double* dst, std::size_t n,
                    double scale, double coef) {
  const __m256d sv = _mm256_set1_pd(scale);
  const __m256d cv = _mm256_set1_pd(coef);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_mul_pd(sv, _mm256_loadu_pd(src + i));
    _mm256_storeu_pd(dst + i, _mm256_mul_pd(cv, exp_pd(x)));
  }
  for (; i < n; ++i) dst[i] = coef * exp_poly1(scale * src[i]);
}

} // namespace kaf::simd::detail

#endif // x86_64
