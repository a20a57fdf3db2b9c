// Compiled with -mavx2 -mfma; only reached after a CPUID check.

#include <immintrin.h>

#include <cmath>
#include <numbers>

#include "fbh/simd.hpp"

namespace fbh::simd::detail {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double dot3_avx2(const double* w, const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d p0 = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(a + i));
    const __m256d p1 = _mm256_mul_pd(_mm256_loadu_pd(w + i + 4), _mm256_loadu_pd(a + i + 4));
    acc0 = _mm256_fmadd_pd(p0, _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(p1, _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d p0 = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(a + i));
    acc0 = _mm256_fmadd_pd(p0, _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += w[i] * a[i] * b[i];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// Cody-Waite reduction by pi/2 followed by minimax polynomials on [-pi/4, pi/4]
// (coefficients as in Cephes sin.c).
constexpr double kPio2Hi = 1.57079632673412561417e+00;
constexpr double kPio2Mid = 6.07710050630396597660e-11;
constexpr double kPio2Lo = 2.02226624871116645580e-21;
constexpr double kTwoOverPi = 0.63661977236758134308;

constexpr double kSin[] = {1.58962301576546568060e-10, -2.50507477628578072866e-8, 2.75573136213857245213e-6,
                           -1.98412698295895385996e-4, 8.33333333332211858878e-3, -1.66666666666666307295e-1};
constexpr double kCos[] = {-1.13585365213876817300e-11, 2.08757008419747316778e-9, -2.75573141792967388112e-7,
                           2.48015872888517045348e-5, -1.38888888888730564116e-3, 4.16666666666665929218e-2};

inline void sincos_avx2(__m256d x, __m256d& s, __m256d& c) {
  const __m256d kq = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(kTwoOverPi)),
                                     _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(kq, _mm256_set1_pd(kPio2Hi), x);
  r = _mm256_fnmadd_pd(kq, _mm256_set1_pd(kPio2Mid), r);
  r = _mm256_fnmadd_pd(kq, _mm256_set1_pd(kPio2Lo), r);
  const __m256d r2 = _mm256_mul_pd(r, r);

  __m256d ps = _mm256_set1_pd(kSin[0]);
  __m256d pc = _mm256_set1_pd(kCos[0]);
  for (int k = 1; k < 6; ++k) {
    ps = _mm256_fmadd_pd(ps, r2, _mm256_set1_pd(kSin[k]));
    pc = _mm256_fmadd_pd(pc, r2, _mm256_set1_pd(kCos[k]));
  }
  const __m256d sr = _mm256_fmadd_pd(_mm256_mul_pd(ps, r2), r, r);
  const __m256d r4 = _mm256_mul_pd(r2, r2);
  const __m256d cr = _mm256_fmadd_pd(pc, r4, _mm256_fnmadd_pd(_mm256_set1_pd(0.5), r2, _mm256_set1_pd(1.0)));

  // Quadrant q = k mod 4: (sin, cos) = (s, c), (c, -s), (-s, -c), (-c, s).
  const __m128i q32 = _mm256_cvtpd_epi32(kq);
  const __m256i q = _mm256_cvtepi32_epi64(q32);
  const __m256i one = _mm256_set1_epi64x(1);
  const __m256i two = _mm256_set1_epi64x(2);
  const __m256d swap = _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(q, one), one));
  const __m256d sin_neg = _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(q, two), two));
  const __m256i q1 = _mm256_add_epi64(q, one);
  const __m256d cos_neg = _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(q1, two), two));
  const __m256d sign = _mm256_set1_pd(-0.0);
  s = _mm256_blendv_pd(sr, cr, swap);
  c = _mm256_blendv_pd(cr, sr, swap);
  s = _mm256_xor_pd(s, _mm256_and_pd(sign, sin_neg));
  c = _mm256_xor_pd(c, _mm256_and_pd(sign, cos_neg));
}

void hankel_avx2(const HankelSeries& hs, const double* z, double* out, std::size_t n) {
  constexpr int K = HankelSeries::kTerms;
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d two_over_pi = _mm256_set1_pd(2.0 / std::numbers::pi);
  const __m256d phase = _mm256_set1_pd(hs.phase);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vz = _mm256_loadu_pd(z + i);
    const __m256d w = _mm256_div_pd(one, vz);
    const __m256d mw2 = _mm256_sub_pd(_mm256_setzero_pd(), _mm256_mul_pd(w, w));
    __m256d p = _mm256_setzero_pd();
    for (int k = K - (K % 2); k >= 0; k -= 2) p = _mm256_fmadd_pd(p, mw2, _mm256_set1_pd(hs.a[k]));
    __m256d q = _mm256_setzero_pd();
    for (int k = K - 1 + (K % 2); k >= 1; k -= 2) q = _mm256_fmadd_pd(q, mw2, _mm256_set1_pd(hs.a[k]));
    q = _mm256_mul_pd(q, w);
    __m256d s;
    __m256d c;
    sincos_avx2(_mm256_sub_pd(vz, phase), s, c);
    const __m256d amp = _mm256_sqrt_pd(_mm256_mul_pd(two_over_pi, w));
    _mm256_storeu_pd(out + i, _mm256_mul_pd(amp, _mm256_fmsub_pd(p, c, _mm256_mul_pd(q, s))));
  }
  if (i < n) scalar_table().bessel_j_hankel(hs, z + i, out + i, n - i);
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{dot_avx2, dot3_avx2, axpy_avx2, hankel_avx2};
  return table;
}

}  // namespace fbh::simd::detail
