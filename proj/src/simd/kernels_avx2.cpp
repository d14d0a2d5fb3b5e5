// AVX2 + FMA kernels. Compiled with -mavx2 -mfma; only reached after the dispatcher has
// confirmed CPU support.

#include <immintrin.h>

#include "kernels_impl.hpp"

namespace qkm::simd::detail {
namespace {

inline double hsum(__m256d v) noexcept {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

double dot(const double* a, const double* b, std::size_t n) noexcept {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double sum = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

double squared_distance(const double* a, const double* b, std::size_t n) noexcept {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  if (i + 4 <= n) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    i += 4;
  }
  double sum = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

void axpy2(double alpha, const double* x, double beta, const double* y, double* acc,
           std::size_t n) noexcept {
  const __m256d va = _mm256_set1_pd(alpha);
  const __m256d vb = _mm256_set1_pd(beta);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d r = _mm256_loadu_pd(acc + i);
    r = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), r);
    r = _mm256_fmadd_pd(vb, _mm256_loadu_pd(y + i), r);
    _mm256_storeu_pd(acc + i, r);
  }
  for (; i < n; ++i) acc[i] += alpha * x[i] + beta * y[i];
}

void abs2(const double* z, double* out, std::size_t n) noexcept {
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d z01 = _mm256_loadu_pd(z + 2 * k);
    const __m256d z23 = _mm256_loadu_pd(z + 2 * k + 4);
    // hadd gives {|z0|^2, |z2|^2, |z1|^2, |z3|^2}
    const __m256d sums = _mm256_hadd_pd(_mm256_mul_pd(z01, z01), _mm256_mul_pd(z23, z23));
    _mm256_storeu_pd(out + k, _mm256_permute4x64_pd(sums, _MM_SHUFFLE(3, 1, 2, 0)));
  }
  for (; k < n; ++k) out[k] = z[2 * k] * z[2 * k] + z[2 * k + 1] * z[2 * k + 1];
}

constexpr KernelTable kTable{dot, squared_distance, axpy2, abs2};

}  // namespace

const KernelTable& avx2_table() noexcept { return kTable; }

}  // namespace qkm::simd::detail
