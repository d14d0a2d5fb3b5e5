// AArch64 NEON kernels (2 doubles per register). Advanced SIMD is mandatory on AArch64,
// so no runtime feature probe is needed beyond the build target.

#include <arm_neon.h>

#include "kernels_impl.hpp"

namespace qkm::simd::detail {
namespace {

double dot(const double* a, const double* b, std::size_t n) noexcept {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

double squared_distance(const double* a, const double* b, std::size_t n) noexcept {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float64x2_t d0 = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    const float64x2_t d1 = vsubq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    acc0 = vfmaq_f64(acc0, d0, d0);
    acc1 = vfmaq_f64(acc1, d1, d1);
  }
  double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

void axpy2(double alpha, const double* x, double beta, const double* y, double* acc,
           std::size_t n) noexcept {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t r = vld1q_f64(acc + i);
    r = vfmaq_n_f64(r, vld1q_f64(x + i), alpha);
    r = vfmaq_n_f64(r, vld1q_f64(y + i), beta);
    vst1q_f64(acc + i, r);
  }
  for (; i < n; ++i) acc[i] += alpha * x[i] + beta * y[i];
}

void abs2(const double* z, double* out, std::size_t n) noexcept {
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const float64x2x2_t v = vld2q_f64(z + 2 * k);  // deinterleave re / im
    vst1q_f64(out + k, vaddq_f64(vmulq_f64(v.val[0], v.val[0]), vmulq_f64(v.val[1], v.val[1])));
  }
  for (; k < n; ++k) out[k] = z[2 * k] * z[2 * k] + z[2 * k + 1] * z[2 * k + 1];
}

constexpr KernelTable kTable{dot, squared_distance, axpy2, abs2};

}  // namespace

const KernelTable& neon_table() noexcept { return kTable; }

}  // namespace qkm::simd::detail
