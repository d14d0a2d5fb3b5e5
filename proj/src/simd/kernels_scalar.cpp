// Scalar reference kernels. Plain left-to-right loops; these define the semantics the
// vector variants are tested against.

#include "kernels_impl.hpp"

namespace qkm::simd::detail {
namespace {

double dot(const double* a, const double* b, std::size_t n) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

double squared_distance(const double* a, const double* b, std::size_t n) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

void axpy2(double alpha, const double* x, double beta, const double* y, double* acc,
           std::size_t n) noexcept {
  for (std::size_t i = 0; i < n; ++i) acc[i] += alpha * x[i] + beta * y[i];
}

void abs2(const double* z, double* out, std::size_t n) noexcept {
  for (std::size_t k = 0; k < n; ++k) out[k] = z[2 * k] * z[2 * k] + z[2 * k + 1] * z[2 * k + 1];
}

constexpr KernelTable kTable{dot, squared_distance, axpy2, abs2};

}  // namespace

const KernelTable& scalar_table() noexcept { return kTable; }

}  // namespace qkm::simd::detail
