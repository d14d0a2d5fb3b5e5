#pragma once

// Data-parallel double-precision kernels with a scalar reference implementation and
// ISA-specific variants (AVX2+FMA on x86-64, NEON on AArch64) selected at runtime.
//
// Every variant must agree with the scalar reference to within rounding of the
// reordered sums; tests/test_simd.cpp enforces this for each available ISA.

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

namespace qkm::simd {

enum class Isa { scalar, avx2, neon };

struct KernelTable {
  /// sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n) noexcept;
  /// sum_i (a[i] - b[i])^2
  double (*squared_distance)(const double* a, const double* b, std::size_t n) noexcept;
  /// acc[i] += alpha * x[i] + beta * y[i]
  void (*axpy2)(double alpha, const double* x, double beta, const double* y, double* acc,
                std::size_t n) noexcept;
  /// out[k] = re(z_k)^2 + im(z_k)^2 for n complex values stored interleaved (re, im).
  void (*abs2)(const double* interleaved, double* out, std::size_t n) noexcept;
};

bool isa_available(Isa isa) noexcept;
/// Kernel table for a specific ISA. Throws ContractViolation if it is not available.
const KernelTable& table(Isa isa);

/// The ISA chosen for this process: the QKM_SIMD environment variable (scalar|avx2|neon)
/// if set and available, otherwise the best one the CPU supports.
Isa active_isa() noexcept;
const KernelTable& active() noexcept;
/// Overrides the runtime choice for the rest of the process (CLI --simd).
void force_isa(Isa isa);

std::string_view isa_name(Isa isa) noexcept;
std::optional<Isa> parse_isa(std::string_view name) noexcept;

// Span conveniences over the active table. Length mismatch is a ContractViolation.
double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);
void axpy2(double alpha, std::span<const double> x, double beta, std::span<const double> y,
           std::span<double> acc);
void abs2(std::span<const std::complex<double>> z, std::span<double> out);

}  // namespace qkm::simd
