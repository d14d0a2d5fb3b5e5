#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels_impl.hpp"
#include "qkm/error.hpp"

namespace qkm::simd {
namespace {

Isa detect_best() noexcept {
#if defined(QKM_HAVE_AVX2)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Isa::avx2;
#endif
#if defined(QKM_HAVE_NEON)
  return Isa::neon;
#endif
  return Isa::scalar;
}

Isa initial_isa() noexcept {
  if (const char* env = std::getenv("QKM_SIMD")) {
    if (auto requested = parse_isa(env); requested && isa_available(*requested)) return *requested;
  }
  return detect_best();
}

std::atomic<Isa>& current() noexcept {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ContractViolation(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " +
                            std::to_string(b) + ")");
  }
}

}  // namespace

bool isa_available(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(QKM_HAVE_AVX2)
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(QKM_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!isa_available(isa)) {
    throw ContractViolation("SIMD variant '" + std::string(isa_name(isa)) + "' is not available");
  }
  switch (isa) {
#if defined(QKM_HAVE_AVX2)
    case Isa::avx2:
      return detail::avx2_table();
#endif
#if defined(QKM_HAVE_NEON)
    case Isa::neon:
      return detail::neon_table();
#endif
    default:
      return detail::scalar_table();
  }
}

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

const KernelTable& active() noexcept { return table(active_isa()); }

void force_isa(Isa isa) {
  if (!isa_available(isa)) {
    throw ContractViolation("SIMD variant '" + std::string(isa_name(isa)) + "' is not available");
  }
  current().store(isa, std::memory_order_relaxed);
}

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

std::optional<Isa> parse_isa(std::string_view name) noexcept {
  if (name == "scalar") return Isa::scalar;
  if (name == "avx2") return Isa::avx2;
  if (name == "neon") return Isa::neon;
  return std::nullopt;
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_length(a.size(), b.size(), "simd::dot");
  return active().dot(a.data(), b.data(), a.size());
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  require_same_length(a.size(), b.size(), "simd::squared_distance");
  return active().squared_distance(a.data(), b.data(), a.size());
}

void axpy2(double alpha, std::span<const double> x, double beta, std::span<const double> y,
           std::span<double> acc) {
  require_same_length(x.size(), acc.size(), "simd::axpy2");
  require_same_length(y.size(), acc.size(), "simd::axpy2");
  active().axpy2(alpha, x.data(), beta, y.data(), acc.data(), acc.size());
}

void abs2(std::span<const std::complex<double>> z, std::span<double> out) {
  require_same_length(z.size(), out.size(), "simd::abs2");
  // std::complex<double> is layout-compatible with double[2].
  active().abs2(reinterpret_cast<const double*>(z.data()), out.data(), z.size());
}

}  // namespace qkm::simd
