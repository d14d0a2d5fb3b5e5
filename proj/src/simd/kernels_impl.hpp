#pragma once

#include "qkm/simd.hpp"

namespace qkm::simd::detail {

const KernelTable& scalar_table() noexcept;
#if defined(QKM_HAVE_AVX2)
const KernelTable& avx2_table() noexcept;
#endif
#if defined(QKM_HAVE_NEON)
const KernelTable& neon_table() noexcept;
#endif

}  // namespace qkm::simd::detail
