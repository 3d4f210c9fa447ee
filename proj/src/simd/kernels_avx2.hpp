#pragma once

#include "rppg/simd.hpp"

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#define RPPG_HAVE_AVX2 1
#else
#define RPPG_HAVE_AVX2 0
#endif

namespace rppg::simd {
#if RPPG_HAVE_AVX2
const KernelTable& avx2_kernel_table();
#endif
}  // namespace rppg::simd
