// Compiled with per-function target attributes so the rest of the library
// does not require AVX2; only reached after a runtime CPU check.
#include "rppg/simd.hpp"

#include "kernels_avx2.hpp"

#if RPPG_HAVE_AVX2

#include <immintrin.h>

#define RPPG_AVX2 __attribute__((target("avx2,fma")))

namespace rppg::simd {
namespace {

RPPG_AVX2 double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

RPPG_AVX2 double sum_avx2(const double* x, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_add_pd(a0, _mm256_loadu_pd(x + i));
    a1 = _mm256_add_pd(a1, _mm256_loadu_pd(x + i + 4));
  }
  double s = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) s += x[i];
  return s;
}

RPPG_AVX2 double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
    a1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), a1);
  }
  double s = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

RPPG_AVX2 void axpb_accumulate_avx2(double a, const double* x, double b, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    // separate mul/add keeps results identical to the scalar loop
    const __m256d t = _mm256_add_pd(_mm256_mul_pd(va, _mm256_loadu_pd(x + i)), vb);
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), t));
  }
  for (; i < n; ++i) y[i] += a * x[i] + b;
}

RPPG_AVX2 void multiply_avx2(const double* x, const double* y, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) out[i] = x[i] * y[i];
}

RPPG_AVX2 void accumulate_power_avx2(const double* c, std::size_t bins, double* acc) {
  std::size_t k = 0;
  for (; k + 4 <= bins; k += 4) {
    const __m256d p0 = _mm256_loadu_pd(c + 2 * k);      // re0 im0 re1 im1
    const __m256d p1 = _mm256_loadu_pd(c + 2 * k + 4);  // re2 im2 re3 im3
    const __m256d s0 = _mm256_mul_pd(p0, p0);
    const __m256d s1 = _mm256_mul_pd(p1, p1);
    // hadd gives (s0[0]+s0[1], s1[0]+s1[1], s0[2]+s0[3], s1[2]+s1[3])
    const __m256d h = _mm256_hadd_pd(s0, s1);
    const __m256d ordered = _mm256_permute4x64_pd(h, 0b11011000);
    _mm256_storeu_pd(acc + k, _mm256_add_pd(_mm256_loadu_pd(acc + k), ordered));
  }
  for (; k < bins; ++k) {
    const double re = c[2 * k];
    const double im = c[2 * k + 1];
    acc[k] += re * re + im * im;
  }
}

// 32 pixels = 96 bytes = three 256-bit loads. Byte j of load v belongs to
// channel (32 * v + j) % 3; masking each channel and summing with SAD is exact.
struct Rgb8Masks {
  alignas(32) std::uint8_t bytes[3][3][32];
  Rgb8Masks() {
    for (int v = 0; v < 3; ++v)
      for (int c = 0; c < 3; ++c)
        for (int j = 0; j < 32; ++j) bytes[v][c][j] = ((32 * v + j) % 3 == c) ? 0xFF : 0x00;
  }
};

RPPG_AVX2 void sum_rgb8_avx2(const std::uint8_t* rgb, std::size_t pixels, std::uint64_t sums[3]) {
  static const Rgb8Masks masks;
  __m256i acc[3] = {_mm256_setzero_si256(), _mm256_setzero_si256(), _mm256_setzero_si256()};
  const __m256i zero = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 32 <= pixels; i += 32) {
    const std::uint8_t* p = rgb + 3 * i;
    for (int v = 0; v < 3; ++v) {
      const __m256i data = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p + 32 * v));
      for (int c = 0; c < 3; ++c) {
        const __m256i m = _mm256_load_si256(reinterpret_cast<const __m256i*>(masks.bytes[v][c]));
        acc[c] = _mm256_add_epi64(acc[c], _mm256_sad_epu8(_mm256_and_si256(data, m), zero));
      }
    }
  }
  for (int c = 0; c < 3; ++c) {
    alignas(32) std::uint64_t lanes[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc[c]);
    sums[c] += lanes[0] + lanes[1] + lanes[2] + lanes[3];
  }
  for (; i < pixels; ++i) {
    sums[0] += rgb[3 * i];
    sums[1] += rgb[3 * i + 1];
    sums[2] += rgb[3 * i + 2];
  }
}

}  // namespace

const KernelTable& avx2_kernel_table() {
  static const KernelTable table{Backend::Avx2,         sum_avx2,      dot_avx2,
                                 axpb_accumulate_avx2,  multiply_avx2, accumulate_power_avx2,
                                 sum_rgb8_avx2};
  return table;
}

}  // namespace rppg::simd

#endif
