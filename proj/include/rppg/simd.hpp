#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

// Data-parallel inner loops used across the pipeline. Every kernel has a
// scalar reference implementation; an AVX2/FMA variant is selected at runtime
// when the CPU supports it. Reductions may differ from the scalar reference
// in the last bits (different summation order); integer kernels are exact.
namespace rppg::simd {

enum class Backend { Scalar, Avx2 };

std::string_view backend_name(Backend b);

struct KernelTable {
  Backend backend;

  double (*sum)(const double* x, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y[i] += a * x[i] + b
  void (*axpb_accumulate)(double a, const double* x, double b, double* y, std::size_t n);
  // out[i] = x[i] * y[i]
  void (*multiply)(const double* x, const double* y, double* out, std::size_t n);
  // acc[k] += re[k]^2 + im[k]^2 over interleaved (re, im) pairs
  void (*accumulate_power)(const double* interleaved, std::size_t bins, double* acc);
  // sums[c] += channel c over `pixels` interleaved 8-bit RGB triples
  void (*sum_rgb8)(const std::uint8_t* rgb, std::size_t pixels, std::uint64_t sums[3]);
};

const KernelTable& scalar_kernels();
// Null when the AVX2 variant was not compiled in or the CPU lacks AVX2+FMA.
const KernelTable* avx2_kernels();

/// Backends usable on this machine, scalar first.
std::vector<Backend> available_backends();

/// Table used by the library. Chosen once from CPU features unless overridden.
const KernelTable& kernels();

/// Forces a backend (tests and benchmarking). Throws if it is unavailable.
void force_backend(Backend b);
void reset_backend();

// Convenience wrappers over kernels().
inline double sum(std::span<const double> x) { return kernels().sum(x.data(), x.size()); }
inline double dot(std::span<const double> x, std::span<const double> y) {
  return kernels().dot(x.data(), y.data(), x.size() < y.size() ? x.size() : y.size());
}
inline double mean(std::span<const double> x) { return sum(x) / static_cast<double>(x.size()); }

}  // namespace rppg::simd
