#include "rppg/simd.hpp"

namespace rppg::simd {
namespace {

double sum_scalar(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpb_accumulate_scalar(double a, const double* x, double b, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i] + b;
}

void multiply_scalar(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}

void accumulate_power_scalar(const double* c, std::size_t bins, double* acc) {
  for (std::size_t k = 0; k < bins; ++k) {
    const double re = c[2 * k];
    const double im = c[2 * k + 1];
    acc[k] += re * re + im * im;
  }
}

void sum_rgb8_scalar(const std::uint8_t* rgb, std::size_t pixels, std::uint64_t sums[3]) {
  std::uint64_t r = 0, g = 0, b = 0;
  for (std::size_t i = 0; i < pixels; ++i) {
    r += rgb[3 * i];
    g += rgb[3 * i + 1];
    b += rgb[3 * i + 2];
  }
  sums[0] += r;
  sums[1] += g;
  sums[2] += b;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{Backend::Scalar,          sum_scalar,      dot_scalar,
                                 axpb_accumulate_scalar,   multiply_scalar, accumulate_power_scalar,
                                 sum_rgb8_scalar};
  return table;
}

}  // namespace rppg::simd
