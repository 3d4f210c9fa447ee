#include <atomic>
#include <cstdlib>
#include <string_view>

#include "kernels_avx2.hpp"
#include "rppg/error.hpp"
#include "rppg/simd.hpp"

namespace rppg::simd {
namespace {

const KernelTable& detect() {
  const char* env = std::getenv("RPPG_SIMD");
  if (env != nullptr && std::string_view(env) == "scalar") return scalar_kernels();
  if (const KernelTable* t = avx2_kernels()) return *t;
  return scalar_kernels();
}

std::atomic<const KernelTable*>& active_table() {
  static std::atomic<const KernelTable*> table{&detect()};
  return table;
}

}  // namespace

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
  }
  return "unknown";
}

const KernelTable* avx2_kernels() {
#if RPPG_HAVE_AVX2
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  if (supported) return &avx2_kernel_table();
#endif
  return nullptr;
}

std::vector<Backend> available_backends() {
  std::vector<Backend> out{Backend::Scalar};
  if (avx2_kernels() != nullptr) out.push_back(Backend::Avx2);
  return out;
}

const KernelTable& kernels() { return *active_table().load(std::memory_order_acquire); }

void force_backend(Backend b) {
  const KernelTable* t = b == Backend::Avx2 ? avx2_kernels() : &scalar_kernels();
  require(t != nullptr, "simd backend not available on this CPU: " + std::string(backend_name(b)));
  active_table().store(t, std::memory_order_release);
}

void reset_backend() { active_table().store(&detect(), std::memory_order_release); }

}  // namespace rppg::simd
