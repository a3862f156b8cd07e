#include <cstdlib>
#include <string_view>

#include "mecpart/kernels.hpp"

namespace mecpart::kernels {

#if defined(MECPART_WITH_AVX2)
const DenseKernels& avx2_kernels_impl();
#endif

const DenseKernels* avx2_kernels() {
#if defined(MECPART_WITH_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &avx2_kernels_impl() : nullptr;
#else
  return nullptr;
#endif
}

const DenseKernels& active_kernels() {
  static const DenseKernels& chosen = [] () -> const DenseKernels& {
    const char* env = std::getenv("MECPART_KERNELS");
    if (env && std::string_view(env) == "scalar") return scalar_kernels();
    if (const auto* k = avx2_kernels()) return *k;
    return scalar_kernels();
  }();
  return chosen;
}

}  // namespace mecpart::kernels
