#include <cstdlib>
#include <string_view>

#include "gmelab/kernels.hpp"

namespace gmelab::kernels {

bool avx2_supported() {
#if GMELAB_HAVE_AVX2_KERNELS && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

const KernelTable& select() {
  const char* env = std::getenv("GMELAB_SIMD");
  if (env != nullptr && std::string_view(env) == "scalar") return scalar::table();
#if GMELAB_HAVE_AVX2_KERNELS
  if (avx2_supported()) return avx2::table();
#endif
  return scalar::table();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& chosen = select();
  return chosen;
}

}  // namespace gmelab::kernels
