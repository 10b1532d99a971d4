#include <stdexcept>
#include <string>

#include "dnp/simd/lineshape_kernels.hpp"

namespace dnp::simd {

namespace {

bool cpu_has_avx2() {
#if defined(DNP_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported;
#else
  return false;
#endif
}

}  // namespace

bool backend_available(Backend backend) {
  switch (backend) {
    case Backend::automatic:
    case Backend::scalar: return true;
    case Backend::avx2: return cpu_has_avx2();
    case Backend::neon:
#if defined(DNP_HAVE_NEON_KERNELS)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const LineshapeKernels& kernels(Backend backend) {
  if (!backend_available(backend)) {
    throw std::invalid_argument("lineshape backend not available on this CPU: " +
                                std::string(to_string(backend)));
  }
  switch (backend) {
#if defined(DNP_HAVE_AVX2_KERNELS)
    case Backend::avx2: return detail::avx2_kernels();
#endif
#if defined(DNP_HAVE_NEON_KERNELS)
    case Backend::neon: return detail::neon_kernels();
#endif
    case Backend::automatic:
#if defined(DNP_HAVE_AVX2_KERNELS)
      if (cpu_has_avx2()) return detail::avx2_kernels();
#endif
#if defined(DNP_HAVE_NEON_KERNELS)
      return detail::neon_kernels();
#endif
      return detail::scalar_kernels();
    default: return detail::scalar_kernels();
  }
}

std::string_view to_string(Backend backend) {
  switch (backend) {
    case Backend::automatic: return "automatic";
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
    case Backend::neon: return "neon";
  }
  return "?";
}

}  // namespace dnp::simd
