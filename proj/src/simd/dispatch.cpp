#include <cstdlib>
#include <string>

#include "softarm/simd/kernels.hpp"

namespace softarm::simd {

namespace {

const Kernels& select() {
  const char* env = std::getenv("SOFTARM_SIMD");
  std::string want = env ? env : "";
  if (want == "scalar") return scalar_kernels();
#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__)
  if (want == "avx2") return avx2_supported() ? avx2_kernels() : scalar_kernels();
  if (want.empty() && avx2_supported()) return avx2_kernels();
#endif
#if defined(__aarch64__) || defined(__ARM_NEON)
  if (want == "neon" || want.empty()) return neon_kernels();
#endif
  return scalar_kernels();
}

}  // namespace

const Kernels& active_kernels() {
  static const Kernels& k = select();
  return k;
}

}  // namespace softarm::simd
