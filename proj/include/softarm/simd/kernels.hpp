#pragma once

#include <cstddef>
#include <string>

namespace softarm::simd {

// Data-parallel kernels behind the workspace sweep and point-cloud metrics.
// All variants of one kernel are bit-identical: every backend evaluates the
// same expression tree per element (FP contraction is disabled for these
// translation units) and the reductions used (max/min) are exact under
// reordering. The equivalence suite asserts this.
struct Kernels {
  const char* name;

  // out = R * v + t for each column v = (x[i], y[i], z[i]); R is row-major 3x3.
  void (*transform_points)(const double R[9], const double t[3], const double* x,
                           const double* y, const double* z, double* ox, double* oy,
                           double* oz, std::size_t n);

  // max_i (x[i]^2 + y[i]^2); 0 for n = 0.
  double (*max_radial_sq)(const double* x, const double* y, std::size_t n);

  // [lo, hi] over z; undefined for n = 0 (callers guard).
  void (*minmax)(const double* z, std::size_t n, double* lo, double* hi);

  // Per-bin max of x^2 + y^2, bin index floor((z - z0) / dz) clamped to
  // [0, nbins). bins must be pre-filled by the caller (e.g. with -1 for
  // "empty"); entries are raised with max().
  void (*binned_max_radial_sq)(const double* x, const double* y, const double* z,
                               std::size_t n, double z0, double dz, double* bins,
                               std::size_t nbins);
};

const Kernels& scalar_kernels();

#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__)
const Kernels& avx2_kernels();
bool avx2_supported();
#endif
#if defined(__aarch64__) || defined(__ARM_NEON)
const Kernels& neon_kernels();
#endif

// Backend chosen at startup: best supported SIMD variant, overridable with
// SOFTARM_SIMD=scalar|avx2|neon (unsupported values fall back to scalar).
const Kernels& active_kernels();

}  // namespace softarm::simd
