// NEON kernels (aarch64). Same association order as the scalar reference,
// multiply/add only, so results are bit-identical.

#if defined(__aarch64__) || defined(__ARM_NEON)

#include <arm_neon.h>

#include <cstddef>

#include "softarm/simd/kernels.hpp"

namespace softarm::simd {
namespace {

void transform_points_neon(const double R[9], const double t[3], const double* x,
                           const double* y, const double* z, double* ox, double* oy,
                           double* oz, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t px = vld1q_f64(x + i);
    float64x2_t py = vld1q_f64(y + i);
    float64x2_t pz = vld1q_f64(z + i);
    float64x2_t a = vaddq_f64(
        vaddq_f64(vaddq_f64(vmulq_n_f64(px, R[0]), vmulq_n_f64(py, R[1])),
                  vmulq_n_f64(pz, R[2])),
        vdupq_n_f64(t[0]));
    float64x2_t b = vaddq_f64(
        vaddq_f64(vaddq_f64(vmulq_n_f64(px, R[3]), vmulq_n_f64(py, R[4])),
                  vmulq_n_f64(pz, R[5])),
        vdupq_n_f64(t[1]));
    float64x2_t c = vaddq_f64(
        vaddq_f64(vaddq_f64(vmulq_n_f64(px, R[6]), vmulq_n_f64(py, R[7])),
                  vmulq_n_f64(pz, R[8])),
        vdupq_n_f64(t[2]));
    vst1q_f64(ox + i, a);
    vst1q_f64(oy + i, b);
    vst1q_f64(oz + i, c);
  }
  for (; i < n; ++i) {
    double px = x[i], py = y[i], pz = z[i];
    ox[i] = ((R[0] * px + R[1] * py) + R[2] * pz) + t[0];
    oy[i] = ((R[3] * px + R[4] * py) + R[5] * pz) + t[1];
    oz[i] = ((R[6] * px + R[7] * py) + R[8] * pz) + t[2];
  }
}

double max_radial_sq_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t px = vld1q_f64(x + i);
    float64x2_t py = vld1q_f64(y + i);
    acc = vmaxq_f64(acc, vaddq_f64(vmulq_f64(px, px), vmulq_f64(py, py)));
  }
  double m = vgetq_lane_f64(acc, 0);
  double m1 = vgetq_lane_f64(acc, 1);
  if (m1 > m) m = m1;
  for (; i < n; ++i) {
    double r2 = x[i] * x[i] + y[i] * y[i];
    if (r2 > m) m = r2;
  }
  return m;
}

void minmax_neon(const double* z, std::size_t n, double* lo, double* hi) {
  std::size_t i = 0;
  double a = z[0], b = z[0];
  if (n >= 2) {
    float64x2_t vlo = vld1q_f64(z);
    float64x2_t vhi = vlo;
    for (i = 2; i + 2 <= n; i += 2) {
      float64x2_t v = vld1q_f64(z + i);
      vlo = vminq_f64(vlo, v);
      vhi = vmaxq_f64(vhi, v);
    }
    a = vgetq_lane_f64(vlo, 0);
    double a1 = vgetq_lane_f64(vlo, 1);
    if (a1 < a) a = a1;
    b = vgetq_lane_f64(vhi, 0);
    double b1 = vgetq_lane_f64(vhi, 1);
    if (b1 > b) b = b1;
  }
  for (; i < n; ++i) {
    if (z[i] < a) a = z[i];
    if (z[i] > b) b = z[i];
  }
  *lo = a;
  *hi = b;
}

void binned_max_radial_sq_neon(const double* x, const double* y, const double* z,
                               std::size_t n, double z0, double dz, double* bins,
                               std::size_t nbins) {
  std::size_t i = 0;
  double r2s[2], fs[2];
  for (; i + 2 <= n; i += 2) {
    float64x2_t px = vld1q_f64(x + i);
    float64x2_t py = vld1q_f64(y + i);
    float64x2_t pz = vld1q_f64(z + i);
    vst1q_f64(r2s, vaddq_f64(vmulq_f64(px, px), vmulq_f64(py, py)));
    vst1q_f64(fs, vdivq_f64(vsubq_f64(pz, vdupq_n_f64(z0)), vdupq_n_f64(dz)));
    for (int k = 0; k < 2; ++k) {
      std::size_t b = fs[k] <= 0.0 ? 0 : static_cast<std::size_t>(fs[k]);
      if (b >= nbins) b = nbins - 1;
      if (r2s[k] > bins[b]) bins[b] = r2s[k];
    }
  }
  for (; i < n; ++i) {
    double f = (z[i] - z0) / dz;
    std::size_t b = f <= 0.0 ? 0 : static_cast<std::size_t>(f);
    if (b >= nbins) b = nbins - 1;
    double r2 = x[i] * x[i] + y[i] * y[i];
    if (r2 > bins[b]) bins[b] = r2;
  }
}

}  // namespace

const Kernels& neon_kernels() {
  static const Kernels k{"neon", transform_points_neon, max_radial_sq_neon, minmax_neon,
                         binned_max_radial_sq_neon};
  return k;
}

}  // namespace softarm::simd

#endif  // aarch64 / ARM_NEON
