// AVX2 kernels. Multiply/add only (no FMA) in the exact association order of
// the scalar reference, so results are bit-identical lane by lane.

#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__)

#include <immintrin.h>

#include <cstddef>

#include "softarm/simd/kernels.hpp"

namespace softarm::simd {
namespace {

void transform_points_avx2(const double R[9], const double t[3], const double* x,
                           const double* y, const double* z, double* ox, double* oy,
                           double* oz, std::size_t n) {
  const __m256d r0 = _mm256_set1_pd(R[0]), r1 = _mm256_set1_pd(R[1]),
                r2 = _mm256_set1_pd(R[2]), r3 = _mm256_set1_pd(R[3]),
                r4 = _mm256_set1_pd(R[4]), r5 = _mm256_set1_pd(R[5]),
                r6 = _mm256_set1_pd(R[6]), r7 = _mm256_set1_pd(R[7]),
                r8 = _mm256_set1_pd(R[8]);
  const __m256d t0 = _mm256_set1_pd(t[0]), t1 = _mm256_set1_pd(t[1]),
                t2 = _mm256_set1_pd(t[2]);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d px = _mm256_loadu_pd(x + i);
    __m256d py = _mm256_loadu_pd(y + i);
    __m256d pz = _mm256_loadu_pd(z + i);
    __m256d a = _mm256_add_pd(
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(r0, px), _mm256_mul_pd(r1, py)),
                      _mm256_mul_pd(r2, pz)),
        t0);
    __m256d b = _mm256_add_pd(
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(r3, px), _mm256_mul_pd(r4, py)),
                      _mm256_mul_pd(r5, pz)),
        t1);
    __m256d c = _mm256_add_pd(
        _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(r6, px), _mm256_mul_pd(r7, py)),
                      _mm256_mul_pd(r8, pz)),
        t2);
    _mm256_storeu_pd(ox + i, a);
    _mm256_storeu_pd(oy + i, b);
    _mm256_storeu_pd(oz + i, c);
  }
  for (; i < n; ++i) {
    double px = x[i], py = y[i], pz = z[i];
    ox[i] = ((R[0] * px + R[1] * py) + R[2] * pz) + t[0];
    oy[i] = ((R[3] * px + R[4] * py) + R[5] * pz) + t[1];
    oz[i] = ((R[6] * px + R[7] * py) + R[8] * pz) + t[2];
  }
}

double max_radial_sq_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d px = _mm256_loadu_pd(x + i);
    __m256d py = _mm256_loadu_pd(y + i);
    __m256d r2 = _mm256_add_pd(_mm256_mul_pd(px, px), _mm256_mul_pd(py, py));
    acc = _mm256_max_pd(acc, r2);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double m = lanes[0];
  if (lanes[1] > m) m = lanes[1];
  if (lanes[2] > m) m = lanes[2];
  if (lanes[3] > m) m = lanes[3];
  for (; i < n; ++i) {
    double r2 = x[i] * x[i] + y[i] * y[i];
    if (r2 > m) m = r2;
  }
  return m;
}

void minmax_avx2(const double* z, std::size_t n, double* lo, double* hi) {
  std::size_t i = 0;
  double a = z[0], b = z[0];
  if (n >= 4) {
    __m256d vlo = _mm256_loadu_pd(z);
    __m256d vhi = vlo;
    for (i = 4; i + 4 <= n; i += 4) {
      __m256d v = _mm256_loadu_pd(z + i);
      vlo = _mm256_min_pd(vlo, v);
      vhi = _mm256_max_pd(vhi, v);
    }
    alignas(32) double ls[4], hs[4];
    _mm256_store_pd(ls, vlo);
    _mm256_store_pd(hs, vhi);
    a = ls[0];
    b = hs[0];
    for (int k = 1; k < 4; ++k) {
      if (ls[k] < a) a = ls[k];
      if (hs[k] > b) b = hs[k];
    }
  }
  for (; i < n; ++i) {
    if (z[i] < a) a = z[i];
    if (z[i] > b) b = z[i];
  }
  *lo = a;
  *hi = b;
}

void binned_max_radial_sq_avx2(const double* x, const double* y, const double* z,
                               std::size_t n, double z0, double dz, double* bins,
                               std::size_t nbins) {
  const __m256d vz0 = _mm256_set1_pd(z0);
  const __m256d vdz = _mm256_set1_pd(dz);
  std::size_t i = 0;
  alignas(32) double r2s[4], fs[4];
  for (; i + 4 <= n; i += 4) {
    __m256d px = _mm256_loadu_pd(x + i);
    __m256d py = _mm256_loadu_pd(y + i);
    __m256d pz = _mm256_loadu_pd(z + i);
    _mm256_store_pd(r2s, _mm256_add_pd(_mm256_mul_pd(px, px), _mm256_mul_pd(py, py)));
    _mm256_store_pd(fs, _mm256_div_pd(_mm256_sub_pd(pz, vz0), vdz));
    for (int k = 0; k < 4; ++k) {
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

const Kernels& avx2_kernels() {
  static const Kernels k{"avx2", transform_points_avx2, max_radial_sq_avx2, minmax_avx2,
                         binned_max_radial_sq_avx2};
  return k;
}

bool avx2_supported() {
#if defined(__GNUC__) || defined(__clang__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

}  // namespace softarm::simd

#endif  // x86
