// Reference kernels. Plain loops, one element at a time; the SIMD backends
// must match these bit for bit.

#include <cstddef>

#include "softarm/simd/kernels.hpp"

namespace softarm::simd {
namespace {

void transform_points_scalar(const double R[9], const double t[3], const double* x,
                             const double* y, const double* z, double* ox, double* oy,
                             double* oz, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double px = x[i], py = y[i], pz = z[i];
    ox[i] = ((R[0] * px + R[1] * py) + R[2] * pz) + t[0];
    oy[i] = ((R[3] * px + R[4] * py) + R[5] * pz) + t[1];
    oz[i] = ((R[6] * px + R[7] * py) + R[8] * pz) + t[2];
  }
}

double max_radial_sq_scalar(const double* x, const double* y, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r2 = x[i] * x[i] + y[i] * y[i];
    if (r2 > m) m = r2;
  }
  return m;
}

void minmax_scalar(const double* z, std::size_t n, double* lo, double* hi) {
  double a = z[0], b = z[0];
  for (std::size_t i = 1; i < n; ++i) {
    if (z[i] < a) a = z[i];
    if (z[i] > b) b = z[i];
  }
  *lo = a;
  *hi = b;
}

void binned_max_radial_sq_scalar(const double* x, const double* y, const double* z,
                                 std::size_t n, double z0, double dz, double* bins,
                                 std::size_t nbins) {
  for (std::size_t i = 0; i < n; ++i) {
    double f = (z[i] - z0) / dz;
    std::size_t b = f <= 0.0 ? 0 : static_cast<std::size_t>(f);
    if (b >= nbins) b = nbins - 1;
    double r2 = x[i] * x[i] + y[i] * y[i];
    if (r2 > bins[b]) bins[b] = r2;
  }
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k{"scalar", transform_points_scalar, max_radial_sq_scalar,
                         minmax_scalar, binned_max_radial_sq_scalar};
  return k;
}

}  // namespace softarm::simd
