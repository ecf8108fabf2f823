#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

namespace softarm {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Proper rigid transform: p_base = rotation * p_local + translation.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  RigidTransform operator*(const RigidTransform& rhs) const {
    return {rotation * rhs.rotation, rotation * rhs.translation + translation};
  }
  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  // Orthonormality defect: max of |R^T R - I| entries and |det(R) - 1|.
  double orthonormality_error() const {
    double e = (rotation.transpose() * rotation - Mat3::Identity())
                   .cwiseAbs()
                   .maxCoeff();
    return std::max(e, std::abs(rotation.determinant() - 1.0));
  }
};

inline double wrap_2pi(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double t = a - std::floor(a / two_pi) * two_pi;
  if (t < 0.0) t += two_pi;
  if (t >= two_pi) t -= two_pi;
  return t;
}

// sin(u)/u and (1 - cos(u))/u with series fallbacks near u = 0, plus their
// derivatives. These carry every arc-step evaluation in the library, so the
// small-|u| branch keeps curvature -> 0 continuous to machine precision.
inline double sinc(double u) {
  if (std::abs(u) < 1e-4) {
    double u2 = u * u;
    return 1.0 - u2 / 6.0 + u2 * u2 / 120.0;
  }
  return std::sin(u) / u;
}

inline double versc(double u) {
  if (std::abs(u) < 1e-4) {
    double u2 = u * u;
    return u * (0.5 - u2 / 24.0 + u2 * u2 / 720.0);
  }
  return (1.0 - std::cos(u)) / u;
}

inline double dsinc(double u) {
  if (std::abs(u) < 1e-4) {
    double u2 = u * u;
    return u * (-1.0 / 3.0 + u2 / 30.0);
  }
  return (u * std::cos(u) - std::sin(u)) / (u * u);
}

inline double dversc(double u) {
  if (std::abs(u) < 1e-4) {
    double u2 = u * u;
    return 0.5 - u2 / 8.0 + u2 * u2 / 144.0;
  }
  return (u * std::sin(u) - (1.0 - std::cos(u))) / (u * u);
}

}  // namespace softarm
