#include "softarm/cc_kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "softarm/errors.hpp"

namespace softarm::cc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Mat3 rot_z(double a) {
  double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

Mat3 rot_y(double a) {
  double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

}  // namespace

void ArcParams::validate() const {
  if (!(length > 0.0)) throw InvalidArgument("arc length must be positive");
  if (kappa < 0.0) throw InvalidArgument("curvature must be non-negative");
  if (phi < 0.0 || phi >= kTwoPi)
    throw InvalidArgument("phi must be normalized to [0, 2*pi)");
  if (kappa * length >= kTwoPi)
    throw GeometryViolation("kappa * length >= 2*pi: arc closes on itself");
}

TendonLayout TendonLayout::symmetric(int count, double pitch_radius) {
  TendonLayout layout;
  layout.pitch_radius = pitch_radius;
  layout.angles.resize(count);
  for (int i = 0; i < count; ++i) layout.angles[i] = kTwoPi * i / count;
  return layout;
}

void TendonLayout::validate() const {
  if (!(pitch_radius > 0.0)) throw InvalidArgument("pitch radius must be positive");
  if (angles.empty()) throw InvalidArgument("layout needs at least one tendon");
  for (std::size_t i = 0; i < angles.size(); ++i)
    for (std::size_t j = i + 1; j < angles.size(); ++j) {
      double diff = wrap_2pi(angles[i] - angles[j]);
      if (std::min(diff, kTwoPi - diff) < 1e-9)
        throw InvalidArgument("tendon angles must be distinct modulo 2*pi");
    }
}

void ActuationCommand::validate(const TendonLayout& layout, double delta_max) const {
  for (std::size_t s = 0; s < pulls.size(); ++s) {
    const auto& seg = pulls[s];
    if (static_cast<int>(seg.size()) != layout.count())
      throw InvalidArgument("segment " + std::to_string(s + 1) +
                            ": pull count does not match tendon layout");
    int engaged = 0;
    for (double d : seg) {
      if (d < 0.0)
        throw InvalidArgument("segment " + std::to_string(s + 1) + ": negative pull");
      if (d > delta_max)
        throw InvalidArgument("segment " + std::to_string(s + 1) +
                              ": pull exceeds delta_max");
      if (d > 0.0) ++engaged;
    }
    if (engaged > 2)
      throw InvalidArgument("segment " + std::to_string(s + 1) +
                            ": at most two tendons may be engaged");
    for (std::size_t i = 0; i < seg.size(); ++i)
      for (std::size_t j = i + 1; j < seg.size(); ++j) {
        if (seg[i] > 0.0 && seg[j] > 0.0) {
          double diff = wrap_2pi(layout.angles[i] - layout.angles[j]);
          if (std::abs(diff - std::numbers::pi) < 1e-9)
            throw InvalidArgument("segment " + std::to_string(s + 1) +
                                  ": antagonistic tendon pair engaged");
        }
      }
  }
}

RigidTransform arc_transform(const ArcParams& arc) {
  arc.validate();
  double u = arc.kappa * arc.length;
  // In-plane tip offset: x = (1-cos u)/kappa, z = sin(u)/kappa.
  double x = arc.length * versc(u);
  double z = arc.length * sinc(u);
  Mat3 rz = rot_z(arc.phi);
  RigidTransform t;
  t.rotation = rz * rot_y(u) * rz.transpose();
  t.translation = rz * Vec3(x, 0.0, z);
  return t;
}

std::vector<Vec3> arc_points(const ArcParams& arc, int n) {
  arc.validate();
  if (n < 2) throw InvalidArgument("arc_points requires n >= 2");
  std::vector<Vec3> pts;
  pts.reserve(n);
  Mat3 rz = rot_z(arc.phi);
  for (int i = 0; i < n; ++i) {
    double s = arc.length * static_cast<double>(i) / (n - 1);
    double u = arc.kappa * s;
    pts.push_back(rz * Vec3(s * versc(u), 0.0, s * sinc(u)));
  }
  return pts;
}

RigidTransform compose_chain(const std::vector<ArcParams>& arcs) {
  if (arcs.empty()) throw InvalidArgument("compose_chain: empty chain");
  RigidTransform acc;
  for (const auto& arc : arcs) acc = acc * arc_transform(arc);
  return acc;
}

std::vector<double> tendon_lengths(const ArcParams& arc, const TendonLayout& layout) {
  arc.validate();
  layout.validate();
  if (arc.kappa * layout.pitch_radius >= 1.0)
    throw GeometryViolation("kappa * pitch_radius >= 1: channel crosses the bend center");
  std::vector<double> out(layout.angles.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = arc.length *
             (1.0 - arc.kappa * layout.pitch_radius * std::cos(arc.phi - layout.angles[i]));
  return out;
}

ArcParams arc_from_pulls(const std::vector<double>& pulls, const TendonLayout& layout,
                         double length) {
  layout.validate();
  if (!(length > 0.0)) throw InvalidArgument("arc_from_pulls: length must be positive");
  if (pulls.size() != layout.angles.size())
    throw InvalidArgument("arc_from_pulls: pull count does not match layout");

  // delta_i = l*kappa*d*cos(phi - psi_i) = a*cos(psi_i) + b*sin(psi_i) with
  // a = l*kappa*d*cos(phi), b = l*kappa*d*sin(phi). Zero pulls are slack and
  // impose no equation.
  double s_cc = 0, s_cs = 0, s_ss = 0, r_c = 0, r_s = 0;
  int engaged = 0;
  for (std::size_t i = 0; i < pulls.size(); ++i) {
    if (pulls[i] == 0.0) continue;
    ++engaged;
    double c = std::cos(layout.angles[i]), s = std::sin(layout.angles[i]);
    s_cc += c * c;
    s_cs += c * s;
    s_ss += s * s;
    r_c += pulls[i] * c;
    r_s += pulls[i] * s;
  }
  ArcParams arc{0.0, 0.0, length};
  if (engaged == 0) return arc;

  double a, b;
  if (engaged == 1) {
    // Exactly determined along the engaged tendon's direction.
    for (std::size_t i = 0; i < pulls.size(); ++i) {
      if (pulls[i] == 0.0) continue;
      a = pulls[i] * std::cos(layout.angles[i]);
      b = pulls[i] * std::sin(layout.angles[i]);
    }
    // (a, b) above is delta * direction; magnitude is delta itself.
  } else {
    double det = s_cc * s_ss - s_cs * s_cs;
    if (std::abs(det) < 1e-12)
      throw NoSolution("arc_from_pulls: engaged tendons are collinear");
    a = (s_ss * r_c - s_cs * r_s) / det;
    b = (s_cc * r_s - s_cs * r_c) / det;
    for (std::size_t i = 0; i < pulls.size(); ++i) {
      if (pulls[i] == 0.0) continue;
      double fit = a * std::cos(layout.angles[i]) + b * std::sin(layout.angles[i]);
      if (std::abs(fit - pulls[i]) > 1e-9)
        throw NoSolution("arc_from_pulls: inconsistent pull set (no arc fits)");
    }
  }

  double mag = std::hypot(a, b);
  if (mag == 0.0) return arc;
  arc.kappa = mag / (length * layout.pitch_radius);
  arc.phi = wrap_2pi(std::atan2(b, a));
  if (arc.kappa * layout.pitch_radius >= 1.0)
    throw GeometryViolation("arc_from_pulls: pulls imply kappa * pitch_radius >= 1");
  if (arc.kappa * length >= kTwoPi)
    throw GeometryViolation("arc_from_pulls: pulls imply a self-intersecting arc");
  return arc;
}

}  // namespace softarm::cc
