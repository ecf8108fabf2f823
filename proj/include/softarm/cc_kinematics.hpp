#pragma once

#include <vector>

#include "softarm/geometry.hpp"

namespace softarm::cc {

// One constant-curvature arc. Curvature is kept non-negative; the bending
// direction lives entirely in the plane angle phi.
struct ArcParams {
  double kappa = 0.0;   // 1/mm, >= 0
  double phi = 0.0;     // rad, in [0, 2*pi)
  double length = 0.0;  // mm, > 0

  // Throws InvalidArgument / GeometryViolation on violated invariants.
  void validate() const;
};

// Angular positions of the tendon channels around the backbone.
struct TendonLayout {
  double pitch_radius = 6.0;   // mm, distance channel <-> backbone axis
  std::vector<double> angles;  // rad, one entry per tendon

  static TendonLayout symmetric(int count = 3, double pitch_radius = 6.0);
  int count() const { return static_cast<int>(angles.size()); }
  void validate() const;
};

// Per-segment tendon pull displacements (mm). Slack convention: a zero entry
// means the tendon is released and imposes no constraint.
struct ActuationCommand {
  std::vector<std::vector<double>> pulls;  // [segment][tendon]

  // Rejects negative pulls, pulls beyond delta_max, more than two engaged
  // tendons in one segment and antagonistic (opposed) pairs.
  void validate(const TendonLayout& layout, double delta_max) const;
};

// Base-to-tip transform of a single arc. The base tangent is +z; the arc
// bends toward the direction (cos phi, sin phi, 0).
RigidTransform arc_transform(const ArcParams& arc);

// n points equally spaced in arc length, first at the origin, last at the
// arc_transform translation.
std::vector<Vec3> arc_points(const ArcParams& arc, int n);

// Serial composition, base to tip.
RigidTransform compose_chain(const std::vector<ArcParams>& arcs);

// Channel path length per tendon: l_i = l * (1 - kappa * d * cos(phi - psi_i)).
std::vector<double> tendon_lengths(const ArcParams& arc, const TendonLayout& layout);

// Inverse of tendon_lengths from pull displacements delta_i = l - l_i.
// Entries equal to zero are treated as slack (unconstrained); nonzero entries
// (any sign) are fitted exactly, and an inconsistent over-determined set
// throws NoSolution.
ArcParams arc_from_pulls(const std::vector<double>& pulls, const TendonLayout& layout,
                         double length);

}  // namespace softarm::cc
