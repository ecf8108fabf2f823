#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "softarm/geometry.hpp"
#include "softarm/workspace.hpp"

namespace softarm::mocap {

// Marker trajectories with per-frame gaps allowed.
struct MocapTrajectory {
  struct Frame {
    long index = 0;
    double time_s = 0.0;
    std::map<std::string, Vec3> markers;  // marker id -> position (mm)
  };
  std::vector<Frame> frames;

  std::vector<std::string> marker_ids() const;
};

struct CircleFit {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
  Vec3 normal = Vec3::UnitZ();
  double rms_residual = 0.0;
};

// Arm-axis alignment: transforms mocap coordinates so the arm's central axis
// becomes +z through the origin.
struct FrameAlignment {
  Vec3 origin = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();

  Vec3 apply(const Vec3& p) const;
};

// CSV header: frame,time_s,marker_id,x_mm,y_mm,z_mm ; rows grouped by frame,
// frame indices strictly increasing, times non-decreasing.
MocapTrajectory parse_mocap_csv(std::istream& in);
void write_mocap_csv(std::ostream& out, const MocapTrajectory& traj);

// Centered per-marker, per-axis median filter. Only frames where the full
// window fits inside a contiguous visible run are filtered; everything else
// passes through, so gaps never get bridged.
MocapTrajectory smooth_trajectory(const MocapTrajectory& traj, int window);

// Plane through the centroid (smallest principal direction as normal), then
// an algebraic least-squares circle in that plane, then one Gauss-Newton
// refinement pass of (center, radius). Throws NoSolution for collinear input.
CircleFit fit_circle_3d(const std::vector<Vec3>& points);

struct AngleSample {
  double time_s = 0.0;
  double angle = 0.0;  // rad
};

// Per-frame bend angle from a circle through the tip markers, scaled to the
// full member length: angle = arc_length / fit_radius. Frames with fewer than
// three visible tip markers are skipped; degenerate (straight) frames give 0.
std::vector<AngleSample> bending_angle_series(const MocapTrajectory& traj,
                                              const std::vector<std::string>& tip_markers,
                                              double arc_length);

// One point per frame where the marker is visible, in arm-axis coordinates.
ws::PointCloud tip_cloud(const MocapTrajectory& traj, const std::string& marker,
                         const FrameAlignment& align = {});

}  // namespace softarm::mocap
