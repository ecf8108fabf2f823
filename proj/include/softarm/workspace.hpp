#pragma once

#include <cstdint>
#include <vector>

#include "softarm/cc_kinematics.hpp"
#include "softarm/geometry.hpp"

namespace softarm::ws {

// Grid sweep of the actuation space in arc-parameter form. theta is sampled
// uniformly on [0, theta_max] (a single sample sits at 0), phi on [0, 2*pi).
struct SweepConfig {
  struct Segment {
    double length = 100.0;     // mm
    double theta_max = 1.0;    // rad, in (0, pi]
    int theta_steps = 12;
    int phi_steps = 16;
  };
  std::vector<Segment> segments;
  std::uint64_t sample_cap = 1'000'000;  // strided down to this many samples
  int threads = 0;                       // 0 = auto

  static constexpr std::uint64_t kSampleBudget = 10'000'000;

  void validate() const;
  std::uint64_t total_samples() const;
};

// Tip positions, base frame (z along the undeflected arm axis).
using PointCloud = std::vector<Vec3>;

struct WorkspaceMetrics {
  double r_max = 0.0;        // mm
  double planar_area = 0.0;  // mm^2, pi * r_max^2
  double volume = 0.0;       // mm^3
  double z_min = 0.0;
  double z_max = 0.0;
};

// One tip point per grid sample (product across segments), canonically sorted
// lexicographically by (x, y, z) so any evaluation schedule yields the same
// cloud. When the full grid exceeds sample_cap the index space is traversed
// with a stride coprime to the grid size, which keeps coverage spread across
// every segment's axes.
PointCloud sweep_workspace(const SweepConfig& config);

double max_radial_reach(const PointCloud& cloud);
double planar_area(double r_max);
double workspace_volume(const PointCloud& cloud, double bin_height);

WorkspaceMetrics compute_metrics(const PointCloud& cloud, double bin_height);

struct ScalingRow {
  double area_ratio = 1.0;
  double volume_ratio = 1.0;
};

// Ratios of area and volume relative to the first (baseline) entry.
std::vector<ScalingRow> scaling_report(const std::vector<WorkspaceMetrics>& metrics);

}  // namespace softarm::ws
