#pragma once

#include <string>
#include <vector>

#include "softarm/cc_kinematics.hpp"
#include "softarm/geometry.hpp"

namespace softarm::statics {

struct MaterialParams {
  std::string name;
  double bending_stiffness = 500.0;  // EI, N*mm^2
  double axial_stiffness = 50.0;     // EA, N
  double linear_density = 0.2;       // g/mm
  double tension_offset = 0.0;       // N, added to reported tensions

  void validate() const;
};

struct SegmentSpec {
  double length = 120.0;  // mm
  cc::TendonLayout layout = cc::TendonLayout::symmetric();
  MaterialParams material;
  double end_cap_mass = 5.0;  // g, lumped at the distal end of the segment

  void validate() const;
};

struct LoadCase {
  double payload_mass = 0.0;          // g, at the distal tip of the chain
  double gravity_magnitude = 9806.65;  // mm/s^2
  bool gravity_enabled = true;

  // N per gram of mass.
  double weight_per_gram() const {
    return gravity_enabled ? gravity_magnitude * 1e-6 : 0.0;
  }
};

// Discretized planar shape: per sub-arc signed curvature and axial strain.
// Bending lives in the x-z plane; the arm hangs along -z from the mount and
// positive curvature raises the tip toward +x.
struct RodState {
  std::vector<double> kappa;  // 1/mm, one per sub-arc, signed
  std::vector<double> eps;    // axial strain, one per sub-arc
  int subdivisions = 0;       // per segment

  std::size_t size() const { return kappa.size(); }
};

struct SolverSettings {
  int subdivisions = 20;          // sub-arcs per segment
  double inner_tolerance = 1e-8;  // sup-norm of the augmented gradient
  double constraint_tolerance = 1e-6;  // mm
  int max_outer_iterations = 50;
  int max_inner_iterations = 4000;
  double initial_penalty = 10.0;  // N/mm
};

struct EquilibriumResult {
  double tip_angle = 0.0;    // rad, tangent rotation at the distal tip
  double ccfit_angle = 0.0;  // rad, circle fit over the tip marker span
  double vertical_displacement = 0.0;  // mm, tip rise vs the hanging pose
  std::vector<double> tendon_tensions;  // N, one per actuated tendon (order of
                                        // engaged tendons, proximal first)
  RodState state;
  double nonuniformity = 0.0;  // stddev(kappa) / mean(|kappa|)
  double gradient_norm = 0.0;  // sup-norm of the Lagrangian gradient
  double energy = 0.0;         // N*mm
};

// Elastic + gravitational potential of a discretized planar state.
double total_energy(const RodState& state, const std::vector<SegmentSpec>& chain,
                    const LoadCase& load);

// Analytic gradient with respect to (kappa..., eps...), matching the layout
// of pack_state(): all curvatures first, then all strains.
std::vector<double> energy_gradient(const RodState& state,
                                    const std::vector<SegmentSpec>& chain,
                                    const LoadCase& load);

// Deformed channel path length of one tendon: routed along the backbone
// centerline of proximal segments and through its own segment's channel.
double tendon_path_length(const RodState& state, const std::vector<SegmentSpec>& chain,
                          int segment, int tendon);

// Positions of the sub-arc end nodes, starting at the mount (origin included).
std::vector<Vec3> node_positions(const RodState& state,
                                 const std::vector<SegmentSpec>& chain);

// Position of the material point at rest arc length s (exact within sub-arcs).
Vec3 position_at(const RodState& state, const std::vector<SegmentSpec>& chain, double s);

// Circle-fit bend angle: marker_count virtual markers over the distal
// span_mm of segment `through_segment` (default: last), extrapolated over the
// cumulative length up to that segment's end.
double ccfit_angle_from_state(const RodState& state, const std::vector<SegmentSpec>& chain,
                              int marker_count = 5, double span_mm = 20.0,
                              int through_segment = -1);

// Constrained energy minimization under tendon displacement control.
// Engaged tendons (pull > 0) enforce path = rest_path - pull while taut, with
// tension as the KKT multiplier; tendons that would push go slack (T = 0).
EquilibriumResult solve_equilibrium(const std::vector<SegmentSpec>& chain,
                                    const cc::ActuationCommand& command,
                                    const LoadCase& load,
                                    const SolverSettings& settings = {},
                                    double delta_max = 80.0);

}  // namespace softarm::statics
