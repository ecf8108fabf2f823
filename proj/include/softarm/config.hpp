#pragma once

#include <map>
#include <string>
#include <vector>

#include "softarm/mocap.hpp"
#include "softarm/statics.hpp"
#include "softarm/workspace.hpp"

namespace softarm::config {

// Whole-project configuration, loaded from one strict JSON document
// (unknown keys anywhere are rejected).
struct ProjectConfig {
  std::map<std::string, statics::MaterialParams> materials;
  std::vector<statics::SegmentSpec> segments;

  statics::SolverSettings solver;
  statics::LoadCase gravity;

  struct Sweep {
    int theta_steps = 12;
    int phi_steps = 16;
    double theta_max = 0.0;   // rad; 0 means derive from delta_max / pitch_radius
    double delta_max = 0.0;   // mm, alternative to theta_max
    std::uint64_t sample_cap = 1'000'000;
    double bin_height = 5.0;  // mm
  } sweep;

  struct Ccfit {
    int marker_count = 5;
    double span = 0.0;  // mm; <= 0 means the full member length
  } ccfit;

  mocap::FrameAlignment mocap_frame;

  double delta_max = 80.0;  // mm, command validation bound

  // Resolved per-segment theta_max for sweeps.
  double sweep_theta_max() const;

  ws::SweepConfig sweep_config(int n_segments) const;
  const statics::MaterialParams& material(const std::string& name) const;
};

// Built-in defaults, including the calibrated material library.
ProjectConfig default_config();

ProjectConfig load_config(const std::string& path);
ProjectConfig parse_config(const std::string& json_text);
std::string to_json(const ProjectConfig& cfg);

}  // namespace softarm::config
