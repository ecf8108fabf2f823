#pragma once

#include <optional>
#include <string>
#include <vector>

#include "softarm/statics.hpp"

namespace softarm::calib {

// One measured operating point. Absent targets contribute no residual.
struct Observation {
  std::string material;
  double payload = 0.0;         // g
  double pull = 45.0;           // mm
  std::optional<double> ccfit_angle;            // rad
  std::optional<double> vertical_displacement;  // mm
  std::optional<double> tension;                // N
  double segment_length = 120.0;                // mm
};

struct CalibrationSetup {
  statics::SegmentSpec segment;  // geometry; material is replaced per trial
  statics::LoadCase load;        // gravity settings; payload comes per observation
  statics::SolverSettings solver;
  int ccfit_markers = 5;
  double ccfit_span = 0.0;  // mm over the distal end; <= 0 means full length
};

struct Prediction {
  double ccfit_angle = 0.0;
  double vertical_displacement = 0.0;
  double tension = 0.0;  // offset included
};

struct CalibrationResult {
  statics::MaterialParams fitted;
  std::vector<double> residuals;  // normalized, observation-major
  double residual_norm = 0.0;     // sqrt(mean(residual^2))
  int iterations = 0;
  std::vector<Prediction> predictions;
};

// Levenberg-Marquardt fit of (EI, EA, tension offset) against the
// observations; every residual evaluation runs solve_equilibrium.
CalibrationResult fit_material(const std::vector<Observation>& observations,
                               const CalibrationSetup& setup,
                               const statics::MaterialParams& initial);

// Invert r_max = length * (1 - cos(theta)) / theta for theta on the strictly
// increasing branch (0, ~2.331] via bisection.
double fit_theta_max(double r_max, double length);

// One CSV row per observation: targets, predictions and relative errors.
std::string residual_report_csv(const CalibrationResult& result,
                                const std::vector<Observation>& observations);

// CSV exchange format:
// material,payload_g,pull_mm,angle_deg,z_mm,tension_n,length_mm[,note]
std::vector<Observation> parse_observations_csv(std::istream& in);

}  // namespace softarm::calib
