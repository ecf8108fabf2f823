#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "softarm/statics.hpp"
#include "softarm/workspace.hpp"

namespace softarm::report {

// Point clouds as CSV with the exact header x_mm,y_mm,z_mm.
void write_cloud_csv(std::ostream& out, const ws::PointCloud& cloud);
ws::PointCloud read_cloud_csv(std::istream& in);

// Flat metrics object: r_max_mm, planar_area_mm2, volume_mm3, z_min_mm,
// z_max_mm. Keys in fixed order, numbers at 9 significant digits.
std::string metrics_json(const ws::WorkspaceMetrics& m);

// Equilibrium report (angles in degrees).
std::string equilibrium_json(const statics::EquilibriumResult& eq,
                             const std::vector<double>& segment_ccfit_angles);

// Minimal planar scatter (x-y projection) with an r_max circle.
std::string cloud_svg(const ws::PointCloud& cloud, double r_max);

// Polyline of rod node positions in the bending plane.
void write_shape_csv(std::ostream& out, const std::vector<Vec3>& nodes);

// 9-significant-digit float formatting used for every numeric output.
std::string format_g9(double v);

}  // namespace softarm::report
