#include "softarm/mocap.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>

#include "softarm/errors.hpp"

namespace softarm::mocap {

namespace {

constexpr const char* kHeader = "frame,time_s,marker_id,x_mm,y_mm,z_mm";

double parse_double(const std::string& field, std::size_t line) {
  double v = 0.0;
  const char* b = field.data();
  const char* e = b + field.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e)
    throw ParseError("invalid number '" + field + "'", line);
  return v;
}

long parse_long(const std::string& field, std::size_t line) {
  long v = 0;
  const char* b = field.data();
  const char* e = b + field.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e)
    throw ParseError("invalid integer '" + field + "'", line);
  return v;
}

std::vector<std::string> split_csv(const std::string& row) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = row.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(row.substr(start));
      break;
    }
    out.push_back(row.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string format_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

double median_of(std::vector<double>& scratch) {
  std::size_t mid = scratch.size() / 2;
  std::nth_element(scratch.begin(), scratch.begin() + mid, scratch.end());
  return scratch[mid];
}

Mat3 rotation_to_z(const Vec3& axis) {
  double n = axis.norm();
  if (!(n > 0.0)) throw InvalidArgument("frame alignment: zero axis");
  Vec3 a = axis / n;
  Vec3 z = Vec3::UnitZ();
  double c = a.dot(z);
  if (c > 1.0 - 1e-12) return Mat3::Identity();
  if (c < -1.0 + 1e-12) {
    Mat3 r;
    r << 1, 0, 0, 0, -1, 0, 0, 0, -1;  // pi about x
    return r;
  }
  Vec3 v = a.cross(z);
  Mat3 vx;
  vx << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return Mat3::Identity() + vx + vx * vx * (1.0 / (1.0 + c));
}

}  // namespace

std::vector<std::string> MocapTrajectory::marker_ids() const {
  std::set<std::string> ids;
  for (const auto& f : frames)
    for (const auto& [id, _] : f.markers) ids.insert(id);
  return {ids.begin(), ids.end()};
}

Vec3 FrameAlignment::apply(const Vec3& p) const {
  return rotation_to_z(axis) * (p - origin);
}

MocapTrajectory parse_mocap_csv(std::istream& in) {
  std::string row;
  std::size_t line = 0;
  if (!std::getline(in, row)) throw ParseError("empty file, expected header", 1);
  ++line;
  if (!row.empty() && row.back() == '\r') row.pop_back();
  if (row != kHeader)
    throw ParseError(std::string("expected header '") + kHeader + "'", line);

  MocapTrajectory traj;
  while (std::getline(in, row)) {
    ++line;
    if (!row.empty() && row.back() == '\r') row.pop_back();
    if (row.empty()) continue;
    auto fields = split_csv(row);
    if (fields.size() != 6)
      throw ParseError("expected 6 fields, got " + std::to_string(fields.size()), line);
    long frame = parse_long(fields[0], line);
    double time = parse_double(fields[1], line);
    const std::string& marker = fields[2];
    if (marker.empty()) throw ParseError("empty marker id", line);
    Vec3 p(parse_double(fields[3], line), parse_double(fields[4], line),
           parse_double(fields[5], line));
    if (!p.allFinite()) throw ParseError("non-finite coordinate", line);

    if (traj.frames.empty() || traj.frames.back().index != frame) {
      if (!traj.frames.empty()) {
        if (frame <= traj.frames.back().index)
          throw ParseError("frame indices must be strictly increasing", line);
        if (time < traj.frames.back().time_s)
          throw ParseError("times must be non-decreasing", line);
      }
      traj.frames.push_back({frame, time, {}});
    } else if (time != traj.frames.back().time_s) {
      throw ParseError("conflicting times within one frame", line);
    }
    auto [_, inserted] = traj.frames.back().markers.emplace(marker, p);
    if (!inserted)
      throw ParseError("duplicate marker '" + marker + "' in frame " +
                           std::to_string(frame),
                       line);
  }
  return traj;
}

void write_mocap_csv(std::ostream& out, const MocapTrajectory& traj) {
  out << kHeader << "\n";
  for (const auto& f : traj.frames)
    for (const auto& [id, p] : f.markers)
      out << f.index << ',' << format_g9(f.time_s) << ',' << id << ','
          << format_g9(p.x()) << ',' << format_g9(p.y()) << ',' << format_g9(p.z())
          << "\n";
}

MocapTrajectory smooth_trajectory(const MocapTrajectory& traj, int window) {
  if (window < 1 || window % 2 == 0)
    throw InvalidArgument("smooth_trajectory: window must be odd and >= 1");
  if (window == 1) return traj;
  MocapTrajectory out = traj;
  const int half = window / 2;
  const std::size_t n = traj.frames.size();

  for (const auto& id : traj.marker_ids()) {
    std::size_t run_start = 0;
    while (run_start < n) {
      if (!traj.frames[run_start].markers.count(id)) {
        ++run_start;
        continue;
      }
      std::size_t run_end = run_start;
      while (run_end + 1 < n && traj.frames[run_end + 1].markers.count(id)) ++run_end;
      const std::size_t len = run_end - run_start + 1;
      if (len >= static_cast<std::size_t>(window)) {
        std::vector<double> scratch(window);
        for (std::size_t i = run_start + half; i + half <= run_end; ++i) {
          Vec3 filtered;
          for (int axis = 0; axis < 3; ++axis) {
            for (int w = -half; w <= half; ++w)
              scratch[w + half] = traj.frames[i + w].markers.at(id)[axis];
            filtered[axis] = median_of(scratch);
          }
          out.frames[i].markers.at(id) = filtered;
        }
      }
      run_start = run_end + 1;
    }
  }
  return out;
}

CircleFit fit_circle_3d(const std::vector<Vec3>& points) {
  const std::size_t n = points.size();
  if (n < 3) throw InvalidArgument("fit_circle_3d: need at least 3 points");

  Vec3 centroid = Vec3::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(n);

  Mat3 cov = Mat3::Zero();
  for (const auto& p : points) {
    Vec3 d = p - centroid;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  const Vec3 evals = eig.eigenvalues();  // ascending
  if (!(evals[2] > 0.0))
    throw NoSolution("fit_circle_3d: all points coincide");
  if (evals[1] <= 1e-12 * evals[2])
    throw NoSolution("fit_circle_3d: points are collinear");

  Vec3 normal = eig.eigenvectors().col(0);
  Vec3 u = eig.eigenvectors().col(2);
  Vec3 v = normal.cross(u);

  // Algebraic (Kasa) fit: xi^2 + eta^2 + D*xi + E*eta + F ~ 0.
  Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
  Eigen::Vector3d atb = Eigen::Vector3d::Zero();
  std::vector<Eigen::Vector2d> q(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 d = points[i] - centroid;
    q[i] = {d.dot(u), d.dot(v)};
    Eigen::Vector3d row(q[i].x(), q[i].y(), 1.0);
    double rhs = -(q[i].squaredNorm());
    ata += row * row.transpose();
    atb += row * rhs;
  }
  Eigen::Vector3d def = ata.ldlt().solve(atb);
  Eigen::Vector2d c2(-def[0] / 2.0, -def[1] / 2.0);
  double r2 = c2.squaredNorm() - def[2];
  if (!(r2 > 0.0)) throw NoSolution("fit_circle_3d: degenerate algebraic fit");
  double radius = std::sqrt(r2);

  // One Gauss-Newton pass on the geometric residuals |q - c| - r.
  Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
  Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Vector2d d = q[i] - c2;
    double dist = d.norm();
    if (dist < 1e-12) continue;
    Eigen::Vector3d row(-d.x() / dist, -d.y() / dist, -1.0);
    jtj += row * row.transpose();
    jtr += row * (dist - radius);
  }
  Eigen::Vector3d step = jtj.ldlt().solve(-jtr);
  if (step.allFinite()) {
    c2 += step.head<2>();
    radius += step[2];
  }
  if (!(radius > 0.0)) throw NoSolution("fit_circle_3d: non-positive radius");

  CircleFit fit;
  fit.center = centroid + c2.x() * u + c2.y() * v;
  fit.normal = normal;
  if (fit.normal.z() < 0.0 ||
      (fit.normal.z() == 0.0 &&
       (fit.normal.y() < 0.0 || (fit.normal.y() == 0.0 && fit.normal.x() < 0.0))))
    fit.normal = -fit.normal;
  fit.radius = radius;

  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 d = points[i] - fit.center;
    double w = d.dot(fit.normal);
    Vec3 in_plane = d - w * fit.normal;
    double e = in_plane.norm() - radius;
    ss += e * e + w * w;
  }
  fit.rms_residual = std::sqrt(ss / static_cast<double>(n));
  return fit;
}

std::vector<AngleSample> bending_angle_series(const MocapTrajectory& traj,
                                              const std::vector<std::string>& tip_markers,
                                              double arc_length) {
  if (!(arc_length > 0.0))
    throw InvalidArgument("bending_angle_series: arc_length must be positive");
  std::vector<AngleSample> series;
  for (const auto& f : traj.frames) {
    std::vector<Vec3> pts;
    for (const auto& id : tip_markers) {
      auto it = f.markers.find(id);
      if (it != f.markers.end()) pts.push_back(it->second);
    }
    if (pts.size() < 3) continue;
    double angle = 0.0;
    try {
      angle = arc_length / fit_circle_3d(pts).radius;
    } catch (const NoSolution&) {
      angle = 0.0;  // straight
    }
    series.push_back({f.time_s, angle});
  }
  if (series.empty())
    throw InvalidArgument("bending_angle_series: no frame has 3+ tip markers");
  return series;
}

ws::PointCloud tip_cloud(const MocapTrajectory& traj, const std::string& marker,
                         const FrameAlignment& align) {
  ws::PointCloud cloud;
  for (const auto& f : traj.frames) {
    auto it = f.markers.find(marker);
    if (it != f.markers.end()) cloud.push_back(align.apply(it->second));
  }
  if (cloud.empty())
    throw InvalidArgument("tip_cloud: marker '" + marker + "' never appears");
  return cloud;
}

}  // namespace softarm::mocap
