#include "softarm/workspace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <thread>

#include "softarm/errors.hpp"
#include "softarm/simd/kernels.hpp"

namespace softarm::ws {

namespace {

constexpr double kPi = std::numbers::pi;

struct SoA {
  std::vector<double> x, y, z;
  explicit SoA(std::size_t n = 0) : x(n), y(n), z(n) {}
  std::size_t size() const { return x.size(); }
};

SoA to_soa(const PointCloud& cloud) {
  SoA s(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    s.x[i] = cloud[i].x();
    s.y[i] = cloud[i].y();
    s.z[i] = cloud[i].z();
  }
  return s;
}

// Per-segment table of arc transforms over the (theta, phi) grid,
// theta-major.
struct SegmentTable {
  std::vector<Mat3> rot;
  SoA tip;
  std::size_t size = 0;
};

SegmentTable build_table(const SweepConfig::Segment& seg) {
  SegmentTable tab;
  tab.size = static_cast<std::size_t>(seg.theta_steps) * seg.phi_steps;
  tab.rot.reserve(tab.size);
  tab.tip = SoA(tab.size);
  std::size_t g = 0;
  for (int ti = 0; ti < seg.theta_steps; ++ti) {
    double theta = seg.theta_steps == 1
                       ? 0.0
                       : seg.theta_max * ti / (seg.theta_steps - 1);
    for (int pi_ = 0; pi_ < seg.phi_steps; ++pi_, ++g) {
      double phi = 2.0 * kPi * pi_ / seg.phi_steps;
      cc::ArcParams arc{theta / seg.length, phi, seg.length};
      RigidTransform t = cc::arc_transform(arc);
      tab.rot.push_back(t.rotation);
      tab.tip.x[g] = t.translation.x();
      tab.tip.y[g] = t.translation.y();
      tab.tip.z[g] = t.translation.z();
    }
  }
  return tab;
}

std::uint64_t pick_stride(std::uint64_t total, std::uint64_t cap) {
  if (total <= cap) return 1;
  std::uint64_t s = (total + cap - 1) / cap;
  while (std::gcd(s, total) != 1) ++s;
  return s;
}

}  // namespace

void SweepConfig::validate() const {
  if (segments.empty()) throw InvalidArgument("sweep: no segments");
  for (const auto& s : segments) {
    if (!(s.length > 0.0)) throw InvalidArgument("sweep: segment length must be positive");
    if (!(s.theta_max > 0.0) || s.theta_max > kPi)
      throw InvalidArgument("sweep: theta_max must lie in (0, pi]");
    if (s.theta_steps < 1 || s.phi_steps < 1)
      throw InvalidArgument("sweep: step counts must be >= 1");
  }
  if (sample_cap < 1) throw InvalidArgument("sweep: sample_cap must be >= 1");
  total_samples();  // throws when over budget
}

std::uint64_t SweepConfig::total_samples() const {
  std::uint64_t total = 1;
  for (const auto& s : segments) {
    total *= static_cast<std::uint64_t>(s.theta_steps) * s.phi_steps;
    if (total > kSampleBudget)
      throw InvalidArgument("sweep: sample budget (10^7) exceeded");
  }
  return total;
}

PointCloud sweep_workspace(const SweepConfig& config) {
  config.validate();
  const auto& kern = simd::active_kernels();
  const std::size_t nseg = config.segments.size();

  std::vector<SegmentTable> tables;
  tables.reserve(nseg);
  for (const auto& s : config.segments) tables.push_back(build_table(s));

  const std::uint64_t total = config.total_samples();
  const std::uint64_t stride = pick_stride(total, config.sample_cap);
  const std::uint64_t count = (total - 1) / stride + 1;
  const std::size_t inner = tables.back().size;

  SoA out(count);

  auto worker = [&](std::uint64_t begin, std::uint64_t end) {
    SoA scratch(inner);
    std::uint64_t i = begin;
    while (i < end) {
      std::uint64_t k = i * stride;
      std::uint64_t prefix_id = k / inner;
      // Run of samples sharing the composed prefix transform.
      std::uint64_t run_end =
          std::min(end, ((prefix_id + 1) * inner - 1) / stride + 1);
      RigidTransform pre;
      std::uint64_t rem = prefix_id;
      for (std::size_t s = nseg - 1; s-- > 0;) {
        std::uint64_t g = rem % tables[s].size;
        rem /= tables[s].size;
        RigidTransform t{tables[s].rot[g],
                         Vec3(tables[s].tip.x[g], tables[s].tip.y[g],
                              tables[s].tip.z[g])};
        pre = t * pre;
      }
      const std::size_t n = static_cast<std::size_t>(run_end - i);
      const auto& tip = tables.back().tip;
      for (std::size_t m = 0; m < n; ++m) {
        std::size_t j = static_cast<std::size_t>((i + m) * stride % inner);
        scratch.x[m] = tip.x[j];
        scratch.y[m] = tip.y[j];
        scratch.z[m] = tip.z[j];
      }
      double r[9];
      Eigen::Map<Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(r) = pre.rotation;
      double tr[3] = {pre.translation.x(), pre.translation.y(), pre.translation.z()};
      kern.transform_points(r, tr, scratch.x.data(), scratch.y.data(), scratch.z.data(),
                            out.x.data() + i, out.y.data() + i, out.z.data() + i, n);
      i = run_end;
    }
  };

  int threads = config.threads;
  if (threads <= 0)
    threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min<int>(threads, 64));
  if (threads == 1 || count < 4096) {
    worker(0, count);
  } else {
    std::vector<std::thread> pool;
    std::uint64_t chunk = (count + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      std::uint64_t b = t * chunk, e = std::min<std::uint64_t>(count, b + chunk);
      if (b >= e) break;
      pool.emplace_back(worker, b, e);
    }
    for (auto& th : pool) th.join();
  }

  PointCloud cloud(count);
  for (std::uint64_t i = 0; i < count; ++i)
    cloud[i] = Vec3(out.x[i], out.y[i], out.z[i]);
  std::sort(cloud.begin(), cloud.end(), [](const Vec3& a, const Vec3& b) {
    if (a.x() != b.x()) return a.x() < b.x();
    if (a.y() != b.y()) return a.y() < b.y();
    return a.z() < b.z();
  });
  return cloud;
}

double max_radial_reach(const PointCloud& cloud) {
  if (cloud.empty()) throw InvalidArgument("max_radial_reach: empty cloud");
  SoA s = to_soa(cloud);
  return std::sqrt(simd::active_kernels().max_radial_sq(s.x.data(), s.y.data(), s.size()));
}

double planar_area(double r_max) {
  if (r_max < 0.0) throw InvalidArgument("planar_area: negative radius");
  return kPi * r_max * r_max;
}

double workspace_volume(const PointCloud& cloud, double bin_height) {
  if (cloud.empty()) throw InvalidArgument("workspace_volume: empty cloud");
  if (!(bin_height > 0.0)) throw InvalidArgument("workspace_volume: bin_height must be positive");
  SoA s = to_soa(cloud);
  const auto& kern = simd::active_kernels();
  double lo, hi;
  kern.minmax(s.z.data(), s.size(), &lo, &hi);
  std::size_t nbins =
      hi > lo ? static_cast<std::size_t>(std::ceil((hi - lo) / bin_height)) : 1;
  std::vector<double> bins(nbins, -1.0);
  kern.binned_max_radial_sq(s.x.data(), s.y.data(), s.z.data(), s.size(), lo, bin_height,
                            bins.data(), nbins);
  double v = 0.0;
  for (double b : bins)
    if (b >= 0.0) v += kPi * b * bin_height;
  return v;
}

WorkspaceMetrics compute_metrics(const PointCloud& cloud, double bin_height) {
  WorkspaceMetrics m;
  m.r_max = max_radial_reach(cloud);
  m.planar_area = planar_area(m.r_max);
  m.volume = workspace_volume(cloud, bin_height);
  SoA s = to_soa(cloud);
  simd::active_kernels().minmax(s.z.data(), s.size(), &m.z_min, &m.z_max);
  return m;
}

std::vector<ScalingRow> scaling_report(const std::vector<WorkspaceMetrics>& metrics) {
  if (metrics.size() < 2) throw InvalidArgument("scaling_report: need at least two entries");
  const auto& base = metrics.front();
  if (!(base.planar_area > 0.0) || !(base.volume > 0.0))
    throw InvalidArgument("scaling_report: baseline area/volume must be positive");
  std::vector<ScalingRow> rows;
  rows.reserve(metrics.size());
  for (const auto& m : metrics)
    rows.push_back({m.planar_area / base.planar_area, m.volume / base.volume});
  return rows;
}

}  // namespace softarm::ws
