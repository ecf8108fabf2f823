#include "softarm/calibration.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <set>
#include <sstream>

#include "softarm/errors.hpp"

namespace softarm::calib {

namespace {

struct Model {
  const std::vector<Observation>* obs;
  const CalibrationSetup* setup;

  Prediction predict(const Observation& o, const statics::MaterialParams& mat) const {
    statics::SegmentSpec seg = setup->segment;
    seg.length = o.segment_length;
    seg.material = mat;
    std::vector<statics::SegmentSpec> chain{seg};
    cc::ActuationCommand cmd;
    cmd.pulls = {std::vector<double>(seg.layout.count(), 0.0)};
    cmd.pulls[0][0] = o.pull;
    statics::LoadCase load = setup->load;
    load.payload_mass = o.payload;
    auto eq = statics::solve_equilibrium(chain, cmd, load, setup->solver,
                                         std::max(o.pull * 2.0, 100.0));
    Prediction p;
    double span = setup->ccfit_span > 0.0 ? setup->ccfit_span : seg.length;
    p.ccfit_angle = statics::ccfit_angle_from_state(eq.state, chain,
                                                    setup->ccfit_markers, span);
    p.vertical_displacement = eq.vertical_displacement;
    p.tension = eq.tendon_tensions.empty() ? 0.0 : eq.tendon_tensions[0];
    return p;
  }

  // Normalized residual vector for one parameter triple.
  Eigen::VectorXd residuals(const Eigen::Vector3d& p,
                            std::vector<Prediction>* keep = nullptr) const {
    statics::MaterialParams mat;
    mat.bending_stiffness = std::exp(p[0]);
    mat.axial_stiffness = std::exp(p[1]);
    mat.tension_offset = p[2];
    mat.linear_density = setup->segment.material.linear_density;
    mat.name = setup->segment.material.name;
    std::vector<double> out;
    for (std::size_t i = 0; i < obs->size(); ++i) {
      const auto& o = (*obs)[i];
      Prediction pr;
      try {
        pr = predict(o, mat);
      } catch (const SolverFailure& e) {
        throw SolverFailure("fit_material: solve failed on observation " +
                                std::to_string(i + 1) + " (" + o.material + ", " +
                                std::to_string(o.payload) + " g): " + e.what(),
                            e.gradient_norm());
      }
      if (keep) keep->push_back(pr);
      if (o.ccfit_angle)
        out.push_back((pr.ccfit_angle - *o.ccfit_angle) / std::abs(*o.ccfit_angle));
      if (o.vertical_displacement)
        out.push_back((pr.vertical_displacement - *o.vertical_displacement) /
                      std::abs(*o.vertical_displacement));
      if (o.tension) out.push_back((pr.tension - *o.tension) / std::abs(*o.tension));
    }
    return Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<long>(out.size()));
  }
};

std::string g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::vector<std::string> split(const std::string& row) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = row.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(row.substr(start));
      break;
    }
    out.push_back(row.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::optional<double> opt_double(const std::string& f, std::size_t line) {
  if (f.empty()) return std::nullopt;
  double v = 0.0;
  auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc() || p != f.data() + f.size())
    throw ParseError("invalid number '" + f + "'", line);
  return v;
}

}  // namespace

CalibrationResult fit_material(const std::vector<Observation>& observations,
                               const CalibrationSetup& setup,
                               const statics::MaterialParams& initial) {
  if (observations.size() < 2)
    throw InvalidArgument("fit_material: need at least two observations");
  std::set<double> payloads;
  for (const auto& o : observations) payloads.insert(o.payload);
  if (payloads.size() < 2)
    throw InvalidArgument("fit_material: observations must span at least two payloads");

  Model model{&observations, &setup};
  Eigen::Vector3d p(std::log(initial.bending_stiffness),
                    std::log(initial.axial_stiffness), initial.tension_offset);

  Eigen::VectorXd r = model.residuals(p);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  int iterations = 0;

  for (int it = 0; it < 200; ++it) {
    iterations = it + 1;
    // Forward-difference Jacobian.
    Eigen::MatrixXd jac(r.size(), 3);
    for (int k = 0; k < 3; ++k) {
      double h = 1e-5 * std::max(1.0, std::abs(p[k]));
      Eigen::Vector3d pk = p;
      pk[k] += h;
      jac.col(k) = (model.residuals(pk) - r) / h;
    }
    Eigen::Matrix3d jtj = jac.transpose() * jac;
    Eigen::Vector3d jtr = jac.transpose() * r;

    bool stepped = false;
    for (int tries = 0; tries < 20; ++tries) {
      Eigen::Matrix3d damped = jtj;
      for (int k = 0; k < 3; ++k) damped(k, k) += lambda * std::max(jtj(k, k), 1e-12);
      Eigen::Vector3d step = damped.ldlt().solve(-jtr);
      if (!step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      Eigen::Vector3d pn = p + step;
      Eigen::VectorXd rn = model.residuals(pn);
      double cn = rn.squaredNorm();
      if (cn < cost) {
        double rel_step = step.norm() / std::max(1.0, p.norm());
        p = pn;
        r = rn;
        cost = cn;
        lambda = std::max(lambda / 10.0, 1e-12);
        stepped = true;
        if (rel_step < 1e-8) it = 200;  // converged
        break;
      }
      lambda *= 10.0;
    }
    if (!stepped) break;
  }

  CalibrationResult result;
  result.fitted = initial;
  result.fitted.bending_stiffness = std::exp(p[0]);
  result.fitted.axial_stiffness = std::exp(p[1]);
  result.fitted.tension_offset = p[2];
  result.iterations = iterations;
  std::vector<Prediction> preds;
  Eigen::VectorXd rf = model.residuals(p, &preds);
  result.residuals.assign(rf.data(), rf.data() + rf.size());
  result.residual_norm = std::sqrt(rf.squaredNorm() / static_cast<double>(rf.size()));
  result.predictions = std::move(preds);
  return result;
}

double fit_theta_max(double r_max, double length) {
  if (!(length > 0.0)) throw InvalidArgument("fit_theta_max: length must be positive");
  if (!(r_max > 0.0)) throw NoSolution("fit_theta_max: r_max must be positive");
  // Argmax of (1-cos t)/t, where the reach function stops increasing.
  double lo = std::numbers::pi / 2, hi = std::numbers::pi;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (dversc(mid) > 0.0 ? lo : hi) = mid;
  }
  const double theta_star = 0.5 * (lo + hi);
  if (r_max >= length * versc(theta_star))
    throw NoSolution("fit_theta_max: r_max exceeds the reachable maximum");
  lo = 0.0;
  hi = theta_star;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (length * versc(mid) < r_max ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::string residual_report_csv(const CalibrationResult& result,
                                const std::vector<Observation>& observations) {
  if (result.predictions.size() != observations.size())
    throw InvalidArgument("residual_report: prediction/observation count mismatch");
  std::ostringstream out;
  out << "material,payload_g,pull_mm,angle_deg_target,angle_deg_pred,z_mm_target,"
         "z_mm_pred,tension_n_target,tension_n_pred\n";
  constexpr double kDeg = 180.0 / std::numbers::pi;
  for (std::size_t i = 0; i < observations.size(); ++i) {
    const auto& o = observations[i];
    const auto& p = result.predictions[i];
    out << o.material << ',' << g9(o.payload) << ',' << g9(o.pull) << ',';
    out << (o.ccfit_angle ? g9(*o.ccfit_angle * kDeg) : "") << ','
        << g9(p.ccfit_angle * kDeg) << ',';
    out << (o.vertical_displacement ? g9(*o.vertical_displacement) : "") << ','
        << g9(p.vertical_displacement) << ',';
    out << (o.tension ? g9(*o.tension) : "") << ',' << g9(p.tension) << "\n";
  }
  return out.str();
}

std::vector<Observation> parse_observations_csv(std::istream& in) {
  constexpr const char* kHeader =
      "material,payload_g,pull_mm,angle_deg,z_mm,tension_n,length_mm";
  std::string row;
  std::size_t line = 0;
  if (!std::getline(in, row)) throw ParseError("empty file, expected header", 1);
  ++line;
  if (!row.empty() && row.back() == '\r') row.pop_back();
  if (row.rfind(kHeader, 0) != 0)
    throw ParseError(std::string("expected header '") + kHeader + "'", line);

  std::vector<Observation> out;
  constexpr double kRad = std::numbers::pi / 180.0;
  while (std::getline(in, row)) {
    ++line;
    if (!row.empty() && row.back() == '\r') row.pop_back();
    if (row.empty() || row[0] == '#') continue;
    auto fields = split(row);
    if (fields.size() < 7)
      throw ParseError("expected at least 7 fields, got " + std::to_string(fields.size()),
                       line);
    Observation o;
    o.material = fields[0];
    if (o.material.empty()) throw ParseError("empty material name", line);
    auto req = [&](const std::string& f) {
      auto v = opt_double(f, line);
      if (!v) throw ParseError("missing required field", line);
      return *v;
    };
    o.payload = req(fields[1]);
    o.pull = req(fields[2]);
    if (auto a = opt_double(fields[3], line)) o.ccfit_angle = *a * kRad;
    o.vertical_displacement = opt_double(fields[4], line);
    o.tension = opt_double(fields[5], line);
    o.segment_length = req(fields[6]);
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace softarm::calib
