#include "softarm/statics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "softarm/errors.hpp"
#include "softarm/mocap.hpp"

namespace softarm::statics {

namespace {

// Flattened chain discretization. Sub-arc j has rest length h[j]; point
// masses sit at sub-arc end nodes (segment caps, payload at the tip).
struct Mesh {
  std::vector<double> h, ei, ea, rho, point_mass;
  std::vector<int> segment_of;
  std::size_t m = 0;
  double total_length = 0.0;
  double weight = 0.0;  // N per gram

  Mesh(const std::vector<SegmentSpec>& chain, const LoadCase& load, int subdivisions) {
    if (chain.empty()) throw InvalidArgument("statics: empty chain");
    if (subdivisions < 4) throw InvalidArgument("statics: need >= 4 sub-arcs per segment");
    for (const auto& seg : chain) seg.validate();
    if (load.payload_mass < 0.0) throw InvalidArgument("statics: negative payload");
    m = chain.size() * static_cast<std::size_t>(subdivisions);
    h.reserve(m);
    ei.reserve(m);
    ea.reserve(m);
    rho.reserve(m);
    point_mass.assign(m, 0.0);
    for (std::size_t s = 0; s < chain.size(); ++s) {
      const auto& seg = chain[s];
      double hs = seg.length / subdivisions;
      for (int j = 0; j < subdivisions; ++j) {
        h.push_back(hs);
        ei.push_back(seg.material.bending_stiffness);
        ea.push_back(seg.material.axial_stiffness);
        rho.push_back(seg.material.linear_density);
        segment_of.push_back(static_cast<int>(s));
      }
      point_mass[(s + 1) * subdivisions - 1] += seg.end_cap_mass;
      total_length += seg.length;
    }
    point_mass[m - 1] += load.payload_mass;
    weight = load.weight_per_gram();
  }
};

// Planar arc step primitives. With u = kappa*h and entry tangent angle a0
// (measured from the hanging -z direction toward +x):
//   dx = (1+eps) * C,  dz = -(1+eps) * S
//   C = h*(cos(a0)*versc(u) + sin(a0)*sinc(u))
//   S = h*(cos(a0)*sinc(u) - sin(a0)*versc(u))
struct ArcStep {
  double c = 0.0, s = 0.0;      // C, S
  double dc_du = 0.0, ds_du = 0.0;
};

ArcStep arc_step(double a0, double u, double h, bool with_derivatives) {
  double ca = std::cos(a0), sa = std::sin(a0);
  double sc = sinc(u), vc = versc(u);
  ArcStep out;
  out.c = h * (ca * vc + sa * sc);
  out.s = h * (ca * sc - sa * vc);
  if (with_derivatives) {
    double dsc = dsinc(u), dvc = dversc(u);
    out.dc_du = h * (ca * dvc + sa * dsc);
    out.ds_du = h * (ca * dsc - sa * dvc);
  }
  return out;
}

void check_state(const RodState& state, const Mesh& mesh) {
  if (state.kappa.size() != mesh.m || state.eps.size() != mesh.m)
    throw InvalidArgument("statics: state size does not match chain discretization");
  for (double e : state.eps)
    if (e <= -1.0) throw InvalidArgument("statics: axial strain <= -1");
}

struct Shape {
  std::vector<double> x, z;    // node positions after each sub-arc
  std::vector<double> xm, zm;  // sub-arc midpoints (half rest-length step)
  std::vector<double> a0;      // entry angle per sub-arc
};

Shape integrate(const RodState& state, const Mesh& mesh) {
  Shape sh;
  const std::size_t m = mesh.m;
  sh.x.resize(m);
  sh.z.resize(m);
  sh.xm.resize(m);
  sh.zm.resize(m);
  sh.a0.resize(m);
  double a = 0.0, x = 0.0, z = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    sh.a0[j] = a;
    double u = state.kappa[j] * mesh.h[j];
    double one_eps = 1.0 + state.eps[j];
    ArcStep half = arc_step(a, 0.5 * u, 0.5 * mesh.h[j], false);
    sh.xm[j] = x + one_eps * half.c;
    sh.zm[j] = z - one_eps * half.s;
    ArcStep full = arc_step(a, u, mesh.h[j], false);
    x += one_eps * full.c;
    z -= one_eps * full.s;
    sh.x[j] = x;
    sh.z[j] = z;
    a += u;
  }
  return sh;
}

double energy_impl(const RodState& state, const Mesh& mesh) {
  double u_el = 0.0;
  for (std::size_t j = 0; j < mesh.m; ++j)
    u_el += 0.5 *
            (mesh.ei[j] * state.kappa[j] * state.kappa[j] +
             mesh.ea[j] * state.eps[j] * state.eps[j]) *
            mesh.h[j];
  if (mesh.weight == 0.0) return u_el;
  Shape sh = integrate(state, mesh);
  double u_g = 0.0;
  for (std::size_t j = 0; j < mesh.m; ++j) {
    u_g += mesh.rho[j] * mesh.h[j] * sh.zm[j];
    if (mesh.point_mass[j] != 0.0) u_g += mesh.point_mass[j] * sh.z[j];
  }
  return u_el + mesh.weight * u_g;
}

// Analytic gradient via a reverse sweep. The gravity potential depends on a
// sub-arc's own (kappa, eps) directly and on upstream curvatures through the
// entry angle; the angle adjoint is accumulated as a suffix sum.
void gradient_impl(const RodState& state, const Mesh& mesh, double* gk, double* ge) {
  const std::size_t m = mesh.m;
  for (std::size_t j = 0; j < m; ++j) {
    gk[j] = mesh.ei[j] * state.kappa[j] * mesh.h[j];
    ge[j] = mesh.ea[j] * state.eps[j] * mesh.h[j];
  }
  if (mesh.weight == 0.0) return;

  // Weight (N) hanging strictly after sub-arc j's end node, plus the node's
  // own point mass: these all translate with dz_j.
  std::vector<double> w_full(m), a_adj(m);
  double acc = 0.0;
  for (std::size_t j = m; j-- > 0;) {
    acc += mesh.point_mass[j] * mesh.weight;
    w_full[j] = acc;
    acc += mesh.rho[j] * mesh.h[j] * mesh.weight;  // body mass sits at the midpoint
  }

  double a = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double u = state.kappa[j] * mesh.h[j];
    double one_eps = 1.0 + state.eps[j];
    double w_half = mesh.rho[j] * mesh.h[j] * mesh.weight;
    ArcStep full = arc_step(a, u, mesh.h[j], true);
    ArcStep half = arc_step(a, 0.5 * u, 0.5 * mesh.h[j], true);

    // dz = -(1+eps)*S, dz_half = -(1+eps)*S_half
    gk[j] += w_full[j] * (-one_eps * full.ds_du * mesh.h[j]) +
             w_half * (-one_eps * half.ds_du * 0.5 * mesh.h[j]);
    ge[j] += w_full[j] * (-full.s) + w_half * (-half.s);

    // d(dz)/d(a0) = (1+eps)*C
    a_adj[j] = w_full[j] * one_eps * full.c + w_half * one_eps * half.c;
    a += u;
  }
  // dV/dkappa_i += h_i * sum_{j>i} a_adj[j]
  double suffix = 0.0;
  for (std::size_t j = m; j-- > 0;) {
    gk[j] += mesh.h[j] * suffix;
    suffix += a_adj[j];
  }
}

// ---------------------------------------------------------------------------
// L-BFGS with Armijo backtracking, dense history of 8 pairs.

struct InnerResult {
  double f = 0.0;
  double gnorm = 0.0;
  int iterations = 0;
  bool converged = false;
};

template <typename F>
InnerResult lbfgs_minimize(std::vector<double>& x, F&& fg, double tol, int max_iter) {
  const std::size_t n = x.size();
  constexpr int kHist = 8;
  std::vector<std::vector<double>> s_hist, y_hist;
  std::vector<double> rho_hist;

  std::vector<double> g(n), g_new(n), d(n), x_new(n), alpha_buf;
  double f = fg(x, g);
  InnerResult out;

  auto inf_norm = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double e : v) m = std::max(m, std::abs(e));
    return m;
  };

  for (int it = 0; it < max_iter; ++it) {
    out.gnorm = inf_norm(g);
    out.iterations = it;
    if (out.gnorm <= tol) {
      out.converged = true;
      break;
    }

    // Two-loop recursion.
    d = g;
    alpha_buf.assign(s_hist.size(), 0.0);
    for (std::size_t k = s_hist.size(); k-- > 0;) {
      double a = rho_hist[k] *
                 std::inner_product(s_hist[k].begin(), s_hist[k].end(), d.begin(), 0.0);
      alpha_buf[k] = a;
      for (std::size_t i = 0; i < n; ++i) d[i] -= a * y_hist[k][i];
    }
    if (!s_hist.empty()) {
      const auto& s_last = s_hist.back();
      const auto& y_last = y_hist.back();
      double sy = std::inner_product(s_last.begin(), s_last.end(), y_last.begin(), 0.0);
      double yy = std::inner_product(y_last.begin(), y_last.end(), y_last.begin(), 0.0);
      double gamma = sy / std::max(yy, 1e-300);
      for (auto& e : d) e *= gamma;
    } else {
      double gn = inf_norm(d);
      if (gn > 1.0)
        for (auto& e : d) e /= gn;
    }
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      double b = rho_hist[k] *
                 std::inner_product(y_hist[k].begin(), y_hist[k].end(), d.begin(), 0.0);
      for (std::size_t i = 0; i < n; ++i) d[i] += (alpha_buf[k] - b) * s_hist[k][i];
    }
    for (auto& e : d) e = -e;

    double gd = std::inner_product(g.begin(), g.end(), d.begin(), 0.0);
    if (gd >= 0.0) {  // not a descent direction: restart from steepest descent
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
      gd = -std::inner_product(g.begin(), g.end(), g.begin(), 0.0);
      if (gd == 0.0) break;
    }

    double step = 1.0;
    double f_new = f;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = x[i] + step * d[i];
      f_new = fg(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * gd) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    std::vector<double> s_vec(n), y_vec(n);
    for (std::size_t i = 0; i < n; ++i) {
      s_vec[i] = x_new[i] - x[i];
      y_vec[i] = g_new[i] - g[i];
    }
    double sy = std::inner_product(s_vec.begin(), s_vec.end(), y_vec.begin(), 0.0);
    double ss = std::inner_product(s_vec.begin(), s_vec.end(), s_vec.begin(), 0.0);
    double yy = std::inner_product(y_vec.begin(), y_vec.end(), y_vec.begin(), 0.0);
    if (sy > 1e-12 * std::sqrt(ss * yy) && sy > 0.0) {
      if (static_cast<int>(s_hist.size()) == kHist) {
        s_hist.erase(s_hist.begin());
        y_hist.erase(y_hist.begin());
        rho_hist.erase(rho_hist.begin());
      }
      s_hist.push_back(std::move(s_vec));
      y_hist.push_back(std::move(y_vec));
      rho_hist.push_back(1.0 / sy);
    }
    x.swap(x_new);
    g.swap(g_new);
    f = f_new;
  }
  out.f = f;
  if (!out.converged) out.gnorm = inf_norm(g);
  return out;
}

// Engaged tendon under the planar restriction.
struct PlanarTendon {
  int segment = 0;
  int tendon = 0;
  double sign = 1.0;   // +1 bends toward +x, -1 toward -x
  double pull = 0.0;   // mm
  double target = 0.0; // required path length: rest - pull
};

}  // namespace

void MaterialParams::validate() const {
  if (!(bending_stiffness > 0.0)) throw InvalidArgument("material: EI must be positive");
  if (!(axial_stiffness > 0.0)) throw InvalidArgument("material: EA must be positive");
  if (linear_density < 0.0) throw InvalidArgument("material: negative linear density");
}

void SegmentSpec::validate() const {
  if (!(length > 0.0)) throw InvalidArgument("segment: length must be positive");
  if (end_cap_mass < 0.0) throw InvalidArgument("segment: negative end cap mass");
  layout.validate();
  material.validate();
}

double total_energy(const RodState& state, const std::vector<SegmentSpec>& chain,
                    const LoadCase& load) {
  Mesh mesh(chain, load, state.subdivisions);
  check_state(state, mesh);
  return energy_impl(state, mesh);
}

std::vector<double> energy_gradient(const RodState& state,
                                    const std::vector<SegmentSpec>& chain,
                                    const LoadCase& load) {
  Mesh mesh(chain, load, state.subdivisions);
  check_state(state, mesh);
  std::vector<double> grad(2 * mesh.m);
  gradient_impl(state, mesh, grad.data(), grad.data() + mesh.m);
  return grad;
}

double tendon_path_length(const RodState& state, const std::vector<SegmentSpec>& chain,
                          int segment, int tendon) {
  LoadCase no_load{0.0, 9806.65, false};
  Mesh mesh(chain, no_load, state.subdivisions);
  check_state(state, mesh);
  if (segment < 0 || segment >= static_cast<int>(chain.size()))
    throw InvalidArgument("tendon_path_length: segment index out of range");
  const auto& layout = chain[segment].layout;
  if (tendon < 0 || tendon >= layout.count())
    throw InvalidArgument("tendon_path_length: tendon index out of range");
  // Planar channel direction: cos(angle) projects the channel offset onto the
  // bending plane (x-z).
  double proj = std::cos(layout.angles[tendon]);
  const int n = state.subdivisions;
  double path = 0.0;
  for (int j = 0; j < (segment + 1) * n; ++j) {
    double term = 1.0 + state.eps[j];
    if (j >= segment * n) term -= state.kappa[j] * layout.pitch_radius * proj;
    path += mesh.h[j] * term;
  }
  return path;
}

std::vector<Vec3> node_positions(const RodState& state,
                                 const std::vector<SegmentSpec>& chain) {
  LoadCase no_load{0.0, 9806.65, false};
  Mesh mesh(chain, no_load, state.subdivisions);
  check_state(state, mesh);
  Shape sh = integrate(state, mesh);
  std::vector<Vec3> out;
  out.reserve(mesh.m + 1);
  out.emplace_back(0.0, 0.0, 0.0);
  for (std::size_t j = 0; j < mesh.m; ++j) out.emplace_back(sh.x[j], 0.0, sh.z[j]);
  return out;
}

Vec3 position_at(const RodState& state, const std::vector<SegmentSpec>& chain, double s) {
  LoadCase no_load{0.0, 9806.65, false};
  Mesh mesh(chain, no_load, state.subdivisions);
  check_state(state, mesh);
  if (s < 0.0 || s > mesh.total_length + 1e-9)
    throw InvalidArgument("position_at: arc length out of range");
  double a = 0.0, x = 0.0, z = 0.0;
  for (std::size_t j = 0; j < mesh.m; ++j) {
    if (s <= mesh.h[j] || j == mesh.m - 1) {
      double hp = std::min(s, mesh.h[j]);
      ArcStep part = arc_step(a, state.kappa[j] * hp, hp, false);
      return {x + (1.0 + state.eps[j]) * part.c, 0.0,
              z - (1.0 + state.eps[j]) * part.s};
    }
    double u = state.kappa[j] * mesh.h[j];
    ArcStep full = arc_step(a, u, mesh.h[j], false);
    x += (1.0 + state.eps[j]) * full.c;
    z -= (1.0 + state.eps[j]) * full.s;
    a += u;
    s -= mesh.h[j];
  }
  return {x, 0.0, z};
}

double ccfit_angle_from_state(const RodState& state, const std::vector<SegmentSpec>& chain,
                              int marker_count, double span_mm, int through_segment) {
  if (marker_count < 3) throw InvalidArgument("ccfit: need at least 3 markers");
  if (through_segment < 0) through_segment = static_cast<int>(chain.size()) - 1;
  if (through_segment >= static_cast<int>(chain.size()))
    throw InvalidArgument("ccfit: segment index out of range");
  double s_hi = 0.0;
  for (int k = 0; k <= through_segment; ++k) s_hi += chain[k].length;
  double span = std::min(span_mm, s_hi);
  std::vector<Vec3> pts;
  pts.reserve(marker_count);
  for (int i = 0; i < marker_count; ++i) {
    double s = s_hi - span + span * i / (marker_count - 1);
    pts.push_back(position_at(state, chain, s));
  }
  try {
    return s_hi / mocap::fit_circle_3d(pts).radius;
  } catch (const NoSolution&) {
    return 0.0;  // straight
  }
}

EquilibriumResult solve_equilibrium(const std::vector<SegmentSpec>& chain,
                                    const cc::ActuationCommand& command,
                                    const LoadCase& load, const SolverSettings& settings,
                                    double delta_max) {
  Mesh mesh(chain, load, settings.subdivisions);
  if (command.pulls.size() != chain.size())
    throw InvalidArgument("solve_equilibrium: command segment count mismatch");
  for (std::size_t s = 0; s < chain.size(); ++s) {
    cc::ActuationCommand one{{command.pulls[s]}};
    one.validate(chain[s].layout, delta_max);
  }

  // Planar restriction: every engaged tendon must share one bending axis.
  std::vector<PlanarTendon> tendons;
  double axis = 0.0;
  bool axis_set = false;
  const int n_sub = settings.subdivisions;
  for (std::size_t s = 0; s < chain.size(); ++s) {
    for (std::size_t t = 0; t < command.pulls[s].size(); ++t) {
      double delta = command.pulls[s][t];
      if (delta <= 0.0) continue;
      double psi = chain[s].layout.angles[t];
      if (!axis_set) {
        axis = psi;
        axis_set = true;
      }
      double rel = wrap_2pi(psi - axis);
      double sign;
      if (rel < 1e-9 || rel > 2.0 * std::numbers::pi - 1e-9)
        sign = 1.0;
      else if (std::abs(rel - std::numbers::pi) < 1e-9)
        sign = -1.0;
      else
        throw InvalidArgument(
            "solve_equilibrium: engaged tendons do not share a bending plane");
      double rest = 0.0;
      for (std::size_t k = 0; k <= s; ++k) rest += chain[k].length;
      tendons.push_back({static_cast<int>(s), static_cast<int>(t), sign, delta,
                         rest - delta});
    }
  }

  const std::size_t m = mesh.m;
  std::vector<double> x(2 * m, 0.0);
  for (const auto& td : tendons) {
    double kappa0 = td.sign * td.pull /
                    (chain[td.segment].length * chain[td.segment].layout.pitch_radius);
    for (int j = 0; j < n_sub; ++j) x[td.segment * n_sub + j] = kappa0;
  }

  // Constraint value g = path - target (taut when g = 0, slack when g < 0)
  // and its constant gradient row.
  const std::size_t nc = tendons.size();
  std::vector<std::vector<double>> rows(nc, std::vector<double>(2 * m, 0.0));
  for (std::size_t c = 0; c < nc; ++c) {
    const auto& td = tendons[c];
    double d = chain[td.segment].layout.pitch_radius;
    for (int j = 0; j < (td.segment + 1) * n_sub; ++j) {
      rows[c][m + j] = mesh.h[j];
      if (j >= td.segment * n_sub) rows[c][j] = -td.sign * d * mesh.h[j];
    }
  }
  auto constraint_value = [&](const std::vector<double>& q, std::size_t c) {
    const auto& td = tendons[c];
    double d = chain[td.segment].layout.pitch_radius;
    double path = 0.0;
    for (int j = 0; j < (td.segment + 1) * n_sub; ++j) {
      double term = 1.0 + q[m + j];
      if (j >= td.segment * n_sub) term -= td.sign * q[j] * d;
      path += mesh.h[j] * term;
    }
    return path - td.target;
  };

  std::vector<double> mult(nc, 0.0);
  double mu = settings.initial_penalty;
  RodState scratch;
  scratch.subdivisions = n_sub;
  scratch.kappa.resize(m);
  scratch.eps.resize(m);

  auto fg = [&](const std::vector<double>& q, std::vector<double>& grad) {
    std::copy(q.begin(), q.begin() + m, scratch.kappa.begin());
    std::copy(q.begin() + m, q.end(), scratch.eps.begin());
    double f = energy_impl(scratch, mesh);
    grad.assign(2 * m, 0.0);
    gradient_impl(scratch, mesh, grad.data(), grad.data() + m);
    for (std::size_t c = 0; c < nc; ++c) {
      double g = constraint_value(q, c);
      double t_hat = mult[c] + mu * g;
      if (t_hat > 0.0) {
        f += (t_hat * t_hat - mult[c] * mult[c]) / (2.0 * mu);
        for (std::size_t i = 0; i < 2 * m; ++i) grad[i] += t_hat * rows[c][i];
      } else {
        f -= mult[c] * mult[c] / (2.0 * mu);
      }
    }
    return f;
  };

  InnerResult inner;
  double violation = std::numeric_limits<double>::infinity();
  bool done = false;
  for (int outer = 0; outer < settings.max_outer_iterations; ++outer) {
    inner = lbfgs_minimize(x, fg, settings.inner_tolerance,
                           settings.max_inner_iterations);
    double prev = violation;
    violation = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
      double g = constraint_value(x, c);
      double t_hat = mult[c] + mu * g;
      violation = std::max(violation, t_hat > 0.0 ? std::abs(g) : std::max(0.0, g));
    }
    if (violation <= settings.constraint_tolerance && inner.converged) {
      for (std::size_t c = 0; c < nc; ++c)
        mult[c] = std::max(0.0, mult[c] + mu * constraint_value(x, c));
      done = true;
      break;
    }
    for (std::size_t c = 0; c < nc; ++c)
      mult[c] = std::max(0.0, mult[c] + mu * constraint_value(x, c));
    if (violation > 0.25 * prev) mu = std::min(mu * 10.0, 1e12);
  }
  if (!done)
    throw SolverFailure("solve_equilibrium: no convergence (constraint violation " +
                            std::to_string(violation) + " mm)",
                        inner.gnorm);

  EquilibriumResult res;
  res.state.subdivisions = n_sub;
  res.state.kappa.assign(x.begin(), x.begin() + m);
  res.state.eps.assign(x.begin() + m, x.end());
  res.energy = energy_impl(res.state, mesh);
  res.gradient_norm = inner.gnorm;

  res.tip_angle = 0.0;
  for (std::size_t j = 0; j < m; ++j) res.tip_angle += res.state.kappa[j] * mesh.h[j];
  res.ccfit_angle = ccfit_angle_from_state(res.state, chain);

  Shape sh = integrate(res.state, mesh);
  res.vertical_displacement = sh.z[m - 1] + mesh.total_length;

  res.tendon_tensions.resize(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    double t = mult[c];
    res.tendon_tensions[c] =
        t > 0.0 ? t + chain[tendons[c].segment].material.tension_offset : 0.0;
    if (res.tendon_tensions[c] < 0.0) res.tendon_tensions[c] = 0.0;
  }

  double mean_abs = 0.0, mean = 0.0;
  for (double k : res.state.kappa) {
    mean_abs += std::abs(k);
    mean += k;
  }
  mean_abs /= static_cast<double>(m);
  mean /= static_cast<double>(m);
  if (mean_abs > 0.0) {
    double var = 0.0;
    for (double k : res.state.kappa) var += (k - mean) * (k - mean);
    res.nonuniformity = std::sqrt(var / static_cast<double>(m)) / mean_abs;
  }
  return res;
}

}  // namespace softarm::statics
