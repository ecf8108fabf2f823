#include "softarm/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "softarm/errors.hpp"

namespace softarm::config {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

double num(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(std::string(key) + " must be a number in " + where);
  return v.get<double>();
}

int integer(const json& obj, const char* key, int fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer())
    throw ConfigError(std::string(key) + " must be an integer in " + where);
  return v.get<int>();
}

Vec3 vec3(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3)
    throw ConfigError(where + " must be an array of 3 numbers");
  for (const auto& e : v)
    if (!e.is_number()) throw ConfigError(where + " must contain numbers");
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

std::string g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

double ProjectConfig::sweep_theta_max() const {
  if (sweep.theta_max > 0.0) return sweep.theta_max;
  if (sweep.delta_max > 0.0) {
    if (segments.empty()) throw ConfigError("sweep: delta_max needs a segment layout");
    return sweep.delta_max / segments.front().layout.pitch_radius;
  }
  throw ConfigError("sweep: either theta_max_rad or delta_max_mm must be set");
}

ws::SweepConfig ProjectConfig::sweep_config(int n_segments) const {
  if (n_segments < 1 || n_segments > static_cast<int>(segments.size()))
    throw InvalidArgument("sweep: segment count must be between 1 and " +
                          std::to_string(segments.size()));
  ws::SweepConfig cfg;
  double tmax = sweep_theta_max();
  for (int i = 0; i < n_segments; ++i)
    cfg.segments.push_back(
        {segments[i].length, tmax, sweep.theta_steps, sweep.phi_steps});
  cfg.sample_cap = sweep.sample_cap;
  return cfg;
}

const statics::MaterialParams& ProjectConfig::material(const std::string& name) const {
  auto it = materials.find(name);
  if (it == materials.end())
    throw InvalidArgument("unknown material '" + name + "'");
  return it->second;
}

ProjectConfig default_config() {
  ProjectConfig cfg;
  // Material parameters fitted against the published payload measurements
  // (see data/payload_endpoints.csv and the calibrate subcommand).
  auto mat = [](const char* name, double ei, double ea, double rho, double off) {
    statics::MaterialParams m;
    m.name = name;
    m.bending_stiffness = ei;
    m.axial_stiffness = ea;
    m.linear_density = rho;
    m.tension_offset = off;
    return m;
  };
  cfg.materials["ecoflex-0010"] = mat("ecoflex-0010", 2000.0, 30.0, 0.10, 0.5);
  cfg.materials["ecoflex-0030"] = mat("ecoflex-0030", 3500.0, 60.0, 0.10, 0.5);
  cfg.materials["ecoflex-0050"] = mat("ecoflex-0050", 6000.0, 120.0, 0.10, 0.5);

  cc::TendonLayout layout = cc::TendonLayout::symmetric(3, 8.0);
  for (int i = 0; i < 3; ++i) {
    statics::SegmentSpec seg;
    seg.length = 100.0;
    seg.layout = layout;
    seg.material = cfg.materials["ecoflex-0050"];
    seg.end_cap_mass = 5.0;
    cfg.segments.push_back(seg);
  }
  cfg.sweep.theta_max = 1.14608293;  // fit_theta_max(51.3, 100)
  return cfg;
}

ProjectConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config root must be an object");
  check_keys(doc,
             {"materials", "segments", "solver", "gravity", "sweep", "ccfit",
              "mocap_frame", "delta_max_mm"},
             "config root");

  ProjectConfig cfg = default_config();
  cfg.materials.clear();
  cfg.segments.clear();
  ProjectConfig defaults = default_config();

  if (doc.contains("materials")) {
    const auto& mats = doc.at("materials");
    if (!mats.is_object()) throw ConfigError("materials must be an object");
    for (auto it = mats.begin(); it != mats.end(); ++it) {
      const std::string where = "materials." + it.key();
      const auto& m = it.value();
      if (!m.is_object()) throw ConfigError(where + " must be an object");
      check_keys(m,
                 {"bending_stiffness_nmm2", "axial_stiffness_n",
                  "linear_density_g_per_mm", "tension_offset_n"},
                 where);
      statics::MaterialParams mp;
      mp.name = it.key();
      mp.bending_stiffness = num(m, "bending_stiffness_nmm2", 500.0, where);
      mp.axial_stiffness = num(m, "axial_stiffness_n", 50.0, where);
      mp.linear_density = num(m, "linear_density_g_per_mm", 0.1, where);
      mp.tension_offset = num(m, "tension_offset_n", 0.0, where);
      mp.validate();
      cfg.materials.emplace(it.key(), std::move(mp));
    }
  } else {
    cfg.materials = defaults.materials;
  }

  if (doc.contains("segments")) {
    const auto& segs = doc.at("segments");
    if (!segs.is_array() || segs.empty())
      throw ConfigError("segments must be a non-empty array");
    int idx = 0;
    for (const auto& s : segs) {
      const std::string where = "segments[" + std::to_string(idx++) + "]";
      if (!s.is_object()) throw ConfigError(where + " must be an object");
      check_keys(s,
                 {"length_mm", "material", "end_cap_mass_g", "pitch_radius_mm",
                  "tendon_count"},
                 where);
      statics::SegmentSpec seg;
      seg.length = num(s, "length_mm", 100.0, where);
      seg.end_cap_mass = num(s, "end_cap_mass_g", 5.0, where);
      seg.layout = cc::TendonLayout::symmetric(
          integer(s, "tendon_count", 3, where), num(s, "pitch_radius_mm", 8.0, where));
      if (!s.contains("material")) throw ConfigError(where + ": material is required");
      const auto& mref = s.at("material");
      if (!mref.is_string()) throw ConfigError(where + ": material must be a string");
      auto it = cfg.materials.find(mref.get<std::string>());
      if (it == cfg.materials.end())
        throw ConfigError(where + ": material '" + mref.get<std::string>() +
                          "' is not in the materials library");
      seg.material = it->second;
      seg.validate();
      cfg.segments.push_back(std::move(seg));
    }
  } else {
    cfg.segments = defaults.segments;
    if (doc.contains("materials")) {
      // Rebind default segments to the parsed library when possible.
      for (auto& seg : cfg.segments) {
        auto it = cfg.materials.find(seg.material.name);
        if (it == cfg.materials.end())
          throw ConfigError("default segments reference material '" +
                            seg.material.name + "' missing from materials");
        seg.material = it->second;
      }
    }
  }

  if (doc.contains("solver")) {
    const auto& s = doc.at("solver");
    check_keys(s,
               {"subdivisions", "inner_tolerance", "constraint_tolerance",
                "max_outer_iterations", "max_inner_iterations", "initial_penalty"},
               "solver");
    cfg.solver.subdivisions = integer(s, "subdivisions", 20, "solver");
    cfg.solver.inner_tolerance = num(s, "inner_tolerance", 1e-8, "solver");
    cfg.solver.constraint_tolerance = num(s, "constraint_tolerance", 1e-6, "solver");
    cfg.solver.max_outer_iterations = integer(s, "max_outer_iterations", 50, "solver");
    cfg.solver.max_inner_iterations = integer(s, "max_inner_iterations", 4000, "solver");
    cfg.solver.initial_penalty = num(s, "initial_penalty", 10.0, "solver");
    if (cfg.solver.subdivisions < 4)
      throw ConfigError("solver.subdivisions must be >= 4");
    if (!(cfg.solver.inner_tolerance > 0.0) || !(cfg.solver.constraint_tolerance > 0.0))
      throw ConfigError("solver tolerances must be positive");
  }

  if (doc.contains("gravity")) {
    const auto& g = doc.at("gravity");
    check_keys(g, {"enabled", "magnitude_mm_s2"}, "gravity");
    if (g.contains("enabled")) {
      if (!g.at("enabled").is_boolean())
        throw ConfigError("gravity.enabled must be a boolean");
      cfg.gravity.gravity_enabled = g.at("enabled").get<bool>();
    }
    cfg.gravity.gravity_magnitude = num(g, "magnitude_mm_s2", 9806.65, "gravity");
    if (cfg.gravity.gravity_magnitude < 0.0)
      throw ConfigError("gravity.magnitude_mm_s2 must be non-negative");
  }

  if (doc.contains("sweep")) {
    const auto& s = doc.at("sweep");
    check_keys(s,
               {"theta_steps", "phi_steps", "theta_max_rad", "delta_max_mm",
                "sample_cap", "bin_height_mm"},
               "sweep");
    cfg.sweep.theta_steps = integer(s, "theta_steps", 12, "sweep");
    cfg.sweep.phi_steps = integer(s, "phi_steps", 16, "sweep");
    cfg.sweep.theta_max = num(s, "theta_max_rad", 0.0, "sweep");
    cfg.sweep.delta_max = num(s, "delta_max_mm", 0.0, "sweep");
    double cap = num(s, "sample_cap", 1e6, "sweep");
    if (!(cap >= 1.0)) throw ConfigError("sweep.sample_cap must be >= 1");
    cfg.sweep.sample_cap = static_cast<std::uint64_t>(cap);
    cfg.sweep.bin_height = num(s, "bin_height_mm", 5.0, "sweep");
    if (cfg.sweep.theta_steps < 1 || cfg.sweep.phi_steps < 1)
      throw ConfigError("sweep step counts must be >= 1");
    if (!(cfg.sweep.bin_height > 0.0)) throw ConfigError("sweep.bin_height_mm must be positive");
    if (cfg.sweep.theta_max == 0.0 && cfg.sweep.delta_max == 0.0)
      cfg.sweep.theta_max = defaults.sweep.theta_max;
    if (cfg.sweep.theta_max < 0.0 || cfg.sweep.theta_max > std::numbers::pi)
      throw ConfigError("sweep.theta_max_rad must lie in (0, pi]");
  }

  if (doc.contains("ccfit")) {
    const auto& c = doc.at("ccfit");
    check_keys(c, {"marker_count", "span_mm"}, "ccfit");
    cfg.ccfit.marker_count = integer(c, "marker_count", 5, "ccfit");
    cfg.ccfit.span = num(c, "span_mm", 0.0, "ccfit");
    if (cfg.ccfit.marker_count < 3) throw ConfigError("ccfit.marker_count must be >= 3");
  }

  if (doc.contains("mocap_frame")) {
    const auto& m = doc.at("mocap_frame");
    check_keys(m, {"origin_mm", "axis"}, "mocap_frame");
    if (m.contains("origin_mm"))
      cfg.mocap_frame.origin = vec3(m.at("origin_mm"), "mocap_frame.origin_mm");
    if (m.contains("axis")) {
      cfg.mocap_frame.axis = vec3(m.at("axis"), "mocap_frame.axis");
      if (!(cfg.mocap_frame.axis.norm() > 0.0))
        throw ConfigError("mocap_frame.axis must be non-zero");
    }
  }

  cfg.delta_max = num(doc, "delta_max_mm", 80.0, "config root");
  if (!(cfg.delta_max > 0.0)) throw ConfigError("delta_max_mm must be positive");
  return cfg;
}

ProjectConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json(const ProjectConfig& cfg) {
  std::ostringstream o;
  o << "{\n  \"materials\": {\n";
  bool first = true;
  for (const auto& [name, m] : cfg.materials) {
    if (!first) o << ",\n";
    first = false;
    o << "    \"" << name << "\": {\"bending_stiffness_nmm2\": " << g9(m.bending_stiffness)
      << ", \"axial_stiffness_n\": " << g9(m.axial_stiffness)
      << ", \"linear_density_g_per_mm\": " << g9(m.linear_density)
      << ", \"tension_offset_n\": " << g9(m.tension_offset) << "}";
  }
  o << "\n  },\n  \"segments\": [\n";
  for (std::size_t i = 0; i < cfg.segments.size(); ++i) {
    const auto& s = cfg.segments[i];
    o << "    {\"length_mm\": " << g9(s.length) << ", \"material\": \""
      << s.material.name << "\", \"end_cap_mass_g\": " << g9(s.end_cap_mass)
      << ", \"pitch_radius_mm\": " << g9(s.layout.pitch_radius)
      << ", \"tendon_count\": " << s.layout.count() << "}"
      << (i + 1 < cfg.segments.size() ? ",\n" : "\n");
  }
  o << "  ],\n";
  o << "  \"solver\": {\"subdivisions\": " << cfg.solver.subdivisions
    << ", \"inner_tolerance\": " << g9(cfg.solver.inner_tolerance)
    << ", \"constraint_tolerance\": " << g9(cfg.solver.constraint_tolerance)
    << ", \"max_outer_iterations\": " << cfg.solver.max_outer_iterations
    << ", \"max_inner_iterations\": " << cfg.solver.max_inner_iterations
    << ", \"initial_penalty\": " << g9(cfg.solver.initial_penalty) << "},\n";
  o << "  \"gravity\": {\"enabled\": " << (cfg.gravity.gravity_enabled ? "true" : "false")
    << ", \"magnitude_mm_s2\": " << g9(cfg.gravity.gravity_magnitude) << "},\n";
  o << "  \"sweep\": {\"theta_steps\": " << cfg.sweep.theta_steps
    << ", \"phi_steps\": " << cfg.sweep.phi_steps
    << ", \"theta_max_rad\": " << g9(cfg.sweep.theta_max)
    << ", \"delta_max_mm\": " << g9(cfg.sweep.delta_max)
    << ", \"sample_cap\": " << cfg.sweep.sample_cap
    << ", \"bin_height_mm\": " << g9(cfg.sweep.bin_height) << "},\n";
  o << "  \"ccfit\": {\"marker_count\": " << cfg.ccfit.marker_count
    << ", \"span_mm\": " << g9(cfg.ccfit.span) << "},\n";
  o << "  \"mocap_frame\": {\"origin_mm\": [" << g9(cfg.mocap_frame.origin.x()) << ", "
    << g9(cfg.mocap_frame.origin.y()) << ", " << g9(cfg.mocap_frame.origin.z())
    << "], \"axis\": [" << g9(cfg.mocap_frame.axis.x()) << ", "
    << g9(cfg.mocap_frame.axis.y()) << ", " << g9(cfg.mocap_frame.axis.z()) << "]},\n";
  o << "  \"delta_max_mm\": " << g9(cfg.delta_max) << "\n}\n";
  return o.str();
}

}  // namespace softarm::config
