#pragma once

// JSON run configuration with unit-bearing quantities ("200 mm", "105 GPa").
// Errors name the file plus the line (syntax) or the JSON path (content).

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "peh/errors.hpp"
#include "peh/events.hpp"
#include "peh/geometry.hpp"
#include "peh/harvester.hpp"
#include "peh/optimization.hpp"

namespace peh {

using Json = nlohmann::json;

enum class Dim { None, Length, Pressure, Density, Compliance, ChargeCoefficient, StressCoefficient, Permittivity,
                 Resistance, Frequency, Time, Acceleration, Damping, InverseDamping };

namespace detail {

struct UnitDef {
  Dim dim;
  double factor;
};

inline const std::map<std::string, UnitDef>& unit_table() {
  static const std::map<std::string, UnitDef> t = {
      {"m", {Dim::Length, 1.0}},          {"cm", {Dim::Length, 1e-2}},
      {"mm", {Dim::Length, 1e-3}},        {"um", {Dim::Length, 1e-6}},
      {"Pa", {Dim::Pressure, 1.0}},       {"kPa", {Dim::Pressure, 1e3}},
      {"MPa", {Dim::Pressure, 1e6}},      {"GPa", {Dim::Pressure, 1e9}},
      {"kg/m3", {Dim::Density, 1.0}},     {"g/cm3", {Dim::Density, 1e3}},
      {"m2/N", {Dim::Compliance, 1.0}},   {"pm2/N", {Dim::Compliance, 1e-12}},
      {"C/N", {Dim::ChargeCoefficient, 1.0}}, {"pC/N", {Dim::ChargeCoefficient, 1e-12}},
      {"C/m2", {Dim::StressCoefficient, 1.0}},
      {"F/m", {Dim::Permittivity, 1.0}},  {"nF/m", {Dim::Permittivity, 1e-9}},
      {"eps0", {Dim::Permittivity, kVacuumPermittivity}},
      {"ohm", {Dim::Resistance, 1.0}},    {"kohm", {Dim::Resistance, 1e3}},
      {"Mohm", {Dim::Resistance, 1e6}},
      {"Hz", {Dim::Frequency, 1.0}},      {"s", {Dim::Time, 1.0}},
      {"min", {Dim::Time, 60.0}},         {"h", {Dim::Time, 3600.0}},
      {"m/s2", {Dim::Acceleration, 1.0}}, {"g0", {Dim::Acceleration, 9.80665}},
      {"rad/s", {Dim::Damping, 1.0}},     {"s/rad", {Dim::InverseDamping, 1.0}},
  };
  return t;
}

inline std::string dim_name(Dim d) {
  switch (d) {
    case Dim::None: return "dimensionless";
    case Dim::Length: return "length";
    case Dim::Pressure: return "stress";
    case Dim::Density: return "density";
    case Dim::Compliance: return "compliance";
    case Dim::ChargeCoefficient: return "charge coefficient";
    case Dim::StressCoefficient: return "stress coefficient";
    case Dim::Permittivity: return "permittivity";
    case Dim::Resistance: return "resistance";
    case Dim::Frequency: return "frequency";
    case Dim::Time: return "time";
    case Dim::Acceleration: return "acceleration";
    case Dim::Damping: return "rate";
    case Dim::InverseDamping: return "time per radian";
  }
  return "?";
}

}  // namespace detail

/// Reads typed values out of a JSON document, tracking the source file for messages.
class ConfigReader {
 public:
  explicit ConfigReader(std::string source) : source_(std::move(source)) {}

  const std::string& source() const { return source_; }

  [[noreturn]] void error(const std::string& path, const std::string& msg) const {
    fail(ErrorKind::ConfigError, source_ + ": " + path + ": " + msg);
  }

  /// A number (SI) or "<number> <unit>".
  double quantity(const Json& j, const std::string& path, Dim dim) const {
    if (j.is_number()) return j.get<double>();
    if (!j.is_string()) error(path, "expected a number or a quantity string");
    const std::string s = j.get<std::string>();
    std::istringstream in(s);
    double v = 0.0;
    if (!(in >> v)) error(path, "cannot parse quantity '" + s + "'");
    std::string unit;
    in >> unit;
    std::string extra;
    if (in >> extra) error(path, "trailing text in quantity '" + s + "'");
    if (unit.empty()) return v;
    const auto& t = detail::unit_table();
    const auto it = t.find(unit);
    if (it == t.end()) error(path, "unknown unit '" + unit + "'");
    if (it->second.dim != dim)
      error(path, "unit '" + unit + "' is a " + detail::dim_name(it->second.dim) + ", expected " + detail::dim_name(dim));
    return v * it->second.factor;
  }

  double quantity(const Json& obj, const std::string& path, const char* key, Dim dim) const {
    if (!obj.contains(key)) error(path + "/" + key, "missing required value");
    return quantity(obj.at(key), path + "/" + key, dim);
  }

  double quantity_or(const Json& obj, const std::string& path, const char* key, Dim dim, double fallback) const {
    return obj.contains(key) ? quantity(obj.at(key), path + "/" + key, dim) : fallback;
  }

  template <class T>
  T value_or(const Json& obj, const std::string& path, const char* key, T fallback) const {
    if (!obj.contains(key)) return fallback;
    try {
      return obj.at(key).get<T>();
    } catch (const Json::exception& e) {
      error(path + "/" + key, e.what());
    }
  }

  const Json& object(const Json& obj, const std::string& path, const char* key) const {
    if (!obj.contains(key)) error(path + "/" + key, "missing required section");
    const Json& j = obj.at(key);
    if (!j.is_object()) error(path + "/" + key, "expected an object");
    return j;
  }

 private:
  std::string source_;
};

inline Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    fail(ErrorKind::ConfigError,
         source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": JSON syntax error: " + e.what());
  }
}

inline std::string read_text_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline MaterialSet parse_materials(const ConfigReader& r, const Json& m, const std::string& path) {
  if (m.is_string()) {
    if (m.get<std::string>() == "verification") return verification_materials();
    r.error(path, "unknown material preset '" + m.get<std::string>() + "'");
  }
  if (!m.is_object()) r.error(path, "expected an object or a preset name");
  MaterialSet base = verification_materials();
  if (m.contains("preset")) {
    if (r.value_or<std::string>(m, path, "preset", "") != "verification") r.error(path + "/preset", "unknown preset");
  }
  const bool preset = m.contains("preset");

  double rho_s = base.rho_s, rho_p = base.rho_p;
  Eigen::Matrix3d c_s = base.c_s;
  CondensedPiezo piezo{base.c_pE, base.e31, base.e32, base.eps33S};
  if (m.contains("substructure")) {
    const std::string sp = path + "/substructure";
    const Json& s = r.object(m, path, "substructure");
    rho_s = r.quantity(s, sp, "rho", Dim::Density);
    c_s = isotropic_plane_stress(r.quantity(s, sp, "E", Dim::Pressure), r.quantity_or(s, sp, "nu", Dim::None, 0.3));
  } else if (!preset) {
    r.error(path + "/substructure", "missing required section");
  }
  if (m.contains("piezo")) {
    const std::string pp = path + "/piezo";
    const Json& p = r.object(m, path, "piezo");
    rho_p = r.quantity(p, pp, "rho", Dim::Density);
    if (p.contains("s11E")) {
      PiezoStrainForm sf;
      sf.s11E = r.quantity(p, pp, "s11E", Dim::Compliance);
      sf.d31 = r.quantity(p, pp, "d31", Dim::ChargeCoefficient);
      sf.eps33T = r.quantity(p, pp, "eps33T", Dim::Permittivity);
      sf.nu = r.quantity_or(p, pp, "nu", Dim::None, 0.3);
      piezo = from_strain_form(sf);
    } else {
      PiezoConstants3D c;
      c.c11 = r.quantity(p, pp, "c11", Dim::Pressure);
      c.c12 = r.quantity(p, pp, "c12", Dim::Pressure);
      c.c13 = r.quantity(p, pp, "c13", Dim::Pressure);
      c.c22 = r.quantity_or(p, pp, "c22", Dim::Pressure, c.c11);
      c.c23 = r.quantity_or(p, pp, "c23", Dim::Pressure, c.c13);
      c.c33 = r.quantity(p, pp, "c33", Dim::Pressure);
      c.c66 = r.quantity(p, pp, "c66", Dim::Pressure);
      c.e31 = r.quantity(p, pp, "e31", Dim::StressCoefficient);
      c.e32 = r.quantity_or(p, pp, "e32", Dim::StressCoefficient, c.e31);
      c.e33 = r.quantity(p, pp, "e33", Dim::StressCoefficient);
      c.eps33S = r.quantity(p, pp, "eps33S", Dim::Permittivity);
      try {
        piezo = plane_stress_condense(c);
      } catch (const Error& e) {
        r.error(pp, e.what());
      }
    }
  } else if (!preset) {
    r.error(path + "/piezo", "missing required section");
  }
  double alpha = base.alpha, beta = base.beta;
  if (m.contains("damping")) {
    const Json& d = r.object(m, path, "damping");
    alpha = r.quantity_or(d, path + "/damping", "alpha", Dim::Damping, alpha);
    beta = r.quantity_or(d, path + "/damping", "beta", Dim::InverseDamping, beta);
  }
  MaterialSet out = MaterialSet::from_parts(rho_s, c_s, rho_p, piezo, alpha, beta);
  try {
    validate(out);
  } catch (const Error& e) {
    r.error(path, e.what());
  }
  return out;
}

/// Either {"L","W","L_pzt","h_s","h_p"} or the normalized {"L","R","l","H","h"}.
inline DesignVector parse_design(const ConfigReader& r, const Json& j, const std::string& path,
                                 const DesignVector& fallback) {
  if (!j.is_object()) r.error(path, "expected an object");
  if (j.contains("W") || j.contains("L_pzt") || j.contains("h_s") || j.contains("h_p")) {
    DeviceGeometry g;
    g.L = r.quantity(j, path, "L", Dim::Length);
    g.W = r.quantity(j, path, "W", Dim::Length);
    g.L_pzt = r.quantity_or(j, path, "L_pzt", Dim::Length, g.L);
    g.h_s = r.quantity(j, path, "h_s", Dim::Length);
    g.h_p = r.quantity(j, path, "h_p", Dim::Length);
    if (!(g.L > 0.0) || !(g.W > 0.0) || !(g.h_s > 0.0) || !(g.h_p >= 0.0))
      fail(ErrorKind::InvalidDesign, r.source() + ": " + path + ": geometry dimensions must be positive");
    return geometry_to_design(g);
  }
  DesignVector x = fallback;
  x.L = r.quantity_or(j, path, "L", Dim::Length, x.L);
  x.R = r.quantity_or(j, path, "R", Dim::None, x.R);
  x.l = r.quantity_or(j, path, "l", Dim::None, x.l);
  x.H = r.quantity_or(j, path, "H", Dim::None, x.H);
  x.h = r.quantity_or(j, path, "h", Dim::Length, x.h);
  return x;
}

/// Merges the file named by "device" (recursively) underneath `root`.
inline Json resolve_device(const Json& root, const std::filesystem::path& base_dir, const std::string& source,
                           int depth = 0) {
  if (!root.is_object() || !root.contains("device")) return root;
  if (!root.at("device").is_string()) fail(ErrorKind::ConfigError, source + ": /device: expected a file name");
  if (depth > 8) fail(ErrorKind::ConfigError, source + ": /device: include chain too deep");
  const auto dev_path = base_dir / root.at("device").get<std::string>();
  const Json dev = parse_json_text(read_text_file(dev_path), dev_path.string());
  Json merged = resolve_device(dev, dev_path.parent_path(), dev_path.string(), depth + 1);
  Json patch = root;
  patch.erase("device");
  // Geometry and free-variable sets are replaced whole; mixing parameterizations is meaningless.
  for (const char* key : {"geometry", "free"})
    if (patch.contains(key)) merged.erase(key);
  merged.merge_patch(patch);
  return merged;
}

/// Fully resolved JSON of a config file.
inline Json load_config_json(const std::filesystem::path& path) {
  return resolve_device(parse_json_text(read_text_file(path), path.string()), path.parent_path(), path.string());
}

inline Dim design_var_dim(DesignVar v) { return v == DesignVar::L ? Dim::Length : Dim::None; }

struct ClusterSettings {
  int k_min = 2;
  int k_max = 10;
  int restarts = 20;
};

struct QuietSettings {
  int count = 100;
  double window = 30.0;
  double threshold = 0.15;
};

struct RunConfig {
  std::string source;
  std::string hash;  // FNV-1a of the canonical JSON, hex
  DesignVector design = geometry_to_design(verification_geometry());
  MaterialSet materials = verification_materials();
  ModelSettings model;
  SimulationOptions simulation;
  std::vector<FreeVariable> free;
  PsoOptions pso;
  EventOptions events;
  ClusterSettings cluster;
  QuietSettings quiet;
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0: available cores
  std::string output_dir;

  OptimizationScenario scenario() const {
    OptimizationScenario s;
    s.free = free;
    s.base = design;
    s.materials = materials;
    s.model = model;
    s.pso = pso;
    s.pso.seed = seed;
    s.simulation = simulation;
    return s;
  }
};

inline std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// `base_dir` resolves a "device" include (another config file merged underneath).
inline RunConfig parse_config(const Json& root, const std::string& source,
                              const std::filesystem::path& base_dir = {}) {
  ConfigReader r(source);
  if (!root.is_object()) r.error("", "top level must be an object");
  RunConfig c;
  c.source = source;

  const Json merged = resolve_device(root, base_dir, source);
  c.hash = fnv1a_hex(merged.dump());

  if (merged.contains("materials")) c.materials = parse_materials(r, merged.at("materials"), "/materials");
  if (merged.contains("geometry")) c.design = parse_design(r, merged.at("geometry"), "/geometry", c.design);
  validate(c.design);

  if (merged.contains("model")) {
    const Json& m = r.object(merged, "", "model");
    const std::string mp = "/model";
    if (m.contains("elements")) {
      const Json& e = m.at("elements");
      if (e.is_number_integer()) {
        c.model.refinement.elements_x = c.model.refinement.elements_y = e.get<int>();
      } else if (e.is_array() && e.size() == 2 && e[0].is_number_integer() && e[1].is_number_integer()) {
        c.model.refinement.elements_x = e[0].get<int>();
        c.model.refinement.elements_y = e[1].get<int>();
      } else {
        r.error(mp + "/elements", "expected an integer or [nx, ny]");
      }
    }
    c.model.refinement.degree = r.value_or<int>(m, mp, "degree", c.model.refinement.degree);
    c.model.modes = r.value_or<int>(m, mp, "modes", c.model.modes);
    if (c.model.modes < 1) r.error(mp + "/modes", "must be at least 1");
    if (m.contains("load_resistance")) {
      const Json& rl = m.at("load_resistance");
      if (rl.is_string() && rl.get<std::string>() == "optimal") {
        c.model.fixed_resistance.reset();
      } else {
        const double v = r.quantity(rl, mp + "/load_resistance", Dim::Resistance);
        if (!(v > 0.0)) r.error(mp + "/load_resistance", "must be positive");
        c.model.fixed_resistance = v;
      }
    }
    if (m.contains("resistance_bounds")) {
      const Json& b = m.at("resistance_bounds");
      if (!b.is_array() || b.size() != 2) r.error(mp + "/resistance_bounds", "expected [lo, hi]");
      c.model.resistance_bounds.lo = r.quantity(b[0], mp + "/resistance_bounds/0", Dim::Resistance);
      c.model.resistance_bounds.hi = r.quantity(b[1], mp + "/resistance_bounds/1", Dim::Resistance);
      if (!(c.model.resistance_bounds.lo > 0.0) || !(c.model.resistance_bounds.hi > c.model.resistance_bounds.lo))
        r.error(mp + "/resistance_bounds", "need 0 < lo < hi");
    }
  }

  if (merged.contains("solver")) {
    const Json& s = r.object(merged, "", "solver");
    c.simulation.ode.rtol = r.value_or<double>(s, "/solver", "rtol", c.simulation.ode.rtol);
    c.simulation.ode.atol = r.value_or<double>(s, "/solver", "atol", c.simulation.ode.atol);
    if (!(c.simulation.ode.rtol > 0.0) || !(c.simulation.ode.atol > 0.0))
      r.error("/solver", "tolerances must be positive");
  }

  if (merged.contains("free")) {
    const Json& f = r.object(merged, "", "free");
    for (const auto& [key, val] : f.items()) {
      const std::string fp = "/free/" + key;
      const auto var = parse_design_var(key);
      if (!var) r.error(fp, "unknown design variable (use L, R, l or H)");
      if (!val.is_array() || val.size() != 2) r.error(fp, "expected [lo, hi]");
      FreeVariable fv{*var, r.quantity(val[0], fp + "/0", design_var_dim(*var)),
                      r.quantity(val[1], fp + "/1", design_var_dim(*var))};
      if (!(fv.lo <= fv.hi)) r.error(fp, "lower bound exceeds upper bound");
      c.free.push_back(fv);
    }
  }

  if (merged.contains("pso")) {
    const Json& p = r.object(merged, "", "pso");
    c.pso.particles = r.value_or<int>(p, "/pso", "particles", c.pso.particles);
    c.pso.iterations = r.value_or<int>(p, "/pso", "iterations", c.pso.iterations);
    c.pso.inertia = r.value_or<double>(p, "/pso", "inertia", c.pso.inertia);
    c.pso.cognitive = r.value_or<double>(p, "/pso", "cognitive", c.pso.cognitive);
    c.pso.social = r.value_or<double>(p, "/pso", "social", c.pso.social);
    c.pso.plateau_tolerance = r.value_or<double>(p, "/pso", "plateau_tolerance", c.pso.plateau_tolerance);
    c.pso.plateau_window = r.value_or<int>(p, "/pso", "plateau_window", c.pso.plateau_window);
    if (c.pso.particles < 1 || c.pso.iterations < 0) r.error("/pso", "particles >= 1 and iterations >= 0 required");
  }

  if (merged.contains("events")) {
    const Json& e = r.object(merged, "", "events");
    c.events.threshold = r.quantity_or(e, "/events", "threshold", Dim::Acceleration, c.events.threshold);
    c.events.window = r.quantity_or(e, "/events", "window", Dim::Time, c.events.window);
    c.events.peak_at = r.quantity_or(e, "/events", "peak_at", Dim::Time, c.events.peak_at);
    c.events.min_separation = r.quantity_or(e, "/events", "min_separation", Dim::Time, c.events.min_separation);
  }
  if (merged.contains("quiet")) {
    const Json& q = r.object(merged, "", "quiet");
    c.quiet.count = r.value_or<int>(q, "/quiet", "count", c.quiet.count);
    c.quiet.window = r.quantity_or(q, "/quiet", "window", Dim::Time, c.quiet.window);
    c.quiet.threshold = r.quantity_or(q, "/quiet", "threshold", Dim::Acceleration, c.events.threshold);
  } else {
    c.quiet.threshold = c.events.threshold;
  }
  if (merged.contains("cluster")) {
    const Json& k = r.object(merged, "", "cluster");
    c.cluster.k_min = r.value_or<int>(k, "/cluster", "k_min", c.cluster.k_min);
    c.cluster.k_max = r.value_or<int>(k, "/cluster", "k_max", c.cluster.k_max);
    c.cluster.restarts = r.value_or<int>(k, "/cluster", "restarts", c.cluster.restarts);
  }

  c.seed = r.value_or<std::uint64_t>(merged, "", "seed", c.seed);
  c.threads = r.value_or<unsigned>(merged, "", "threads", c.threads);
  c.output_dir = r.value_or<std::string>(merged, "", "output_dir", c.output_dir);
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  const Json j = parse_json_text(read_text_file(path), path.string());
  return parse_config(j, path.string(), path.parent_path());
}

}  // namespace peh
