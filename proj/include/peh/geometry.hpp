#pragma once

// Harvester geometry, design-vector parameterization and material data.
//
// Lengths are SI metres, stiffnesses Pa, densities kg/m^3. Voigt order for
// all 3x3 plane-stress matrices is (11, 22, 12) with engineering shear strain.

#include <array>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "peh/errors.hpp"

namespace peh {

inline constexpr double kVacuumPermittivity = 8.854e-12;  // F/m

/// Normalized design parameters: total length, aspect ratio W/L, piezo length
/// fraction L_pzt/L, piezo thickness fraction h_p/h, and total thickness.
struct DesignVector {
  double L = 0.0;
  double R = 0.0;
  double l = 0.0;
  double H = 0.0;
  double h = 0.0;

  bool operator==(const DesignVector&) const = default;
};

struct Box {
  double x0, x1, y0, y1, z0, z1;
  double volume() const { return (x1 - x0) * (y1 - y0) * (z1 - z0); }
};

struct DeviceGeometry {
  double L = 0.0;
  double W = 0.0;
  double L_pzt = 0.0;
  double h_s = 0.0;
  double h_p = 0.0;

  double total_thickness() const { return h_s + 2.0 * h_p; }
  bool has_piezo() const { return h_p > 0.0 && L_pzt > 0.0; }

  /// Two piezo skins over (0, L_pzt) x (0, W).
  std::array<Box, 2> piezo_domain() const {
    const double a = 0.5 * h_s;
    return {Box{0, L_pzt, 0, W, a, a + h_p}, Box{0, L_pzt, 0, W, -a - h_p, -a}};
  }

  /// Substructure core under the skins plus the full-thickness slab beyond L_pzt.
  std::array<Box, 2> substructure_domain() const {
    const double a = 0.5 * h_s;
    return {Box{0, L_pzt, 0, W, -a, a}, Box{L_pzt, L, 0, W, -a - h_p, a + h_p}};
  }

  double piezo_volume() const {
    const auto d = piezo_domain();
    return d[0].volume() + d[1].volume();
  }
  double substructure_volume() const {
    const auto d = substructure_domain();
    return d[0].volume() + d[1].volume();
  }
};

inline void validate(const DesignVector& x) {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(x.L) || !finite(x.R) || !finite(x.l) || !finite(x.H) || !finite(x.h))
    fail(ErrorKind::InvalidDesign, "non-finite design parameter");
  if (x.L <= 0.0) fail(ErrorKind::InvalidDesign, "L must be positive");
  if (x.h <= 0.0) fail(ErrorKind::InvalidDesign, "h must be positive");
  if (x.R <= 0.0 || x.R > 1.0) fail(ErrorKind::InvalidDesign, "R must lie in (0, 1]");
  if (x.l <= 0.0 || x.l > 1.0) fail(ErrorKind::InvalidDesign, "l must lie in (0, 1]");
  if (x.H <= 0.0 || x.H >= 0.5) fail(ErrorKind::InvalidDesign, "H must lie in (0, 0.5)");
}

inline DeviceGeometry design_to_geometry(const DesignVector& x) {
  validate(x);
  DeviceGeometry g;
  g.L = x.L;
  g.W = x.R * x.L;
  g.L_pzt = x.l * x.L;
  g.h_p = x.H * x.h;
  g.h_s = x.h - 2.0 * g.h_p;
  if (g.W <= 0.0 || g.L_pzt <= 0.0 || g.h_p <= 0.0 || g.h_s <= 0.0)
    fail(ErrorKind::InvalidDesign, "derived dimension is not positive");
  return g;
}

inline DesignVector geometry_to_design(const DeviceGeometry& g) {
  const double h = g.total_thickness();
  return DesignVector{g.L, g.W / g.L, g.L_pzt / g.L, g.h_p / h, h};
}

/// Raw 3-D piezoelectric constants in stiffness (e-) form.
struct PiezoConstants3D {
  double c11, c12, c13, c22, c23, c33, c66;  // Pa
  double e31, e32, e33;                      // C/m^2
  double eps33S;                             // F/m
};

/// Plane-stress quantities after eliminating the transverse normal stress.
struct CondensedPiezo {
  Eigen::Matrix3d c;
  double e31;
  double e32;
  double eps33;
};

inline CondensedPiezo plane_stress_condense(const PiezoConstants3D& r) {
  if (!(r.c33 > 0.0)) fail(ErrorKind::SingularMaterial, "c33 must be positive");
  // Column 3 coupling for in-plane indices (1, 2, 6); shear does not couple.
  const std::array<double, 3> ci3{r.c13, r.c23, 0.0};
  Eigen::Matrix3d c;
  c << r.c11, r.c12, 0.0,
       r.c12, r.c22, 0.0,
       0.0, 0.0, r.c66;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) c(i, j) -= ci3[i] * ci3[j] / r.c33;
  CondensedPiezo out;
  out.c = c;
  out.e31 = r.e31 - r.e33 * r.c13 / r.c33;
  out.e32 = r.e32 - r.e33 * r.c23 / r.c33;
  out.eps33 = r.eps33S + r.e33 * r.e33 / r.c33;
  return out;
}

inline Eigen::Matrix3d isotropic_plane_stress(double E, double nu) {
  if (!(E > 0.0) || !(nu > -1.0 && nu < 0.5)) fail(ErrorKind::SingularMaterial, "invalid isotropic constants");
  const double f = E / (1.0 - nu * nu);
  Eigen::Matrix3d c;
  c << f, f * nu, 0.0,
       f * nu, f, 0.0,
       0.0, 0.0, 0.5 * f * (1.0 - nu);
  return c;
}

/// Strain-charge (d-form) data for a thin piezo sheet, as quoted for
/// commercial bimorphs. Converted with e = d/s and eps^S = eps^T - d^2/s.
struct PiezoStrainForm {
  double s11E;    // m^2/N
  double d31;     // C/N
  double eps33T;  // F/m
  double nu;      // Poisson ratio used for the plane-stress matrix
};

inline CondensedPiezo from_strain_form(const PiezoStrainForm& s) {
  if (!(s.s11E > 0.0)) fail(ErrorKind::SingularMaterial, "s11E must be positive");
  CondensedPiezo out;
  out.c = isotropic_plane_stress(1.0 / s.s11E, s.nu);
  out.e31 = s.d31 / s.s11E;
  out.e32 = out.e31;
  out.eps33 = s.eps33T - s.d31 * s.d31 / s.s11E;
  if (!(out.eps33 > 0.0)) fail(ErrorKind::SingularMaterial, "clamped permittivity is not positive");
  return out;
}

struct MaterialSet {
  double rho_s = 0.0;
  Eigen::Matrix3d c_s = Eigen::Matrix3d::Zero();
  double rho_p = 0.0;
  Eigen::Matrix3d c_pE = Eigen::Matrix3d::Zero();
  double e31 = 0.0;  // condensed
  double e32 = 0.0;
  double eps33S = 0.0;  // condensed, F/m
  double alpha = 0.0;   // mass-proportional damping [rad/s]
  double beta = 0.0;    // stiffness-proportional damping [s/rad]

  static MaterialSet from_parts(double rho_s, const Eigen::Matrix3d& c_s, double rho_p, const CondensedPiezo& p,
                                double alpha, double beta) {
    MaterialSet m;
    m.rho_s = rho_s;
    m.c_s = c_s;
    m.rho_p = rho_p;
    m.c_pE = p.c;
    m.e31 = p.e31;
    m.e32 = p.e32;
    m.eps33S = p.eps33;
    m.alpha = alpha;
    m.beta = beta;
    return m;
  }
};

inline bool is_spd(const Eigen::Matrix3d& c) {
  if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-12 * c.cwiseAbs().maxCoeff()) return false;
  Eigen::LLT<Eigen::Matrix3d> llt(c);
  return llt.info() == Eigen::Success;
}

inline void validate(const MaterialSet& m) {
  if (!(m.rho_s > 0.0) || !(m.rho_p > 0.0)) fail(ErrorKind::SingularMaterial, "densities must be positive");
  if (!is_spd(m.c_s)) fail(ErrorKind::SingularMaterial, "substructure stiffness is not SPD");
  if (!is_spd(m.c_pE)) fail(ErrorKind::SingularMaterial, "piezo stiffness is not SPD");
  if (!(m.eps33S > 0.0)) fail(ErrorKind::SingularMaterial, "permittivity must be positive");
  if (m.alpha < 0.0 || m.beta < 0.0) fail(ErrorKind::SingularMaterial, "damping coefficients must be non-negative");
}

/// Bronze substructure with PZT-5A skins: the verification material set.
inline MaterialSet verification_materials(double alpha = 14.65, double beta = 1e-5) {
  PiezoConstants3D raw{};
  raw.c11 = raw.c22 = 120.3e9;
  raw.c12 = 75.2e9;
  raw.c13 = raw.c23 = 75.1e9;
  raw.c33 = 110.9e9;
  raw.c66 = 22.7e9;
  raw.e31 = raw.e32 = -5.2;
  raw.e33 = 15.9;
  raw.eps33S = 1800.0 * kVacuumPermittivity;
  return MaterialSet::from_parts(9000.0, isotropic_plane_stress(105e9, 0.3), 7800.0, plane_stress_condense(raw), alpha,
                                 beta);
}

/// 200 x 200 mm plate, full coverage, 0.25 mm skins on a 0.5 mm core.
inline DeviceGeometry verification_geometry() { return DeviceGeometry{0.2, 0.2, 0.2, 0.5e-3, 0.25e-3}; }

}  // namespace peh
