#pragma once

// Full-order electromechanical system of the bimorph plate:
//   M w'' + C w' + K w - Theta v = F a_b
//   C_p v' + v / R_l + Theta^T w' = 0

#include <optional>

#include <Eigen/Dense>

#include "peh/bspline.hpp"
#include "peh/geometry.hpp"

namespace peh {

/// Through-thickness resultants of one planform zone.
struct Section {
  double mass = 0.0;      // kg/m^2
  double rotary = 0.0;    // kg (integral of rho z^2)
  Eigen::Matrix3d D = Eigen::Matrix3d::Zero();  // bending stiffness
  double coupling = 0.0;  // series-pair lever arm (h_s + h_p) / 2
};

/// Piezo-covered stack (x <= L_pzt): substructure core and two skins.
inline Section covered_section(const DeviceGeometry& g, const MaterialSet& m) {
  const double a = 0.5 * g.h_s;
  const double b = a + g.h_p;
  const double core_z2 = 2.0 * a * a * a / 3.0;
  const double skins_z2 = 2.0 * (b * b * b - a * a * a) / 3.0;
  Section s;
  s.mass = m.rho_s * g.h_s + 2.0 * m.rho_p * g.h_p;
  s.rotary = m.rho_s * core_z2 + m.rho_p * skins_z2;
  s.D = m.c_s * core_z2 + m.c_pE * skins_z2;
  // Each skin contributes h_p (h_s + h_p) / 2 through E = v / (2 h_p).
  s.coupling = g.h_p > 0.0 ? 0.5 * (g.h_s + g.h_p) : 0.0;
  return s;
}

/// Bare slab beyond the skins: substructure over the full thickness h_s + 2 h_p.
inline Section uncovered_section(const DeviceGeometry& g, const MaterialSet& m) {
  const double a = 0.5 * g.total_thickness();
  const double z2 = 2.0 * a * a * a / 3.0;
  Section s;
  s.mass = m.rho_s * 2.0 * a;
  s.rotary = m.rho_s * z2;
  s.D = m.c_s * z2;
  return s;
}

/// Unconstrained matrices over every control point.
struct FullOrderSystem {
  Eigen::MatrixXd M;
  Eigen::MatrixXd K;
  Eigen::VectorXd Theta;
  Eigen::VectorXd F;
  Eigen::VectorXd F_translational;
  Eigen::VectorXd F_rotary;
};

inline FullOrderSystem assemble_full(const BSplinePatch& patch, const DeviceGeometry& geom, const MaterialSet& mat) {
  const int n = patch.num_basis();
  FullOrderSystem sys;
  sys.M = Eigen::MatrixXd::Zero(n, n);
  sys.K = Eigen::MatrixXd::Zero(n, n);
  sys.Theta = Eigen::VectorXd::Zero(n);
  sys.F_translational = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd M_rot = Eigen::MatrixXd::Zero(n, n);

  const Section covered = covered_section(geom, mat);
  const Section bare = uncovered_section(geom, mat);
  const auto& rule = patch.rule();
  const int nq = static_cast<int>(rule.points.size());
  const int p = patch.degree();
  const int na = (p + 1) * (p + 1);

  Eigen::VectorXd N(na), Nx(na), Ny(na);
  Eigen::MatrixXd B(3, na);
  Eigen::MatrixXd Me(na, na), Mr(na, na), Ke(na, na);
  Eigen::VectorXd Te(na), Fe(na);

  for (const auto& el : patch.elements()) {
    const bool piezo = geom.has_piezo() && el.center_x < geom.L_pzt;
    const Section& s = piezo ? covered : bare;
    const double du = 0.5 * (el.u1 - el.u0), dv = 0.5 * (el.v1 - el.v0);
    Me.setZero();
    Mr.setZero();
    Ke.setZero();
    Te.setZero();
    Fe.setZero();
    std::vector<int> idx;
    for (int qv = 0; qv < nq; ++qv) {
      for (int qu = 0; qu < nq; ++qu) {
        const double xi = el.u0 + du * (rule.points[qu] + 1.0);
        const double eta = el.v0 + dv * (rule.points[qv] + 1.0);
        const double w = rule.weights[qu] * rule.weights[qv] * du * dv * patch.jacobian();
        const BasisValues bv = patch.eval_in_span(el.span_u, el.span_v, xi, eta);
        if (idx.empty()) idx = bv.index;
        for (int a = 0; a < na; ++a) {
          N[a] = bv.N[a];
          Nx[a] = bv.Nx[a];
          Ny[a] = bv.Ny[a];
          B(0, a) = -bv.Nxx[a];
          B(1, a) = -bv.Nyy[a];
          B(2, a) = -2.0 * bv.Nxy[a];
        }
        Me.noalias() += (w * s.mass) * N * N.transpose();
        Mr.noalias() += (w * s.rotary) * (Nx * Nx.transpose() + Ny * Ny.transpose());
        Ke.noalias() += w * B.transpose() * s.D * B;
        Fe += (w * s.mass) * N;
        if (piezo) Te += (w * s.coupling) * (mat.e31 * B.row(0).transpose() + mat.e32 * B.row(1).transpose());
      }
    }
    for (int a = 0; a < na; ++a) {
      sys.Theta[idx[a]] += Te[a];
      sys.F_translational[idx[a]] += Fe[a];
      for (int b = 0; b < na; ++b) {
        sys.M(idx[a], idx[b]) += Me(a, b) + Mr(a, b);
        M_rot(idx[a], idx[b]) += Mr(a, b);
        sys.K(idx[a], idx[b]) += Ke(a, b);
      }
    }
  }
  // Rotary-inertia forcing summed over J as written; it vanishes up to
  // round-off because the gradients of a partition of unity sum to zero.
  sys.F_rotary = M_rot * Eigen::VectorXd::Ones(n);
  sys.F = sys.F_translational + sys.F_rotary;
  return sys;
}

/// Series-connected skins: half the capacitance of one layer.
inline double capacitance(const DeviceGeometry& g, const MaterialSet& m) {
  if (!(g.h_p > 0.0) || !(g.L_pzt > 0.0)) fail(ErrorKind::NoPiezo, "no piezoelectric layer to form a capacitor");
  return m.eps33S * g.W * g.L_pzt / (2.0 * g.h_p);
}

inline Eigen::MatrixXd rayleigh_damping(const Eigen::MatrixXd& M, const Eigen::MatrixXd& K, double alpha, double beta) {
  if (M.rows() != K.rows() || M.cols() != K.cols()) fail(ErrorKind::InvalidArgument, "M and K shapes differ");
  return alpha * M + beta * K;
}

/// System restricted to the free (unclamped) degrees of freedom.
struct AssembledModel {
  Eigen::MatrixXd M;
  Eigen::MatrixXd K;
  Eigen::MatrixXd C;
  Eigen::VectorXd Theta;
  Eigen::VectorXd F;
  std::optional<double> C_p;  // absent when the device carries no piezo layer
  DofMap dofs;
  DeviceGeometry geometry;
  MaterialSet materials;
  Refinement refinement;

  int size() const { return static_cast<int>(M.rows()); }
};

inline AssembledModel assemble(const BSplinePatch& patch, const DeviceGeometry& geom, const MaterialSet& mat,
                               const Refinement& ref = {}) {
  const FullOrderSystem full = assemble_full(patch, geom, mat);
  AssembledModel out;
  out.dofs = clamp_first_columns(patch);
  const auto& fr = out.dofs.free;
  const int nf = out.dofs.num_free();
  out.M.resize(nf, nf);
  out.K.resize(nf, nf);
  out.Theta.resize(nf);
  out.F.resize(nf);
  for (int a = 0; a < nf; ++a) {
    out.Theta[a] = full.Theta[fr[a]];
    out.F[a] = full.F[fr[a]];
    for (int b = 0; b < nf; ++b) {
      out.M(a, b) = full.M(fr[a], fr[b]);
      out.K(a, b) = full.K(fr[a], fr[b]);
    }
  }
  out.C = rayleigh_damping(out.M, out.K, mat.alpha, mat.beta);
  if (geom.has_piezo()) out.C_p = capacitance(geom, mat);
  out.geometry = geom;
  out.materials = mat;
  out.refinement = ref;
  return out;
}

/// Patch construction plus assembly for a device.
inline AssembledModel assemble(const DeviceGeometry& geom, const MaterialSet& mat, const Refinement& ref = {}) {
  const BSplinePatch patch = build_patch(geom, ref);
  return assemble(patch, geom, mat, ref);
}

}  // namespace peh
