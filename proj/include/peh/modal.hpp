#pragma once

// Modal order reduction of the assembled system onto its first K undamped modes.

#include <cmath>

#include <Eigen/Dense>

#include "peh/assembly.hpp"

namespace peh {

/// Mass-normalized modes: Phi^T M Phi = I, so the reduced mass is the identity.
struct ModalBasis {
  Eigen::VectorXd omegas;  // rad/s, ascending
  Eigen::MatrixXd Phi;     // free dofs x K
  Eigen::MatrixXd m_o;     // K x K

  int size() const { return static_cast<int>(omegas.size()); }
};

inline ModalBasis solve_modes(const AssembledModel& model, int count) {
  const int n = model.size();
  if (count < 1 || count > n)
    fail(ErrorKind::InvalidArgument, "mode count must lie in [1, " + std::to_string(n) + "]");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(model.K, model.M,
                                                                    Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success) fail(ErrorKind::EigenFailure, "generalized eigensolver failed (M not SPD?)");
  ModalBasis basis;
  basis.omegas.resize(count);
  for (int i = 0; i < count; ++i) {
    const double lambda = solver.eigenvalues()[i];
    if (!(lambda > 0.0)) fail(ErrorKind::EigenFailure, "non-positive eigenvalue; stiffness is not definite");
    basis.omegas[i] = std::sqrt(lambda);
  }
  basis.Phi = solver.eigenvectors().leftCols(count);
  basis.m_o = basis.Phi.transpose() * model.M * basis.Phi;
  return basis;
}

/// Modal damping ratio of a Rayleigh-damped mode.
inline double rayleigh_zeta(double omega, double alpha, double beta) { return 0.5 * (alpha / omega + beta * omega); }

/// Diagonal K-mode electromechanical system:
///   eta'' + c eta' + k eta - theta v = f a_b
///   C_p v' + v / R_l + coupling^T eta' = 0
struct ReducedModel {
  Eigen::VectorXd omega;
  Eigen::VectorXd zeta;
  Eigen::VectorXd k;  // omega^2
  Eigen::VectorXd c;  // 2 zeta omega
  Eigen::VectorXd theta;
  Eigen::VectorXd f;
  Eigen::VectorXd coupling;
  double C_p = 0.0;
  double R_l = 0.0;

  int modes() const { return static_cast<int>(omega.size()); }

  ReducedModel with_load(double resistance) const {
    ReducedModel r = *this;
    r.R_l = resistance;
    return r;
  }
};

inline ReducedModel reduce(const AssembledModel& model, const ModalBasis& basis, double R_l) {
  if (!model.C_p) fail(ErrorKind::NoPiezo, "device has no piezo layer; no electrical circuit to reduce");
  if (!(R_l > 0.0)) fail(ErrorKind::InvalidArgument, "load resistance must be positive");
  const double alpha = model.materials.alpha, beta = model.materials.beta;
  ReducedModel r;
  r.omega = basis.omegas;
  r.k = basis.omegas.array().square();
  r.zeta = basis.omegas.unaryExpr([&](double w) { return rayleigh_zeta(w, alpha, beta); });
  r.c = 2.0 * r.zeta.cwiseProduct(r.omega);
  // m_o = I, so the reduced vectors are plain projections.
  r.theta = basis.Phi.transpose() * model.Theta;
  r.f = basis.Phi.transpose() * model.F;
  r.coupling = r.theta;
  r.C_p = *model.C_p;
  r.R_l = R_l;
  return r;
}

}  // namespace peh
