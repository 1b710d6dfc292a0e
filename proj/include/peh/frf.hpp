#pragma once

// Voltage and power frequency response of the reduced harvester, first-resonance
// location and load-resistance selection.

#include <cmath>
#include <complex>
#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

#include "peh/errors.hpp"
#include "peh/modal.hpp"
#include "peh/nelder_mead.hpp"

namespace peh {

using Complex = std::complex<double>;

/// Output voltage per unit base acceleration [V s^2/m].
///
/// With the modal matrices diagonal, the K x K system
///   (diag(-w^2 + i w c + k) + i w g theta coupling^T) q = f
/// is inverted with the Sherman-Morrison identity, so each frequency costs O(K).
/// The sign follows the time-domain circuit equation, V = -i w g coupling^T q.
inline Complex voltage_frf(const ReducedModel& r, double omega) {
  if (!(r.R_l > 0.0)) fail(ErrorKind::InvalidArgument, "load resistance must be positive");
  if (omega == 0.0) return {0.0, 0.0};
  const Complex iw(0.0, omega);
  const Complex g = 1.0 / (1.0 / r.R_l + iw * r.C_p);
  Complex s_f = 0.0, s_t = 0.0;
  for (int i = 0; i < r.modes(); ++i) {
    const Complex d = Complex(r.k[i] - omega * omega, omega * r.c[i]);
    s_f += r.coupling[i] * r.f[i] / d;
    s_t += r.coupling[i] * r.theta[i] / d;
  }
  const Complex denom = 1.0 + iw * g * s_t;
  if (std::abs(denom) == 0.0 || !std::isfinite(std::abs(denom)))
    fail(ErrorKind::SingularSystem, "electromechanical system is singular at this frequency");
  return -iw * g * s_f / denom;
}

/// |H_v|^2 / R_l [W s^4/m^2].
inline double power_frf(const ReducedModel& r, double omega) { return std::norm(voltage_frf(r, omega)) / r.R_l; }

struct Resonance {
  double omega = 0.0;
  double power = 0.0;
  bool interior = false;  // false when the bracket maximum sits on an end point
};

/// Maximum of H_p on [lo, hi]: log-spaced scan refined by golden section.
inline Resonance locate_resonance(const ReducedModel& r, double lo, double hi, int grid_points = 200) {
  if (!(lo > 0.0) || !(hi > lo)) fail(ErrorKind::InvalidArgument, "invalid resonance bracket");
  const double llo = std::log(lo), lhi = std::log(hi);
  int best = 0;
  double best_p = -1.0;
  std::vector<double> w(grid_points);
  for (int i = 0; i < grid_points; ++i) {
    w[i] = std::exp(llo + (lhi - llo) * i / (grid_points - 1));
    const double p = power_frf(r, w[i]);
    if (p > best_p) {
      best_p = p;
      best = i;
    }
  }
  if (best == 0 || best == grid_points - 1) return {w[best], best_p, false};

  constexpr double inv_phi = 0.6180339887498949;
  double a = w[best - 1], b = w[best + 1];
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double pc = power_frf(r, c), pd = power_frf(r, d);
  while (b - a > 1e-10 * b) {
    if (pc > pd) {
      b = d;
      d = c;
      pd = pc;
      c = b - inv_phi * (b - a);
      pc = power_frf(r, c);
    } else {
      a = c;
      c = d;
      pc = pd;
      d = a + inv_phi * (b - a);
      pd = power_frf(r, d);
    }
  }
  const double wm = 0.5 * (a + b);
  const double pm = power_frf(r, wm);
  if (pm < best_p) return {w[best], best_p, true};
  return {wm, pm, true};
}

/// First-resonance frequency omega_o, searched on [0.5 omega_1, 1.5 omega_1].
inline Resonance find_resonance(const ReducedModel& r) {
  if (r.modes() < 1) fail(ErrorKind::InvalidArgument, "reduced model has no modes");
  const double w1 = r.omega[0];
  Resonance res = locate_resonance(r, 0.5 * w1, 1.5 * w1);
  if (!res.interior) fail(ErrorKind::NoPeak, "power FRF has no interior maximum around the first mode");
  return res;
}

struct ResistanceBounds {
  double lo = 1e2;
  double hi = 1e7;
};

struct ResistanceOptimum {
  double R_l = 0.0;
  double omega_o = 0.0;
  double H_o = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// H_p at the first resonance for a given load (omega_o tracks R_l).
inline Resonance resonance_at_load(const ReducedModel& r, double R_l) {
  const ReducedModel loaded = r.with_load(R_l);
  return locate_resonance(loaded, 0.5 * r.omega[0], 1.5 * r.omega[0]);
}

/// Nelder-Mead in log10(R_l) maximizing H_p(omega_o(R_l), R_l).
/// A coarse log scan seeds the simplex; `start_log10` overrides it.
inline ResistanceOptimum optimize_resistance(const ReducedModel& r, const ResistanceBounds& bounds = {},
                                             const NelderMeadOptions& nm = {},
                                             std::optional<double> start_log10 = std::nullopt) {
  if (!(bounds.lo > 0.0) || !(bounds.hi > bounds.lo)) fail(ErrorKind::InvalidArgument, "invalid resistance bounds");
  const double xlo = std::log10(bounds.lo), xhi = std::log10(bounds.hi);
  auto clamp_x = [&](double x) { return std::clamp(x, xlo, xhi); };
  auto objective = [&](const Eigen::VectorXd& x) {
    return -resonance_at_load(r, std::pow(10.0, clamp_x(x[0]))).power;
  };

  double x0;
  if (start_log10) {
    x0 = clamp_x(*start_log10);
  } else {
    constexpr int scan = 13;
    double best = std::numeric_limits<double>::infinity();
    x0 = xlo;
    for (int i = 0; i < scan; ++i) {
      const double x = xlo + (xhi - xlo) * i / (scan - 1);
      const double v = objective(Eigen::VectorXd::Constant(1, x));
      if (v < best) {
        best = v;
        x0 = x;
      }
    }
  }
  const double step = x0 + 0.25 <= xhi ? 0.25 : -0.25;
  const NelderMeadResult res = nelder_mead(objective, Eigen::VectorXd::Constant(1, x0), Eigen::VectorXd::Constant(1, step), nm);

  ResistanceOptimum out;
  out.R_l = std::pow(10.0, clamp_x(res.x[0]));
  const Resonance at = resonance_at_load(r, out.R_l);
  out.omega_o = at.omega;
  out.H_o = at.power;
  out.converged = res.converged;
  out.iterations = res.iterations;
  return out;
}

}  // namespace peh
