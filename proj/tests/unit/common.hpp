#pragma once

#include <cmath>
#include <optional>
#include <random>

#include <gtest/gtest.h>

#include "peh/peh.hpp"

namespace peh::test {

inline ModelSettings coarse_settings(int elements = 6, int modes = 10) {
  ModelSettings s;
  s.refinement = {elements, elements, 3};
  s.modes = modes;
  return s;
}

/// Runs `fn` and returns the kind of the peh::Error it throws.
template <class Fn>
std::optional<ErrorKind> error_kind(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

#define EXPECT_PEH_ERROR(stmt, k) EXPECT_EQ(::peh::test::error_kind([&] { stmt; }), std::optional(::peh::ErrorKind::k))

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// Hand-built single-mode reduced system.
inline ReducedModel one_mode(double omega, double zeta, double theta, double f, double C_p, double R_l) {
  ReducedModel r;
  r.omega = Eigen::VectorXd::Constant(1, omega);
  r.zeta = Eigen::VectorXd::Constant(1, zeta);
  r.k = Eigen::VectorXd::Constant(1, omega * omega);
  r.c = Eigen::VectorXd::Constant(1, 2.0 * zeta * omega);
  r.theta = Eigen::VectorXd::Constant(1, theta);
  r.coupling = r.theta;
  r.f = Eigen::VectorXd::Constant(1, f);
  r.C_p = C_p;
  r.R_l = R_l;
  return r;
}

}  // namespace peh::test
