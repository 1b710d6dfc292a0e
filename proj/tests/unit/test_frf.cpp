#include "common.hpp"

using namespace peh;
using peh::test::one_mode;
using peh::test::rel;

namespace {

/// Dense solve of the coupled (K+1) x (K+1) frequency-domain system.
Complex dense_voltage(const ReducedModel& r, double w) {
  const int K = r.modes();
  const Complex iw(0.0, w);
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(K + 1, K + 1);
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(K + 1);
  for (int i = 0; i < K; ++i) {
    A(i, i) = r.k[i] - w * w + iw * r.c[i];
    A(i, K) = -r.theta[i];
    A(K, i) = iw * r.coupling[i];
    b[i] = r.f[i];
  }
  A(K, K) = 1.0 / r.R_l + iw * r.C_p;
  return A.partialPivLu().solve(b)[K];
}

const ReducedModel& coarse() {
  static const ReducedModel r = [] {
    const auto a = assemble(verification_geometry(), verification_materials(), {6, 6, 3});
    return reduce(a, solve_modes(a, 10), 1e4);
  }();
  return r;
}

}  // namespace

TEST(Frf, ZeroAtDc) {
  EXPECT_EQ(voltage_frf(coarse(), 0.0), Complex(0.0, 0.0));
  EXPECT_EQ(power_frf(coarse(), 0.0), 0.0);
}

TEST(Frf, SingleModeMatchesCoupledSolve) {
  const ReducedModel r = one_mode(100.0, 0.02, 3e-3, -0.05, 1e-7, 2e4);
  for (double w : {1.0, 50.0, 99.0, 100.0, 101.0, 300.0}) {
    const Complex h = voltage_frf(r, w), d = dense_voltage(r, w);
    EXPECT_LT(std::abs(h - d), 1e-12 * std::abs(d)) << w;
  }
}

TEST(Frf, MultiModeMatchesDenseLu) {
  for (double R : {1e2, 1e4, 1e7})
    for (double w : {5.0, 74.0, 80.0, 500.0, 3000.0}) {
      const ReducedModel r = coarse().with_load(R);
      const Complex h = voltage_frf(r, w), d = dense_voltage(r, w);
      EXPECT_LT(std::abs(h - d), 1e-10 * std::abs(d)) << "R=" << R << " w=" << w;
      EXPECT_GE(power_frf(r, w), 0.0);
    }
}

TEST(Frf, LinearInForcing) {
  ReducedModel r = coarse();
  const Complex h = voltage_frf(r, 80.0);
  r.f *= 2.0;
  EXPECT_LT(std::abs(voltage_frf(r, 80.0) - 2.0 * h), 1e-12 * std::abs(h));
}

TEST(Frf, ShortCircuitLimit) {
  const ReducedModel r = coarse().with_load(1e-2);
  EXPECT_LT(std::abs(voltage_frf(r, 74.0)), 1e-3 * std::abs(voltage_frf(coarse(), 74.0)));
  const Resonance res = find_resonance(r);
  EXPECT_LT(rel(res.omega, r.omega[0]), 5e-3);
}

TEST(Frf, ResonanceNearFirstMode) {
  for (double R : {1e2, 1e4, 1e6}) {
    const Resonance res = find_resonance(coarse().with_load(R));
    EXPECT_TRUE(res.interior);
    EXPECT_LT(rel(res.omega, coarse().omega[0]), 0.1);
    EXPECT_GE(res.power, power_frf(coarse().with_load(R), 0.98 * res.omega));
    EXPECT_GE(res.power, power_frf(coarse().with_load(R), 1.02 * res.omega));
  }
}

TEST(Frf, NoPeakWhenMaximumIsOnBracketEdge) {
  ReducedModel r = coarse();
  r.f[0] = 0.0;
  r.theta[0] = r.coupling[0] = 0.0;
  r.omega[1] = r.omega[0] * 1.6;
  r.k[1] = r.omega[1] * r.omega[1];
  EXPECT_PEH_ERROR(find_resonance(r), NoPeak);
  EXPECT_FALSE(locate_resonance(coarse(), 3.0 * coarse().omega[0], 3.5 * coarse().omega[0]).interior);
}

TEST(Frf, OptimalResistanceMatchesFineGrid) {
  const ResistanceOptimum opt = optimize_resistance(coarse());
  double best_r = 0.0, best_h = -1.0;
  for (int i = 0; i < 400; ++i) {
    const double R = std::pow(10.0, 2.0 + 5.0 * i / 399.0);
    const double h = resonance_at_load(coarse(), R).power;
    if (h > best_h) {
      best_h = h;
      best_r = R;
    }
  }
  EXPECT_LT(rel(opt.R_l, best_r), 0.02);
  EXPECT_GE(opt.H_o, best_h * (1.0 - 1e-9));
  EXPECT_TRUE(opt.converged);
}

TEST(Frf, OptimalResistanceInsensitiveToSimplexStart) {
  const ResistanceOptimum base = optimize_resistance(coarse());
  for (double shift : {-0.2, 0.2}) {
    const auto o = optimize_resistance(coarse(), {}, {}, std::log10(base.R_l) + shift);
    EXPECT_LT(rel(o.R_l, base.R_l), 0.05);
  }
}

TEST(Frf, PowerContinuousAcrossLoadGrid) {
  double prev = -1.0, worst = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const double R = std::pow(10.0, 2.0 + 5.0 * i / 1999.0);
    const double h = resonance_at_load(coarse(), R).power;
    if (prev > 0.0) worst = std::max(worst, std::abs(h - prev) / prev);
    prev = h;
  }
  EXPECT_LT(worst, 0.01);
}

TEST(Frf, OptimumDominatesEveryLoad) {
  const ResistanceOptimum opt = optimize_resistance(coarse());
  for (double R : {1e2, 1e3, 3e3, 3e4, 1e5, 1e7})
    EXPECT_LE(resonance_at_load(coarse(), R).power, opt.H_o * (1.0 + 1e-9));
}

TEST(Frf, RejectsInvalidLoad) {
  EXPECT_PEH_ERROR(voltage_frf(coarse().with_load(0.0), 10.0), InvalidArgument);
  EXPECT_PEH_ERROR(optimize_resistance(coarse(), {1e5, 1e3}), InvalidArgument);
}
