#include "common.hpp"

using namespace peh;
using peh::test::rel;

namespace {

const Refinement kCoarse{6, 6, 3};

double device_mass(const DeviceGeometry& g, const MaterialSet& m) {
  return m.rho_p * g.piezo_volume() + m.rho_s * g.substructure_volume();
}

}  // namespace

TEST(Assembly, MatricesAreSymmetricPositiveDefinite) {
  const auto a = assemble(verification_geometry(), verification_materials(), kCoarse);
  const double sm = (a.M - a.M.transpose()).cwiseAbs().maxCoeff() / a.M.cwiseAbs().maxCoeff();
  const double sk = (a.K - a.K.transpose()).cwiseAbs().maxCoeff() / a.K.cwiseAbs().maxCoeff();
  EXPECT_LT(sm, 1e-12);
  EXPECT_LT(sk, 1e-12);
  EXPECT_EQ(Eigen::LLT<Eigen::MatrixXd>(a.M).info(), Eigen::Success);
  EXPECT_EQ(Eigen::LLT<Eigen::MatrixXd>(a.K).info(), Eigen::Success);
}

TEST(Assembly, RayleighDampingIsExact) {
  const auto a = assemble(verification_geometry(), verification_materials(), kCoarse);
  const Eigen::MatrixXd C = 14.65 * a.M + 1e-5 * a.K;
  EXPECT_LT((a.C - C).cwiseAbs().maxCoeff(), 1e-12 * C.cwiseAbs().maxCoeff());
}

TEST(Assembly, TranslationalForcingSumsToDeviceMass) {
  const MaterialSet m = verification_materials();
  for (double l : {1.0, 0.5, 0.3}) {
    const DeviceGeometry g = design_to_geometry({0.25, 0.6, l, 0.2, 1.2e-3});
    const auto full = assemble_full(build_patch(g, {7, 5, 3}), g, m);
    EXPECT_LT(rel(full.F_translational.sum(), device_mass(g, m)), 1e-12) << "l=" << l;
    EXPECT_LT(full.F_rotary.cwiseAbs().maxCoeff(), 1e-12 * full.F_translational.cwiseAbs().maxCoeff());
    // Rigid translation: 1^T M_trans 1 equals the mass as well.
    EXPECT_LT(rel(full.M.sum(), device_mass(g, m)), 1e-9);
  }
}

TEST(Assembly, ZeroDensityGivesNoInertia) {
  MaterialSet m = verification_materials();
  m.rho_s = m.rho_p = 0.0;
  const auto a = assemble(verification_geometry(), m, kCoarse);
  EXPECT_EQ(a.M.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(a.F.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Assembly, Capacitance) {
  const MaterialSet m = verification_materials();
  const double eps = 1800.0 * 8.854e-12 + 15.9 * 15.9 / 110.9e9;
  const auto a = assemble(verification_geometry(), m, kCoarse);
  ASSERT_TRUE(a.C_p.has_value());
  EXPECT_LT(rel(*a.C_p, eps * 0.04 / 5e-4), 1e-12);

  DeviceGeometry thick = verification_geometry();
  thick.h_p *= 2.0;
  EXPECT_LT(rel(capacitance(thick, m), 0.5 * *a.C_p), 1e-12);
  DeviceGeometry half = verification_geometry();
  half.L_pzt *= 0.5;
  EXPECT_LT(rel(capacitance(half, m), 0.5 * *a.C_p), 1e-12);
}

TEST(Assembly, VanishingPiezoLayer) {
  DeviceGeometry g = verification_geometry();
  g.h_p = 0.0;
  const auto a = assemble(g, verification_materials(), kCoarse);
  EXPECT_FALSE(a.C_p.has_value());
  EXPECT_EQ(a.Theta.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_PEH_ERROR(capacitance(g, verification_materials()), NoPiezo);
  EXPECT_PEH_ERROR(reduce(a, solve_modes(a, 3), 1e3), NoPiezo);
}

TEST(Assembly, CouplingScalesWithPiezoConstant) {
  MaterialSet m = verification_materials();
  const auto a = assemble(verification_geometry(), m, kCoarse);
  m.e31 *= 2.0;
  m.e32 *= 2.0;
  const auto b = assemble(verification_geometry(), m, kCoarse);
  EXPECT_LT((b.Theta - 2.0 * a.Theta).norm(), 1e-12 * a.Theta.norm());
  EXPECT_GT(a.Theta.norm(), 0.0);
}

TEST(Assembly, DensityAndStiffnessScaling) {
  MaterialSet m = verification_materials();
  const auto a = assemble(verification_geometry(), m, kCoarse);
  m.rho_s *= 3.0;
  m.rho_p *= 3.0;
  m.c_s *= 2.0;
  m.c_pE *= 2.0;
  const auto b = assemble(verification_geometry(), m, kCoarse);
  EXPECT_LT((b.M - 3.0 * a.M).cwiseAbs().maxCoeff(), 1e-12 * a.M.cwiseAbs().maxCoeff());
  EXPECT_LT((b.K - 2.0 * a.K).cwiseAbs().maxCoeff(), 1e-12 * a.K.cwiseAbs().maxCoeff());
  // omega scales with sqrt(stiffness / density).
  const double w_a = solve_modes(a, 1).omegas[0], w_b = solve_modes(b, 1).omegas[0];
  EXPECT_LT(rel(w_b, w_a * std::sqrt(2.0 / 3.0)), 1e-9);
}

TEST(Assembly, FirstFrequencyConvergesWithMesh) {
  const auto g = verification_geometry();
  const auto m = verification_materials();
  const double w16 = solve_modes(assemble(g, m, {16, 16, 3}), 1).omegas[0];
  const double w24 = solve_modes(assemble(g, m, {24, 24, 3}), 1).omegas[0];
  EXPECT_LT(rel(w16, w24), 1e-3);
  EXPECT_NEAR(w16 / (2 * std::numbers::pi), 11.88, 0.05);
}
