#pragma once

// Design vector -> assembled -> reduced model with the load resistance chosen
// per geometry. This is the objective pipeline shared by sweeps and optimization.

#include <algorithm>
#include <optional>

#include "peh/assembly.hpp"
#include "peh/frf.hpp"
#include "peh/modal.hpp"

namespace peh {

struct ModelSettings {
  Refinement refinement;
  int modes = 30;
  ResistanceBounds resistance_bounds;
  NelderMeadOptions resistance_search;
  std::optional<double> fixed_resistance;  // empty: optimal per geometry
};

struct HarvesterModel {
  DesignVector design;
  DeviceGeometry geometry;
  ReducedModel reduced;  // carries the selected R_l
  double omega_o = 0.0;
  double H_o = 0.0;
  bool resistance_converged = true;
};

inline HarvesterModel build_harvester(const DeviceGeometry& geom, const MaterialSet& mat, const ModelSettings& s) {
  const AssembledModel full = assemble(geom, mat, s.refinement);
  const int modes = std::min(s.modes, full.size());
  const ModalBasis basis = solve_modes(full, modes);
  HarvesterModel hm;
  hm.design = geometry_to_design(geom);
  hm.geometry = geom;
  if (s.fixed_resistance) {
    hm.reduced = reduce(full, basis, *s.fixed_resistance);
    const Resonance res = resonance_at_load(hm.reduced, *s.fixed_resistance);
    hm.omega_o = res.omega;
    hm.H_o = res.power;
  } else {
    const ReducedModel probe = reduce(full, basis, 1.0);
    const ResistanceOptimum opt = optimize_resistance(probe, s.resistance_bounds, s.resistance_search);
    hm.reduced = probe.with_load(opt.R_l);
    hm.omega_o = opt.omega_o;
    hm.H_o = opt.H_o;
    hm.resistance_converged = opt.converged;
  }
  return hm;
}

inline HarvesterModel build_harvester(const DesignVector& x, const MaterialSet& mat, const ModelSettings& s) {
  HarvesterModel hm = build_harvester(design_to_geometry(x), mat, s);
  hm.design = x;
  return hm;
}

}  // namespace peh
