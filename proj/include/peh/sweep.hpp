#pragma once

// Two-parameter design sweeps (Design 1/2/3) producing omega_o, H_o, R_l* and
// zeta_1 on a grid, plus the per-frequency optimal-geometry front.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "peh/harvester.hpp"
#include "peh/optimization.hpp"
#include "peh/parallel.hpp"

namespace peh {

struct SweepScenario {
  std::string name;
  DesignVector base;
  FreeVariable first;   // L in all bundled scenarios
  FreeVariable second;
};

/// Design 1: H = 0.25, l = 1, grid over L in [0.1, 0.5] m and R in [0.3, 1].
inline SweepScenario design1(double h = 1e-3) {
  return {"design1", {0.3, 1.0, 1.0, 0.25, h}, {DesignVar::L, 0.10, 0.50}, {DesignVar::R, 0.3, 1.0}};
}
/// Design 2: R = 1, l = 1, grid over L and H in [0.05, 0.45].
inline SweepScenario design2(double h = 1e-3) {
  return {"design2", {0.3, 1.0, 1.0, 0.25, h}, {DesignVar::L, 0.10, 0.50}, {DesignVar::H, 0.05, 0.45}};
}
/// Design 3: R = 1, H = 0.25, grid over L and l in [0.1, 1].
inline SweepScenario design3(double h = 1e-3) {
  return {"design3", {0.3, 1.0, 1.0, 0.25, h}, {DesignVar::L, 0.10, 0.50}, {DesignVar::l, 0.1, 1.0}};
}

struct SweepRow {
  int i = 0;  // index along the first variable
  int j = 0;  // index along the second variable
  DesignVector x;
  double omega_o = std::numeric_limits<double>::quiet_NaN();
  double H_o = std::numeric_limits<double>::quiet_NaN();
  double R_l = std::numeric_limits<double>::quiet_NaN();
  double zeta1 = std::numeric_limits<double>::quiet_NaN();
  std::string error;  // empty when the point succeeded

  bool ok() const { return error.empty(); }
};

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) v[static_cast<std::size_t>(k)] = n == 1 ? a : a + (b - a) * k / (n - 1);
  return v;
}

/// Row-major in (first, second): row index = i * n2 + j. Failing points keep
/// NaN values and an error message; the sweep continues.
inline std::vector<SweepRow> sweep_design(const SweepScenario& sc, int n1, int n2, const MaterialSet& mat,
                                          const ModelSettings& settings, unsigned threads = 1) {
  if (n1 < 1 || n2 < 1) fail(ErrorKind::InvalidArgument, "sweep grid must have at least one point per axis");
  const auto a = linspace(sc.first.lo, sc.first.hi, n1);
  const auto b = linspace(sc.second.lo, sc.second.hi, n2);
  std::vector<SweepRow> rows(static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2));
  parallel_for(rows.size(), threads, [&](std::size_t k) {
    SweepRow& r = rows[k];
    r.i = static_cast<int>(k) / n2;
    r.j = static_cast<int>(k) % n2;
    r.x = sc.base;
    component(r.x, sc.first.var) = a[static_cast<std::size_t>(r.i)];
    component(r.x, sc.second.var) = b[static_cast<std::size_t>(r.j)];
    try {
      const HarvesterModel hm = build_harvester(r.x, mat, settings);
      r.omega_o = hm.omega_o;
      r.H_o = hm.H_o;
      r.R_l = hm.reduced.R_l;
      r.zeta1 = hm.reduced.zeta[0];
    } catch (const Error& e) {
      r.error = e.what();
    }
  });
  return rows;
}

struct FrontPoint {
  double omega_lo = 0.0;
  double omega_hi = 0.0;
  int row = -1;  // index into the sweep rows with the largest H_o in the band
};

/// Splits the omega_o range into `bins` log-spaced bands and keeps the best H_o
/// per band: the geometry that harvests most for a given tuning frequency.
inline std::vector<FrontPoint> optimal_front(const std::vector<SweepRow>& rows, int bins = 20) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& r : rows)
    if (r.ok()) {
      lo = std::min(lo, r.omega_o);
      hi = std::max(hi, r.omega_o);
    }
  std::vector<FrontPoint> front;
  if (!(hi > lo) || bins < 1) return front;
  const double llo = std::log(lo), lhi = std::log(hi);
  front.resize(static_cast<std::size_t>(bins));
  for (int b = 0; b < bins; ++b) {
    front[static_cast<std::size_t>(b)].omega_lo = std::exp(llo + (lhi - llo) * b / bins);
    front[static_cast<std::size_t>(b)].omega_hi = std::exp(llo + (lhi - llo) * (b + 1) / bins);
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    if (!r.ok()) continue;
    const int b = std::min(bins - 1, static_cast<int>((std::log(r.omega_o) - llo) / (lhi - llo) * bins));
    FrontPoint& f = front[static_cast<std::size_t>(b)];
    if (f.row < 0 || r.H_o > rows[static_cast<std::size_t>(f.row)].H_o) f.row = static_cast<int>(k);
  }
  std::erase_if(front, [](const FrontPoint& f) { return f.row < 0; });
  return front;
}

}  // namespace peh
