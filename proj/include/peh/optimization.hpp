#pragma once

// Event-driven design optimization: per-event PSO, cross-event energy,
// clustering of optimal designs into candidates, and candidate evaluation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "peh/errors.hpp"
#include "peh/events.hpp"
#include "peh/harvester.hpp"
#include "peh/kmeans.hpp"
#include "peh/parallel.hpp"
#include "peh/pso.hpp"
#include "peh/simulation.hpp"

namespace peh {

enum class DesignVar { L, R, l, H };

inline const char* name(DesignVar v) {
  switch (v) {
    case DesignVar::L: return "L";
    case DesignVar::R: return "R";
    case DesignVar::l: return "l";
    case DesignVar::H: return "H";
  }
  return "?";
}

inline std::optional<DesignVar> parse_design_var(const std::string& s) {
  if (s == "L") return DesignVar::L;
  if (s == "R") return DesignVar::R;
  if (s == "l") return DesignVar::l;
  if (s == "H") return DesignVar::H;
  return std::nullopt;
}

inline double& component(DesignVector& x, DesignVar v) {
  switch (v) {
    case DesignVar::L: return x.L;
    case DesignVar::R: return x.R;
    case DesignVar::l: return x.l;
    case DesignVar::H: return x.H;
  }
  return x.L;
}

inline double component(const DesignVector& x, DesignVar v) { return component(const_cast<DesignVector&>(x), v); }

struct FreeVariable {
  DesignVar var;
  double lo;
  double hi;
};

struct OptimizationScenario {
  std::vector<FreeVariable> free;
  DesignVector base;  // values of the fixed variables (and h)
  MaterialSet materials;
  ModelSettings model;
  PsoOptions pso;
  SimulationOptions simulation;
  unsigned threads = 1;  // event-level workers

  int dimension() const { return static_cast<int>(free.size()); }

  Eigen::VectorXd lower() const {
    Eigen::VectorXd v(dimension());
    for (int i = 0; i < dimension(); ++i) v[i] = free[i].lo;
    return v;
  }
  Eigen::VectorXd upper() const {
    Eigen::VectorXd v(dimension());
    for (int i = 0; i < dimension(); ++i) v[i] = free[i].hi;
    return v;
  }

  DesignVector design(const Eigen::VectorXd& z) const {
    DesignVector x = base;
    for (int i = 0; i < dimension(); ++i) component(x, free[i].var) = z[i];
    return x;
  }

  Eigen::VectorXd coordinates(const DesignVector& x) const {
    Eigen::VectorXd z(dimension());
    for (int i = 0; i < dimension(); ++i) z[i] = component(x, free[i].var);
    return z;
  }
};

inline void validate(const OptimizationScenario& s) {
  if (s.free.empty()) fail(ErrorKind::ConfigError, "scenario needs at least one free design variable");
  for (std::size_t i = 0; i < s.free.size(); ++i) {
    const FreeVariable& f = s.free[i];
    for (std::size_t j = 0; j < i; ++j)
      if (s.free[j].var == f.var) fail(ErrorKind::ConfigError, std::string("variable listed twice: ") + name(f.var));
    if (!(f.lo <= f.hi)) fail(ErrorKind::ConfigError, std::string("empty bounds for ") + name(f.var));
    DesignVector a = s.base, b = s.base;
    component(a, f.var) = f.lo;
    component(b, f.var) = f.hi;
    validate(a);
    validate(b);
  }
  validate(s.base);
  validate(s.materials);
}

/// Energy harvested by design x summed over the given signals.
inline double design_energy(const OptimizationScenario& s, const DesignVector& x,
                            std::span<const ExcitationSignal* const> signals) {
  const HarvesterModel hm = build_harvester(x, s.materials, s.model);
  double e = 0.0;
  for (const ExcitationSignal* sig : signals) e += harvested_energy(hm.reduced, *sig, s.simulation);
  return e;
}

inline double design_energy(const OptimizationScenario& s, const DesignVector& x, const ExcitationSignal& signal) {
  const ExcitationSignal* p = &signal;
  return design_energy(s, x, std::span<const ExcitationSignal* const>(&p, 1));
}

struct OptimalDesign {
  int event_id = 0;  // 0 for the quiet-window design
  DesignVector x;
  double energy = 0.0;  // J
  double R_l = 0.0;
  double omega_o = 0.0;
  double H_o = 0.0;
  std::vector<double> trace;
  int failures = 0;
  std::string last_failure;
};

inline std::uint64_t event_seed(std::uint64_t base, int id) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(id) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// PSO over the free variables maximizing the summed energy on `signals`.
inline OptimalDesign optimize_signals(const OptimizationScenario& s, std::span<const ExcitationSignal* const> signals,
                                      int id) {
  validate(s);
  PsoOptions opt = s.pso;
  opt.seed = event_seed(s.pso.seed, id);
  const PsoResult r =
      pso_maximize([&](const Eigen::VectorXd& z) { return design_energy(s, s.design(z), signals); }, s.lower(),
                   s.upper(), opt);
  OptimalDesign d;
  d.event_id = id;
  d.x = s.design(r.best);
  d.energy = std::max(0.0, r.best_value);
  d.trace = r.trace;
  d.failures = r.failures;
  d.last_failure = r.last_failure;
  const HarvesterModel hm = build_harvester(d.x, s.materials, s.model);
  d.R_l = hm.reduced.R_l;
  d.omega_o = hm.omega_o;
  d.H_o = hm.H_o;
  return d;
}

inline OptimalDesign optimize_event(const OptimizationScenario& s, const Event& e) {
  const ExcitationSignal sig = e.signal();
  const ExcitationSignal* p = &sig;
  return optimize_signals(s, std::span<const ExcitationSignal* const>(&p, 1), e.id);
}

/// Single design for the event-free class: maximizes total energy over all quiet windows.
inline OptimalDesign optimize_quiet(const OptimizationScenario& s, const std::vector<ExcitationSignal>& windows) {
  if (windows.empty()) fail(ErrorKind::InvalidArgument, "no quiet windows to optimize on");
  std::vector<const ExcitationSignal*> ptrs;
  for (const auto& w : windows) ptrs.push_back(&w);
  return optimize_signals(s, ptrs, 0);
}

/// Events optimized in parallel (s.threads workers); output ordered like the input.
inline std::vector<OptimalDesign> optimize_events(const OptimizationScenario& s, const std::vector<Event>& events) {
  std::vector<OptimalDesign> out(events.size());
  parallel_for(events.size(), s.threads, [&](std::size_t i) { out[i] = optimize_event(s, events[i]); });
  return out;
}

struct CrossEnergy {
  Eigen::MatrixXd E;       // designs x events, NaN where the simulation failed
  Eigen::VectorXd totals;  // row sums over available entries
  int missing = 0;
  std::vector<std::string> warnings;
};

inline CrossEnergy cross_energy(const std::vector<DesignVector>& designs, const std::vector<ExcitationSignal>& events,
                                const MaterialSet& mat, const ModelSettings& settings,
                                const SimulationOptions& sim = {}, unsigned threads = 1) {
  const auto nd = designs.size(), ne = events.size();
  CrossEnergy ce;
  ce.E = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(nd), static_cast<Eigen::Index>(ne),
                                   std::numeric_limits<double>::quiet_NaN());
  std::vector<std::string> err(nd);
  parallel_for(nd, threads, [&](std::size_t i) {
    std::optional<HarvesterModel> hm;
    try {
      hm = build_harvester(designs[i], mat, settings);
    } catch (const Error& e) {
      err[i] = "design " + std::to_string(i) + ": " + e.what();
      return;
    }
    for (std::size_t j = 0; j < ne; ++j) {
      try {
        ce.E(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            harvested_energy(hm->reduced, events[j], sim);
      } catch (const Error& e) {
        if (err[i].empty()) err[i] = "design " + std::to_string(i) + ": " + e.what();
      }
    }
  });
  ce.totals = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nd));
  for (Eigen::Index i = 0; i < ce.E.rows(); ++i)
    for (Eigen::Index j = 0; j < ce.E.cols(); ++j) {
      if (std::isnan(ce.E(i, j)))
        ++ce.missing;
      else
        ce.totals[i] += ce.E(i, j);
    }
  for (auto& e : err)
    if (!e.empty()) ce.warnings.push_back(std::move(e));
  return ce;
}

struct CandidateReport {
  int k = 0;
  std::vector<int> labels;                  // cluster of each design
  std::vector<DesignVector> candidates;     // de-standardized centroids, clamped to bounds
  std::vector<int> nearest_design;          // index of the closest optimal design per cluster
  std::vector<int> ks;
  std::vector<double> silhouette;
  std::vector<std::string> features;        // feature names actually used
  Eigen::MatrixXd standardized;             // n x d features used for clustering
  Eigen::MatrixXd centroids_standardized;   // k x d
  std::vector<std::string> warnings;
};

/// Features are the free variables of each design plus its total energy,
/// standardized to zero mean and unit variance.
inline CandidateReport cluster_designs(const OptimizationScenario& s, const std::vector<DesignVector>& designs,
                                       const std::vector<double>& totals, int k_min = 2, int k_max = 10,
                                       int restarts = 20, std::uint64_t seed = 1) {
  const int n = static_cast<int>(designs.size());
  if (totals.size() != designs.size()) fail(ErrorKind::InvalidArgument, "one total energy per design required");
  if (n < 3) fail(ErrorKind::InvalidArgument, "need at least 3 designs to cluster");
  CandidateReport rep;
  k_max = std::min(k_max, n - 1);

  const int nf = s.dimension() + 1;
  Eigen::MatrixXd raw(n, nf);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < s.dimension(); ++d) raw(i, d) = component(designs[i], s.free[d].var);
    raw(i, nf - 1) = totals[i];
  }
  const Eigen::RowVectorXd mean = raw.colwise().mean();
  std::vector<int> kept;
  std::vector<double> scale(nf, 1.0);
  for (int d = 0; d < nf; ++d) {
    const double var = (raw.col(d).array() - mean[d]).square().sum() / n;
    const std::string fname = d + 1 < nf ? name(s.free[d].var) : "energy";
    if (!(var > 1e-24 * std::max(1.0, mean[d] * mean[d]))) {
      rep.warnings.push_back("DegenerateFeatures: feature '" + fname + "' has zero variance and is dropped");
      continue;
    }
    scale[d] = std::sqrt(var);
    kept.push_back(d);
    rep.features.push_back(fname);
  }
  if (kept.empty()) fail(ErrorKind::DegenerateFeatures, "every clustering feature has zero variance");

  rep.standardized.resize(n, static_cast<Eigen::Index>(kept.size()));
  for (int i = 0; i < n; ++i)
    for (std::size_t c = 0; c < kept.size(); ++c)
      rep.standardized(i, static_cast<Eigen::Index>(c)) = (raw(i, kept[c]) - mean[kept[c]]) / scale[kept[c]];

  const ClusterSelection sel = select_clusters(rep.standardized, k_min, k_max, restarts, seed);
  rep.k = sel.best.k;
  rep.labels = sel.best.labels;
  rep.ks = sel.ks;
  rep.silhouette = sel.scores;
  rep.centroids_standardized = sel.best.centroids;

  for (int c = 0; c < rep.k; ++c) {
    Eigen::RowVectorXd phys = mean;
    for (std::size_t f = 0; f < kept.size(); ++f)
      phys[kept[f]] = mean[kept[f]] + scale[kept[f]] * sel.best.centroids(c, static_cast<Eigen::Index>(f));
    DesignVector x = s.base;
    for (int d = 0; d < s.dimension(); ++d)
      component(x, s.free[d].var) = std::clamp(phys[d], s.free[d].lo, s.free[d].hi);
    rep.candidates.push_back(x);

    int best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      const double dist = (rep.standardized.row(i) - sel.best.centroids.row(c)).squaredNorm();
      if (dist < bd) {
        bd = dist;
        best = i;
      }
    }
    rep.nearest_design.push_back(best);
  }
  return rep;
}

struct EvaluationInput {
  std::vector<DesignVector> candidates;
  std::vector<ExcitationSignal> events;  // representative windows of every event class
  std::vector<int> event_class;          // class of each event in [0, classes)
  int classes = 0;
  std::vector<ExcitationSignal> quiet;   // event-free windows; empty: no quiet class
  std::vector<int> occurrences;          // events per class observed over T; empty: count `events`
  double record_duration = 0.0;          // T [s] over which the events were observed
  double window = 30.0;                  // W [s]
  const AccelerationRecord* record = nullptr;  // optional long record for direct integration
  double chunk = 600.0;                  // streaming chunk length [s]
};

struct CandidateEvaluation {
  Eigen::MatrixXd M;                 // candidates x classes (+ quiet column): mean energy per window
  std::vector<double> rates;         // occurrence rate per class (+ quiet), sums to 1
  std::vector<double> expected;      // expected energy per window: sum_g M[c][g] rate[g]
  std::vector<double> scaled;        // expected * T / W
  std::vector<double> long_energy;   // direct integration of the record (if given)
  std::vector<int> ranking;          // best first
  bool has_quiet = false;
  std::vector<std::string> warnings;
};

/// Streams a long record through a model in chunks, carrying state between chunks.
inline double long_window_energy(const ReducedModel& model, const AccelerationRecord& rec,
                                 const SimulationOptions& sim = {}, double chunk_s = 600.0) {
  validate(rec);
  HarvesterIntegrator integ(model, sim);
  const auto chunk = std::max<std::size_t>(2, static_cast<std::size_t>(chunk_s * rec.sample_rate));
  const std::span<const double> all(rec.samples);
  for (std::size_t pos = 0; pos < all.size(); pos += chunk)
    integ.feed(all.subspan(pos, std::min(chunk, all.size() - pos)), 1.0 / rec.sample_rate);
  return integ.energy();
}

inline CandidateEvaluation evaluate_candidates(const EvaluationInput& in, const MaterialSet& mat,
                                               const ModelSettings& settings, const SimulationOptions& sim = {},
                                               unsigned threads = 1) {
  const int nc = static_cast<int>(in.candidates.size());
  if (nc == 0) fail(ErrorKind::InvalidArgument, "no candidates to evaluate");
  if (in.event_class.size() != in.events.size()) fail(ErrorKind::InvalidArgument, "one class label per event required");
  if (in.classes < 1 && in.quiet.empty()) fail(ErrorKind::InvalidArgument, "nothing to evaluate against");
  for (int g : in.event_class)
    if (g < 0 || g >= in.classes) fail(ErrorKind::InvalidArgument, "event class label out of range");

  CandidateEvaluation out;
  out.has_quiet = !in.quiet.empty();
  const int ncol = in.classes + (out.has_quiet ? 1 : 0);

  std::vector<int> count(static_cast<std::size_t>(in.classes), 0);
  for (int g : in.event_class) ++count[static_cast<std::size_t>(g)];
  std::vector<int> occ = count;
  if (!in.occurrences.empty()) {
    if (in.occurrences.size() != count.size()) fail(ErrorKind::InvalidArgument, "one occurrence count per class required");
    occ = in.occurrences;
  }
  int n_events = 0;
  for (int o : occ) n_events += o;
  out.rates.assign(static_cast<std::size_t>(ncol), 0.0);
  if (out.has_quiet) {
    if (!(in.record_duration > 0.0) || !(in.window > 0.0))
      fail(ErrorKind::InvalidArgument, "record duration and window are required with a quiet class");
    const double windows = in.record_duration / in.window;
    double sum = 0.0;
    for (int g = 0; g < in.classes; ++g) sum += out.rates[static_cast<std::size_t>(g)] = occ[static_cast<std::size_t>(g)] / windows;
    if (sum > 1.0) {
      out.warnings.push_back("event windows exceed record length; rates renormalized without quiet time");
      for (int g = 0; g < in.classes; ++g) out.rates[static_cast<std::size_t>(g)] /= sum;
      sum = 1.0;
    }
    out.rates.back() = 1.0 - sum;
  } else {
    if (n_events == 0) fail(ErrorKind::InvalidArgument, "no events to evaluate against");
    for (int g = 0; g < in.classes; ++g)
      out.rates[static_cast<std::size_t>(g)] = static_cast<double>(occ[static_cast<std::size_t>(g)]) / n_events;
  }

  out.M = Eigen::MatrixXd::Zero(nc, ncol);
  out.long_energy.assign(static_cast<std::size_t>(nc), std::numeric_limits<double>::quiet_NaN());
  parallel_for(static_cast<std::size_t>(nc), threads, [&](std::size_t c) {
    const HarvesterModel hm = build_harvester(in.candidates[c], mat, settings);
    const auto row = static_cast<Eigen::Index>(c);
    for (std::size_t e = 0; e < in.events.size(); ++e) {
      const int g = in.event_class[e];
      out.M(row, g) += harvested_energy(hm.reduced, in.events[e], sim) / count[static_cast<std::size_t>(g)];
    }
    if (out.has_quiet) {
      double q = 0.0;
      for (const auto& w : in.quiet) q += harvested_energy(hm.reduced, w, sim);
      out.M(row, ncol - 1) = q / static_cast<double>(in.quiet.size());
    }
    if (in.record) out.long_energy[c] = long_window_energy(hm.reduced, *in.record, sim, in.chunk);
  });

  for (int c = 0; c < nc; ++c) {
    double e = 0.0;
    for (int g = 0; g < ncol; ++g) e += out.M(c, g) * out.rates[static_cast<std::size_t>(g)];
    out.expected.push_back(e);
    out.scaled.push_back(in.record_duration > 0.0 && in.window > 0.0 ? e * in.record_duration / in.window : e);
  }
  out.ranking.resize(static_cast<std::size_t>(nc));
  for (int c = 0; c < nc; ++c) out.ranking[static_cast<std::size_t>(c)] = c;
  const bool by_long = in.record != nullptr;
  std::stable_sort(out.ranking.begin(), out.ranking.end(), [&](int a, int b) {
    return by_long ? out.long_energy[static_cast<std::size_t>(a)] > out.long_energy[static_cast<std::size_t>(b)]
                   : out.expected[static_cast<std::size_t>(a)] > out.expected[static_cast<std::size_t>(b)];
  });
  return out;
}

}  // namespace peh
