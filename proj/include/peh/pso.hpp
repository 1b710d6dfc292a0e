#pragma once

// Particle swarm maximizer over a box.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "peh/errors.hpp"
#include "peh/parallel.hpp"

namespace peh {

struct PsoOptions {
  int particles = 30;
  int iterations = 20;  // update iterations after the initial evaluation
  double inertia = 0.72;
  double cognitive = 1.49;
  double social = 1.49;
  double plateau_tolerance = 1e-3;  // relative gain of the best value ...
  int plateau_window = 5;           // ... over this many iterations; 0 disables
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct PsoResult {
  Eigen::VectorXd best;
  double best_value = -std::numeric_limits<double>::infinity();
  std::vector<double> trace;  // best value after each iteration, [0] = initialization
  int iterations = 0;
  int evaluations = 0;
  int failures = 0;
  std::string last_failure;
};

/// Maximizes f over [lo, hi]. A throwing or non-finite evaluation scores -inf.
/// Positions leaving the box are clamped to the bound with that velocity
/// component reset to zero. All random draws happen on the calling thread so
/// the result depends only on the seed.
template <class Fn>
PsoResult pso_maximize(Fn&& f, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, const PsoOptions& opt = {}) {
  const int dim = static_cast<int>(lo.size());
  const int np = opt.particles;
  if (dim < 1 || hi.size() != dim || np < 1) fail(ErrorKind::InvalidArgument, "invalid swarm configuration");
  for (int d = 0; d < dim; ++d)
    if (!(hi[d] >= lo[d])) fail(ErrorKind::InvalidArgument, "lower bound exceeds upper bound");

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Eigen::VectorXd span = hi - lo;

  std::vector<Eigen::VectorXd> x(np), v(np), pbest(np);
  std::vector<double> fx(np), fbest(np);
  for (int i = 0; i < np; ++i) {
    x[i].resize(dim);
    v[i].resize(dim);
    for (int d = 0; d < dim; ++d) {
      x[i][d] = lo[d] + unit(rng) * span[d];
      v[i][d] = (2.0 * unit(rng) - 1.0) * 0.1 * span[d];
    }
  }

  PsoResult res;
  std::vector<std::string> errors(np);
  auto evaluate_all = [&] {
    parallel_for(static_cast<std::size_t>(np), opt.threads, [&](std::size_t i) {
      errors[i].clear();
      try {
        const double val = f(x[i]);
        fx[i] = std::isfinite(val) ? val : -std::numeric_limits<double>::infinity();
        if (!std::isfinite(val)) errors[i] = "non-finite objective";
      } catch (const std::exception& e) {
        fx[i] = -std::numeric_limits<double>::infinity();
        errors[i] = e.what();
      }
    });
    res.evaluations += np;
    for (const auto& e : errors)
      if (!e.empty()) {
        ++res.failures;
        res.last_failure = e;
      }
  };

  evaluate_all();
  int g = -1;
  for (int i = 0; i < np; ++i) {
    pbest[i] = x[i];
    fbest[i] = fx[i];
    if (std::isfinite(fx[i]) && (g < 0 || fx[i] > fbest[g])) g = i;
  }
  if (g < 0) fail(ErrorKind::AllParticlesFailed, "every particle failed: " + res.last_failure);
  res.best = pbest[g];
  res.best_value = fbest[g];
  res.trace.push_back(res.best_value);

  for (int it = 1; it <= opt.iterations; ++it) {
    for (int i = 0; i < np; ++i) {
      for (int d = 0; d < dim; ++d) {
        const double r1 = unit(rng), r2 = unit(rng);
        v[i][d] = opt.inertia * v[i][d] + opt.cognitive * r1 * (pbest[i][d] - x[i][d]) +
                  opt.social * r2 * (res.best[d] - x[i][d]);
        x[i][d] += v[i][d];
        if (x[i][d] < lo[d]) {
          x[i][d] = lo[d];
          v[i][d] = 0.0;
        } else if (x[i][d] > hi[d]) {
          x[i][d] = hi[d];
          v[i][d] = 0.0;
        }
      }
    }
    evaluate_all();
    for (int i = 0; i < np; ++i) {
      if (fx[i] > fbest[i]) {
        fbest[i] = fx[i];
        pbest[i] = x[i];
      }
      if (fbest[i] > res.best_value) {
        res.best_value = fbest[i];
        res.best = pbest[i];
      }
    }
    res.trace.push_back(res.best_value);
    res.iterations = it;
    const int w = opt.plateau_window;
    if (w > 0 && it >= w) {
      const double before = res.trace[it - w];
      if (res.best_value - before <= opt.plateau_tolerance * std::abs(before)) break;
    }
  }
  return res;
}

}  // namespace peh
