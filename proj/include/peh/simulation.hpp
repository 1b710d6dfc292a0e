#pragma once

// Time-domain response of the reduced harvester to a sampled base acceleration
// and the energy dissipated in the load.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "peh/errors.hpp"
#include "peh/modal.hpp"
#include "peh/ode.hpp"

namespace peh {

/// Uniformly sampled base acceleration [m/s^2], first sample at t = 0.
struct ExcitationSignal {
  double sample_rate = 0.0;
  std::vector<double> samples;

  double dt() const { return 1.0 / sample_rate; }
  double duration() const { return samples.empty() ? 0.0 : (samples.size() - 1) / sample_rate; }
};

inline void validate(const ExcitationSignal& s) {
  if (!(s.sample_rate > 0.0)) fail(ErrorKind::InvalidArgument, "sample rate must be positive");
  if (s.samples.empty()) fail(ErrorKind::EmptyRecord, "excitation has no samples");
  for (double a : s.samples)
    if (!std::isfinite(a)) fail(ErrorKind::InvalidArgument, "excitation contains non-finite samples");
}

struct SimulationOptions {
  OdeOptions ode;
  double initial_voltage = 0.0;
};

struct SimulationResult {
  std::vector<double> t;
  std::vector<double> a_b;
  std::vector<double> v;
  std::vector<double> p;
  double energy_J = 0.0;
  OdeStats stats;
};

/// Streams excitation samples through the reduced model, carrying the state
/// (modal coordinates, velocities, voltage) across calls. Between samples the
/// acceleration is interpolated linearly and every sample time is hit exactly.
class HarvesterIntegrator {
 public:
  HarvesterIntegrator(const ReducedModel& model, const SimulationOptions& opt = {})
      : model_(model), stepper_(opt.ode), state_(Eigen::VectorXd::Zero(2 * model.modes() + 1)) {
    if (!(model.R_l > 0.0) || !(model.C_p > 0.0))
      fail(ErrorKind::InvalidArgument, "reduced model needs positive R_l and C_p");
    state_[2 * model.modes()] = opt.initial_voltage;
  }

  double time() const { return t_; }
  double voltage() const { return state_[2 * model_.modes()]; }
  double energy() const { return energy_; }
  const OdeStats& stats() const { return stepper_.stats(); }
  const Eigen::VectorXd& state() const { return state_; }

  /// Feeds samples spaced by `dt`. The first sample ever fed is taken at t = 0
  /// as the initial condition; `obs(t, a, v)` is called at every sample.
  template <class Observer>
  void feed(std::span<const double> samples, double dt, Observer&& obs) {
    std::size_t i = 0;
    if (!started_ && !samples.empty()) {
      a_prev_ = samples[0];
      p_prev_ = voltage() * voltage() / model_.R_l;
      started_ = true;
      obs(t_, a_prev_, voltage());
      i = 1;
    }
    const int K = model_.modes();
    const double inv_cp = 1.0 / model_.C_p;
    const double inv_r = 1.0 / model_.R_l;
    for (; i < samples.size(); ++i) {
      const double t0 = t_, t1 = static_cast<double>(count_ + 1) * dt;
      const double a0 = a_prev_, slope = (samples[i] - a_prev_) / dt;
      auto rhs = [&](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        const double a = a0 + slope * (t - t0);
        const double v = y[2 * K];
        double flux = 0.0;
        for (int m = 0; m < K; ++m) {
          const double eta = y[m], deta = y[K + m];
          dy[m] = deta;
          dy[K + m] = -model_.c[m] * deta - model_.k[m] * eta + model_.theta[m] * v + model_.f[m] * a;
          flux += model_.coupling[m] * deta;
        }
        dy[2 * K] = (-v * inv_r - flux) * inv_cp;
      };
      stepper_.advance(rhs, t_, state_, t1);
      t_ = t1;
      ++count_;
      a_prev_ = samples[i];
      const double v = voltage();
      const double p = v * v * inv_r;
      energy_ += 0.5 * (p + p_prev_) * dt;
      p_prev_ = p;
      obs(t_, a_prev_, v);
    }
  }

  void feed(std::span<const double> samples, double dt) {
    feed(samples, dt, [](double, double, double) {});
  }

 private:
  ReducedModel model_;
  DormandPrince45 stepper_;
  Eigen::VectorXd state_;
  double t_ = 0.0;
  std::size_t count_ = 0;
  double a_prev_ = 0.0;
  double p_prev_ = 0.0;
  double energy_ = 0.0;
  bool started_ = false;
};

/// Full response on the excitation grid. `t_begin`/`t_end` optionally restrict the run
/// to samples with t in [t_begin, t_end] (time re-based to zero).
inline SimulationResult integrate(const ReducedModel& model, const ExcitationSignal& excitation,
                                  const SimulationOptions& opt = {}, double t_begin = 0.0,
                                  double t_end = std::numeric_limits<double>::infinity()) {
  validate(excitation);
  const std::size_t n = excitation.samples.size();
  const auto first = static_cast<std::size_t>(std::ceil(t_begin * excitation.sample_rate - 1e-9));
  const auto last = std::min<std::size_t>(
      n - 1, std::isfinite(t_end) ? static_cast<std::size_t>(std::floor(t_end * excitation.sample_rate + 1e-9)) : n - 1);
  if (first > last) fail(ErrorKind::InvalidArgument, "time span selects no samples");

  SimulationResult res;
  const std::size_t m = last - first + 1;
  res.t.reserve(m);
  res.a_b.reserve(m);
  res.v.reserve(m);
  res.p.reserve(m);
  HarvesterIntegrator integ(model, opt);
  integ.feed(std::span<const double>(excitation.samples).subspan(first, m), excitation.dt(),
             [&](double t, double a, double v) {
               res.t.push_back(t);
               res.a_b.push_back(a);
               res.v.push_back(v);
               res.p.push_back(v * v / model.R_l);
             });
  res.energy_J = integ.energy();
  res.stats = integ.stats();
  return res;
}

/// Energy on the output grid by the trapezoidal rule; P is taken piecewise
/// linear so partial end intervals are interpolated.
inline double energy(const SimulationResult& r, double t1, double t2) {
  if (r.t.empty()) return 0.0;
  if (t1 < r.t.front() - 1e-12 || t2 > r.t.back() + 1e-12 || t2 < t1)
    fail(ErrorKind::InvalidArgument, "energy interval outside the simulated span");
  auto p_at = [&](double t) {
    auto it = std::upper_bound(r.t.begin(), r.t.end(), t);
    if (it == r.t.begin()) return r.p.front();
    if (it == r.t.end()) return r.p.back();
    const auto j = static_cast<std::size_t>(it - r.t.begin());
    const double w = (t - r.t[j - 1]) / (r.t[j] - r.t[j - 1]);
    return (1.0 - w) * r.p[j - 1] + w * r.p[j];
  };
  double e = 0.0;
  double t_prev = t1, p_prev = p_at(t1);
  for (std::size_t j = 0; j < r.t.size(); ++j) {
    if (r.t[j] <= t1) continue;
    if (r.t[j] >= t2) break;
    e += 0.5 * (p_prev + r.p[j]) * (r.t[j] - t_prev);
    t_prev = r.t[j];
    p_prev = r.p[j];
  }
  e += 0.5 * (p_prev + p_at(t2)) * (t2 - t_prev);
  return e;
}

inline double energy(const SimulationResult& r) { return r.t.empty() ? 0.0 : energy(r, r.t.front(), r.t.back()); }

/// Harvested energy without storing the trace.
inline double harvested_energy(const ReducedModel& model, const ExcitationSignal& excitation,
                               const SimulationOptions& opt = {}) {
  validate(excitation);
  HarvesterIntegrator integ(model, opt);
  integ.feed(excitation.samples, excitation.dt());
  return integ.energy();
}

}  // namespace peh
