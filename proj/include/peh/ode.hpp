#pragma once

// Adaptive explicit Runge-Kutta integrator: Dormand-Prince 5(4) with FSAL and
// embedded error control.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "peh/errors.hpp"

namespace peh {

struct OdeOptions {
  double rtol = 1e-6;
  double atol = 1e-9;
  double initial_step = 0.0;  // 0 selects a starting step automatically
  double max_step = std::numeric_limits<double>::infinity();
  long max_steps = 200'000'000;
};

struct OdeStats {
  long steps = 0;
  long rejected = 0;
  long evaluations = 0;
};

namespace dopri {
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// Difference between the 5th- and 4th-order weights.
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;
}  // namespace dopri

/// Stateful stepper. `advance` integrates exactly to the requested end time and
/// keeps the step-size estimate and the FSAL derivative for the next call, so
/// the right-hand side must be continuous in t across consecutive calls.
class DormandPrince45 {
 public:
  explicit DormandPrince45(OdeOptions opt = {}) : opt_(opt) {}

  const OdeStats& stats() const { return stats_; }

  void reset() {
    h_ = 0.0;
    have_k1_ = false;
    stats_ = {};
  }

  /// f(t, y, dydt) evaluates the derivative into `dydt`.
  template <class Rhs>
  void advance(Rhs&& f, double& t, Eigen::VectorXd& y, double t_end) {
    using namespace dopri;
    const Eigen::Index n = y.size();
    if (k1_.size() != n) {
      for (auto* k : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &tmp_, &ynew_, &err_}) k->resize(n);
      have_k1_ = false;
    }
    if (!have_k1_ || t != t_k1_) {
      f(t, y, k1_);
      ++stats_.evaluations;
      have_k1_ = true;
      t_k1_ = t;
    }
    if (h_ <= 0.0) h_ = opt_.initial_step > 0.0 ? opt_.initial_step : initial_step(f, t, y, t_end - t);

    bool last_rejected = false;
    while (t < t_end) {
      if (stats_.steps >= opt_.max_steps) fail(ErrorKind::StepSizeUnderflow, "maximum number of steps exceeded");
      const double remaining = t_end - t;
      double h = std::min({h_, opt_.max_step, remaining});
      // Never leave a rounding-sized sliver before t_end.
      if (remaining - h <= 1e-10 * std::max(1.0, std::abs(t_end))) h = remaining;
      const bool clipped = h < h_;
      if (h < 1e-13 * std::max(1.0, std::abs(t)))
        fail(ErrorKind::StepSizeUnderflow, "step size underflow at t = " + std::to_string(t));

      tmp_ = y + h * a21 * k1_;
      f(t + c2 * h, tmp_, k2_);
      tmp_ = y + h * (a31 * k1_ + a32 * k2_);
      f(t + c3 * h, tmp_, k3_);
      tmp_ = y + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
      f(t + c4 * h, tmp_, k4_);
      tmp_ = y + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
      f(t + c5 * h, tmp_, k5_);
      tmp_ = y + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
      const double t_new = (h == remaining) ? t_end : t + h;
      f(t_new, tmp_, k6_);
      ynew_ = y + h * (b1 * k1_ + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
      f(t_new, ynew_, k7_);
      stats_.evaluations += 6;

      err_ = h * (e1 * k1_ + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
      double sum = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double sc = opt_.atol + opt_.rtol * std::max(std::abs(y[i]), std::abs(ynew_[i]));
        const double e = err_[i] / sc;
        sum += e * e;
      }
      const double err = std::sqrt(sum / static_cast<double>(n));
      if (!std::isfinite(err)) fail(ErrorKind::StepSizeUnderflow, "non-finite state during integration");

      if (err <= 1.0) {
        double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        if (last_rejected) factor = std::min(factor, 1.0);
        const double h_next = h * factor;
        h_ = clipped ? std::max(h_, h_next) : h_next;
        t = t_new;
        y.swap(ynew_);
        k1_.swap(k7_);
        t_k1_ = t;
        ++stats_.steps;
        last_rejected = false;
      } else {
        h_ = h * std::max(0.2, 0.9 * std::pow(err, -0.2));
        ++stats_.rejected;
        last_rejected = true;
      }
    }
  }

 private:
  // Two-stage starting step: first-derivative scale, then an Euler probe for the second derivative.
  template <class Rhs>
  double initial_step(Rhs& f, double t, const Eigen::VectorXd& y, double span) {
    double d0 = 0.0, d1 = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double sc = opt_.atol + opt_.rtol * std::abs(y[i]);
      d0 += (y[i] / sc) * (y[i] / sc);
      d1 += (k1_[i] / sc) * (k1_[i] / sc);
    }
    d0 = std::sqrt(d0 / y.size());
    d1 = std::sqrt(d1 / y.size());
    const double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    tmp_ = y + h0 * k1_;
    f(t + h0, tmp_, k2_);
    ++stats_.evaluations;
    double d2 = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double sc = opt_.atol + opt_.rtol * std::abs(y[i]);
      const double e = (k2_[i] - k1_[i]) / sc;
      d2 += e * e;
    }
    d2 = std::sqrt(d2 / y.size()) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, 1e-3 * h0) : std::pow(0.01 / dm, 0.2);
    const double floor = 1e-12 * std::max(1.0, std::abs(t));
    return std::clamp(std::min(100.0 * h0, h1), floor, std::max(span, floor));
  }

  OdeOptions opt_;
  OdeStats stats_;
  double h_ = 0.0;
  bool have_k1_ = false;
  double t_k1_ = 0.0;
  Eigen::VectorXd k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, ynew_, err_;
};

}  // namespace peh
