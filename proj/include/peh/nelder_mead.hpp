#pragma once

// Nelder-Mead simplex minimizer.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace peh {

struct NelderMeadOptions {
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  double x_tolerance = 1e-4;  // simplex diameter (inf-norm) at convergence
  double f_tolerance = 0.0;   // optional spread of function values; 0 disables
  int max_iterations = 200;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Minimizes `f` starting from the simplex {x0, x0 + step_i e_i}.
template <class Fn>
NelderMeadResult nelder_mead(Fn&& f, const Eigen::VectorXd& x0, const Eigen::VectorXd& step,
                             const NelderMeadOptions& opt = {}) {
  const int n = static_cast<int>(x0.size());
  std::vector<Eigen::VectorXd> x(n + 1, x0);
  std::vector<double> fx(n + 1);
  for (int i = 0; i < n; ++i) x[i + 1][i] += step[i];
  NelderMeadResult res;
  for (int i = 0; i <= n; ++i) fx[i] = f(x[i]);
  res.evaluations = n + 1;

  std::vector<int> order(n + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fx[a] < fx[b]; });
    std::vector<Eigen::VectorXd> xs(n + 1);
    std::vector<double> fs(n + 1);
    for (int i = 0; i <= n; ++i) {
      xs[i] = x[order[i]];
      fs[i] = fx[order[i]];
    }
    x.swap(xs);
    fx.swap(fs);
  };
  auto diameter = [&] {
    double d = 0.0;
    for (int i = 1; i <= n; ++i) d = std::max(d, (x[i] - x[0]).cwiseAbs().maxCoeff());
    return d;
  };

  for (res.iterations = 0; res.iterations < opt.max_iterations; ++res.iterations) {
    sort_simplex();
    const bool x_ok = diameter() <= opt.x_tolerance;
    const bool f_ok = opt.f_tolerance <= 0.0 || std::abs(fx[n] - fx[0]) <= opt.f_tolerance;
    if (x_ok && f_ok) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) centroid += x[i];
    centroid /= n;

    const Eigen::VectorXd xr = centroid + opt.reflection * (centroid - x[n]);
    const double fr = f(xr);
    ++res.evaluations;
    if (fr < fx[0]) {
      const Eigen::VectorXd xe = centroid + opt.expansion * (xr - centroid);
      const double fe = f(xe);
      ++res.evaluations;
      if (fe < fr) {
        x[n] = xe;
        fx[n] = fe;
      } else {
        x[n] = xr;
        fx[n] = fr;
      }
      continue;
    }
    if (fr < fx[n - 1]) {
      x[n] = xr;
      fx[n] = fr;
      continue;
    }
    const bool outside = fr < fx[n];
    const Eigen::VectorXd xc =
        outside ? Eigen::VectorXd(centroid + opt.contraction * (xr - centroid))
                : Eigen::VectorXd(centroid + opt.contraction * (x[n] - centroid));
    const double fc = f(xc);
    ++res.evaluations;
    if (fc < (outside ? fr : fx[n])) {
      x[n] = xc;
      fx[n] = fc;
      continue;
    }
    for (int i = 1; i <= n; ++i) {
      x[i] = x[0] + opt.shrink * (x[i] - x[0]);
      fx[i] = f(x[i]);
      ++res.evaluations;
    }
  }
  sort_simplex();
  res.x = x[0];
  res.value = fx[0];
  return res;
}

}  // namespace peh
