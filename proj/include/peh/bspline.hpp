#pragma once

// Tensor-product B-spline patch over the rectangular mid-surface of the device.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "peh/errors.hpp"
#include "peh/geometry.hpp"

namespace peh {

/// Open (clamped) knot vector on [0, 1].
class KnotVector {
 public:
  KnotVector() = default;

  KnotVector(int degree, std::vector<double> knots) : degree_(degree), knots_(std::move(knots)) {}

  /// Uniform open knot vector with `elements` spans, optionally with one extra
  /// knot at `extra` (skipped when it coincides with an existing knot).
  static KnotVector open_uniform(int degree, int elements, double extra = -1.0) {
    std::vector<double> k;
    k.reserve(elements + 2 * degree + 2);
    for (int i = 0; i < degree; ++i) k.push_back(0.0);
    for (int i = 0; i <= elements; ++i) k.push_back(static_cast<double>(i) / elements);
    for (int i = 0; i < degree; ++i) k.push_back(1.0);
    if (extra > 0.0 && extra < 1.0) {
      const bool present = std::any_of(k.begin(), k.end(), [&](double u) { return std::abs(u - extra) < 1e-12; });
      if (!present) k.insert(std::upper_bound(k.begin(), k.end(), extra), extra);
    }
    return KnotVector(degree, std::move(k));
  }

  int degree() const { return degree_; }
  const std::vector<double>& knots() const { return knots_; }
  int num_basis() const { return static_cast<int>(knots_.size()) - degree_ - 1; }

  bool contains_knot(double u, double tol = 1e-12) const {
    return std::any_of(knots_.begin(), knots_.end(), [&](double k) { return std::abs(k - u) < tol; });
  }

  /// Index s with knots[s] <= u < knots[s+1]; u = 1 maps to the last span.
  int find_span(double u) const {
    const int n = num_basis() - 1;
    if (u >= knots_[n + 1]) return n;
    if (u <= knots_[degree_]) return degree_;
    auto it = std::upper_bound(knots_.begin() + degree_, knots_.begin() + n + 2, u);
    return static_cast<int>(it - knots_.begin()) - 1;
  }

  /// Non-zero basis functions on `span` and their derivatives up to `nd`.
  /// Result is (nd+1) x (p+1), row k holding the k-th derivative of
  /// N_{span-p} .. N_{span}.
  std::vector<std::vector<double>> basis_derivatives(int span, double u, int nd) const {
    const int p = degree_;
    std::vector<std::vector<double>> ndu(p + 1, std::vector<double>(p + 1, 0.0));
    std::vector<double> left(p + 1), right(p + 1);
    ndu[0][0] = 1.0;
    for (int j = 1; j <= p; ++j) {
      left[j] = u - knots_[span + 1 - j];
      right[j] = knots_[span + j] - u;
      double saved = 0.0;
      for (int r = 0; r < j; ++r) {
        ndu[j][r] = right[r + 1] + left[j - r];
        const double temp = ndu[r][j - 1] / ndu[j][r];
        ndu[r][j] = saved + right[r + 1] * temp;
        saved = left[j - r] * temp;
      }
      ndu[j][j] = saved;
    }

    std::vector<std::vector<double>> ders(nd + 1, std::vector<double>(p + 1, 0.0));
    for (int j = 0; j <= p; ++j) ders[0][j] = ndu[j][p];

    std::vector<std::vector<double>> a(2, std::vector<double>(p + 1, 0.0));
    for (int r = 0; r <= p; ++r) {
      int s1 = 0, s2 = 1;
      a[0][0] = 1.0;
      for (int k = 1; k <= nd; ++k) {
        double d = 0.0;
        const int rk = r - k, pk = p - k;
        if (r >= k) {
          a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
          d = a[s2][0] * ndu[rk][pk];
        }
        const int j1 = rk >= -1 ? 1 : -rk;
        const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
        for (int j = j1; j <= j2; ++j) {
          a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
          d += a[s2][j] * ndu[rk + j][pk];
        }
        if (r <= pk) {
          a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
          d += a[s2][k] * ndu[r][pk];
        }
        ders[k][r] = d;
        std::swap(s1, s2);
      }
    }
    double factor = p;
    for (int k = 1; k <= nd; ++k) {
      for (int j = 0; j <= p; ++j) ders[k][j] *= factor;
      factor *= (p - k);
    }
    return ders;
  }

  /// Greville abscissae; B-splines reproduce the identity with these as coefficients.
  std::vector<double> greville() const {
    std::vector<double> g(num_basis());
    for (int i = 0; i < num_basis(); ++i) {
      double s = 0.0;
      for (int j = 1; j <= degree_; ++j) s += knots_[i + j];
      g[i] = s / degree_;
    }
    return g;
  }

  /// Distinct non-empty spans as (span index, lower knot, upper knot).
  struct Span {
    int index;
    double lo, hi;
  };
  std::vector<Span> spans() const {
    std::vector<Span> out;
    for (int i = degree_; i < num_basis(); ++i)
      if (knots_[i + 1] > knots_[i]) out.push_back({i, knots_[i], knots_[i + 1]});
    return out;
  }

 private:
  int degree_ = 0;
  std::vector<double> knots_;
};

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> points;
  std::vector<double> weights;
};

inline GaussRule gauss_legendre(int n) {
  if (n < 1) fail(ErrorKind::InvalidArgument, "Gauss rule needs at least one point");
  GaussRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.points[i] = -x;
    rule.points[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.points[n / 2] = 0.0;
  return rule;
}

struct Element {
  int span_u, span_v;
  double u0, u1, v0, v1;
  double center_x;  // physical x at the element centre
};

/// Values and physical derivatives of the (p+1)^2 active functions at a point.
struct BasisValues {
  std::vector<int> index;
  std::vector<double> N, Nx, Ny, Nxx, Nyy, Nxy;
};

class BSplinePatch {
 public:
  BSplinePatch(KnotVector u, KnotVector v, double length, double width)
      : u_(std::move(u)), v_(std::move(v)), length_(length), width_(width) {
    const auto gu = u_.greville();
    const auto gv = v_.greville();
    control_.reserve(gu.size() * gv.size());
    for (double b : gv)
      for (double a : gu) control_.push_back({length_ * a, width_ * b});
    for (const auto& su : u_.spans())
      for (const auto& sv : v_.spans())
        elements_.push_back({su.index, sv.index, su.lo, su.hi, sv.lo, sv.hi, 0.5 * (su.lo + su.hi) * length_});
    rule_ = gauss_legendre(u_.degree() + 1);
  }

  int degree() const { return u_.degree(); }
  const KnotVector& knots_u() const { return u_; }
  const KnotVector& knots_v() const { return v_; }
  int num_u() const { return u_.num_basis(); }
  int num_v() const { return v_.num_basis(); }
  int num_basis() const { return num_u() * num_v(); }
  double length() const { return length_; }
  double width() const { return width_; }
  const std::vector<Element>& elements() const { return elements_; }
  const GaussRule& rule() const { return rule_; }

  /// Control point (x, y) of global function I = i + j * num_u().
  const std::array<double, 2>& control_point(int I) const { return control_[I]; }

  int global_index(int i, int j) const { return i + j * num_u(); }

  BasisValues eval(double xi, double eta) const {
    xi = std::clamp(xi, 0.0, 1.0);
    eta = std::clamp(eta, 0.0, 1.0);
    return eval_in_span(u_.find_span(xi), v_.find_span(eta), xi, eta);
  }

  BasisValues eval_in_span(int su, int sv, double xi, double eta) const {
    const int p = u_.degree();
    const int q = v_.degree();
    const auto du = u_.basis_derivatives(su, xi, 2);
    const auto dv = v_.basis_derivatives(sv, eta, 2);
    // Affine map x = L xi, y = W eta.
    const double jx = 1.0 / length_, jy = 1.0 / width_;
    BasisValues b;
    const std::size_t n = static_cast<std::size_t>((p + 1) * (q + 1));
    b.index.reserve(n);
    b.N.reserve(n);
    b.Nx.reserve(n);
    b.Ny.reserve(n);
    b.Nxx.reserve(n);
    b.Nyy.reserve(n);
    b.Nxy.reserve(n);
    for (int b_ = 0; b_ <= q; ++b_) {
      for (int a = 0; a <= p; ++a) {
        b.index.push_back(global_index(su - p + a, sv - q + b_));
        b.N.push_back(du[0][a] * dv[0][b_]);
        b.Nx.push_back(du[1][a] * dv[0][b_] * jx);
        b.Ny.push_back(du[0][a] * dv[1][b_] * jy);
        b.Nxx.push_back(du[2][a] * dv[0][b_] * jx * jx);
        b.Nyy.push_back(du[0][a] * dv[2][b_] * jy * jy);
        b.Nxy.push_back(du[1][a] * dv[1][b_] * jx * jy);
      }
    }
    return b;
  }

  /// Physical area of one parametric unit (constant Jacobian determinant).
  double jacobian() const { return length_ * width_; }

 private:
  KnotVector u_, v_;
  double length_, width_;
  std::vector<std::array<double, 2>> control_;
  std::vector<Element> elements_;
  GaussRule rule_;
};

struct Refinement {
  int elements_x = 16;
  int elements_y = 16;
  int degree = 3;
};

inline BSplinePatch build_patch(const DeviceGeometry& geom, const Refinement& ref) {
  if (ref.degree < 2) fail(ErrorKind::InvalidRefinement, "Kirchhoff-Love plates need degree >= 2 (C1 basis)");
  if (ref.elements_x < 2 || ref.elements_y < 2) fail(ErrorKind::InvalidRefinement, "need >= 2 elements per direction");
  if (!(geom.L > 0.0) || !(geom.W > 0.0)) fail(ErrorKind::InvalidDesign, "planform must have positive extent");
  const double interface = geom.L_pzt / geom.L;
  auto u = KnotVector::open_uniform(ref.degree, ref.elements_x, interface);
  auto v = KnotVector::open_uniform(ref.degree, ref.elements_y);
  return BSplinePatch(std::move(u), std::move(v), geom.L, geom.W);
}

/// Clamped edge at x = 0: the first two control-point columns are fixed,
/// giving w = 0 and dw/dx = 0 along the clamp.
struct DofMap {
  int total = 0;
  std::vector<int> constrained;
  std::vector<int> free;
  std::vector<int> to_free;  // global -> free index, -1 when constrained

  int num_free() const { return static_cast<int>(free.size()); }
};

inline DofMap clamp_first_columns(const BSplinePatch& patch, int columns = 2) {
  DofMap d;
  d.total = patch.num_basis();
  d.to_free.assign(d.total, -1);
  for (int j = 0; j < patch.num_v(); ++j)
    for (int i = 0; i < patch.num_u(); ++i) {
      const int I = patch.global_index(i, j);
      if (i < columns) {
        d.constrained.push_back(I);
      } else {
        d.to_free[I] = static_cast<int>(d.free.size());
        d.free.push_back(I);
      }
    }
  std::sort(d.constrained.begin(), d.constrained.end());
  if (d.free.empty()) fail(ErrorKind::ConstraintError, "clamp removes every degree of freedom");
  return d;
}

}  // namespace peh
