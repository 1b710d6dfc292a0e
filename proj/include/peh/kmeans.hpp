#pragma once

// k-means (k-means++ seeding, Lloyd iterations, best of several restarts) and
// silhouette-based choice of k.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "peh/errors.hpp"

namespace peh {

struct KMeansResult {
  int k = 0;
  std::vector<int> labels;
  Eigen::MatrixXd centroids;  // k x d
  double inertia = 0.0;
  int iterations = 0;
};

namespace detail {

inline int nearest(const Eigen::MatrixXd& C, const Eigen::RowVectorXd& x, double* dist2 = nullptr) {
  int best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (int c = 0; c < C.rows(); ++c) {
    const double d = (C.row(c) - x).squaredNorm();
    if (d < bd) {
      bd = d;
      best = c;
    }
  }
  if (dist2) *dist2 = bd;
  return best;
}

inline KMeansResult kmeans_once(const Eigen::MatrixXd& X, int k, std::mt19937_64& rng, int max_iter) {
  const int n = static_cast<int>(X.rows());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::MatrixXd C(k, X.cols());
  C.row(0) = X.row(std::min(n - 1, static_cast<int>(unit(rng) * n)));
  std::vector<double> d2(n);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      nearest(C.topRows(c), X.row(i), &d2[i]);
      total += d2[i];
    }
    int pick = n - 1;
    if (total > 0.0) {
      double r = unit(rng) * total;
      for (int i = 0; i < n; ++i) {
        r -= d2[i];
        if (r <= 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<int>(unit(rng) * n) % n;
    }
    C.row(c) = X.row(pick);
  }

  KMeansResult res;
  res.k = k;
  res.labels.assign(n, -1);
  for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      const int l = nearest(C, X.row(i));
      if (l != res.labels[i]) {
        res.labels[i] = l;
        changed = true;
      }
    }
    if (!changed) break;
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(k, X.cols());
    std::vector<int> count(k, 0);
    for (int i = 0; i < n; ++i) {
      sum.row(res.labels[i]) += X.row(i);
      ++count[res.labels[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (count[c] > 0) {
        C.row(c) = sum.row(c) / count[c];
        continue;
      }
      // Empty cluster: move it onto the point farthest from its centroid.
      int far = 0;
      double fd = -1.0;
      for (int i = 0; i < n; ++i) {
        const double d = (X.row(i) - C.row(res.labels[i])).squaredNorm();
        if (d > fd) {
          fd = d;
          far = i;
        }
      }
      C.row(c) = X.row(far);
    }
  }
  res.centroids = C;
  res.inertia = 0.0;
  for (int i = 0; i < n; ++i) res.inertia += (X.row(i) - C.row(res.labels[i])).squaredNorm();
  return res;
}

}  // namespace detail

/// Best-inertia clustering over `restarts` seeded runs.
inline KMeansResult kmeans(const Eigen::MatrixXd& X, int k, int restarts = 20, std::uint64_t seed = 1,
                           int max_iter = 300) {
  if (k < 1 || k > X.rows()) fail(ErrorKind::InvalidArgument, "k must lie in [1, number of points]");
  std::mt19937_64 rng(seed);
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, restarts); ++r) {
    KMeansResult res = detail::kmeans_once(X, k, rng, max_iter);
    if (res.inertia < best.inertia) best = std::move(res);
  }
  return best;
}

/// Mean silhouette coefficient; points in singleton clusters score 0.
inline double silhouette(const Eigen::MatrixXd& X, const std::vector<int>& labels, int k) {
  const int n = static_cast<int>(X.rows());
  if (k < 2) fail(ErrorKind::InvalidArgument, "silhouette is undefined for k < 2");
  std::vector<int> size(k, 0);
  for (int l : labels) ++size[l];
  double total = 0.0;
  std::vector<double> mean_d(k);
  for (int i = 0; i < n; ++i) {
    std::fill(mean_d.begin(), mean_d.end(), 0.0);
    for (int j = 0; j < n; ++j)
      if (j != i) mean_d[labels[j]] += (X.row(i) - X.row(j)).norm();
    const int own = labels[i];
    if (size[own] <= 1) continue;
    const double a = mean_d[own] / (size[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c)
      if (c != own && size[c] > 0) b = std::min(b, mean_d[c] / size[c]);
    if (!std::isfinite(b)) continue;
    const double m = std::max(a, b);
    total += m > 0.0 ? (b - a) / m : 0.0;
  }
  return total / n;
}

struct ClusterSelection {
  KMeansResult best;
  std::vector<int> ks;
  std::vector<double> scores;
};

/// k in [k_min, k_max] maximizing the mean silhouette (k_min >= 2).
inline ClusterSelection select_clusters(const Eigen::MatrixXd& X, int k_min, int k_max, int restarts = 20,
                                        std::uint64_t seed = 1) {
  k_min = std::max(k_min, 2);
  if (k_max < k_min) fail(ErrorKind::InvalidArgument, "empty k range");
  if (X.rows() < k_max + 1) fail(ErrorKind::InvalidArgument, "need at least k_max + 1 points to cluster");
  ClusterSelection sel;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int k = k_min; k <= k_max; ++k) {
    KMeansResult r = kmeans(X, k, restarts, seed + static_cast<std::uint64_t>(k));
    const double s = silhouette(X, r.labels, k);
    sel.ks.push_back(k);
    sel.scores.push_back(s);
    if (s > best_score) {
      best_score = s;
      sel.best = std::move(r);
    }
  }
  return sel;
}

}  // namespace peh
