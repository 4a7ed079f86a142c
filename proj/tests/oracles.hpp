#pragma once

// Test-only reference implementations, deliberately naive and independent of
// the library's optimized code paths.

#include <Eigen/Dense>
#include <functional>
#include <random>
#include <vector>

#include "warpmetric/alignment.hpp"

namespace oracles {

/// Joint feature map by the literal triple loop over (i, j) cells.
inline Eigen::MatrixXd feature_map_naive(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                         const Eigen::MatrixXd& z) {
  const Eigen::Index p = a.cols();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      const Eigen::VectorXd d = a.row(i) - b.row(j);
      out -= z(i, j) * (d * d.transpose());
    }
  }
  return out;
}

/// Path score by direct summation.
inline double path_score(const Eigen::MatrixXd& c, const warpmetric::AlignmentPath& path) {
  double s = 0.0;
  for (const auto& [i, j] : path.steps()) s += c(i - 1, j - 1);
  return s;
}

/// Best score over every enumerated path.
inline double best_score_brute(const Eigen::MatrixXd& c) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& path :
       warpmetric::enumerate_paths(static_cast<int>(c.rows()), static_cast<int>(c.cols()))) {
    best = std::max(best, path_score(c, path));
  }
  return best;
}

/// Random integer-valued affinity in [lo, hi].
inline Eigen::MatrixXd random_int_matrix(std::mt19937_64& rng, int rows, int cols, int lo,
                                         int hi) {
  std::uniform_int_distribution<int> dist(lo, hi);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

/// Random valid path via a random monotone walk.
inline warpmetric::AlignmentPath random_path(std::mt19937_64& rng, int rows, int cols) {
  std::vector<warpmetric::AlignmentPath::Step> steps{{1, 1}};
  int i = 1, j = 1;
  std::uniform_int_distribution<int> move(0, 2);
  while (i < rows || j < cols) {
    int m = move(rng);
    if (i == rows) m = 2;
    if (j == cols) m = 1;
    if (m == 0) {
      ++i;
      ++j;
    } else if (m == 1) {
      ++i;
    } else {
      ++j;
    }
    steps.emplace_back(i, j);
  }
  return warpmetric::AlignmentPath::validated(std::move(steps), rows, cols);
}

/// Central finite differences of a scalar function of a matrix.
inline Eigen::MatrixXd finite_difference(const std::function<double(const Eigen::MatrixXd&)>& f,
                                         const Eigen::MatrixXd& z, double h = 1e-5) {
  Eigen::MatrixXd grad(z.rows(), z.cols());
  Eigen::MatrixXd probe = z;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      probe(i, j) = z(i, j) + h;
      const double up = f(probe);
      probe(i, j) = z(i, j) - h;
      const double down = f(probe);
      probe(i, j) = z(i, j);
      grad(i, j) = (up - down) / (2.0 * h);
    }
  }
  return grad;
}

}  // namespace oracles
