#include "warpmetric/losses.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace warpmetric {

Eigen::MatrixXd prefix_down(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out = m;
  for (Eigen::Index i = 1; i < out.rows(); ++i) out.row(i) += out.row(i - 1);
  return out;
}

Eigen::MatrixXd suffix_down(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out = m;
  for (Eigen::Index i = out.rows() - 2; i >= 0; --i) out.row(i) += out.row(i + 1);
  return out;
}

Eigen::MatrixXd suffix_right(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out = m;
  for (Eigen::Index j = out.cols() - 2; j >= 0; --j) out.col(j) += out.col(j + 1);
  return out;
}

Eigen::MatrixXd prefix_right(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out = m;
  for (Eigen::Index j = 1; j < out.cols(); ++j) out.col(j) += out.col(j - 1);
  return out;
}

double lambda_max_LtL(int t, double rel_tol, long max_iters) {
  if (t < 1) throw DimensionMismatchError("operator size must be positive");
  if (t == 1) return 1.0;
  // L^T L is entrywise positive, so the leading eigenvector is positive and
  // the all-ones start cannot be orthogonal to it.
  Eigen::VectorXd v = Eigen::VectorXd::Ones(t) / std::sqrt(static_cast<double>(t));
  double lambda = 0.0;
  for (long it = 0; it < max_iters; ++it) {
    // (L^T L) v: prefix sums then suffix sums.
    Eigen::VectorXd u = v;
    for (int i = 1; i < t; ++i) u(i) += u(i - 1);
    for (int i = t - 2; i >= 0; --i) u(i) += u(i + 1);
    const double next = v.dot(u);  // Rayleigh quotient, ||v|| = 1
    const double norm = u.norm();
    if (norm == 0.0) throw NoConvergenceError("power iteration collapsed to zero");
    v = u / norm;
    if (it > 0 && std::abs(next - lambda) <= rel_tol * std::abs(next)) return next;
    lambda = next;
  }
  throw NoConvergenceError("power iteration did not converge in " + std::to_string(max_iters) +
                           " iterations");
}

double hamming_loss(const AlignmentPath& y1, const AlignmentPath& y2) {
  if (y1.rows() != y2.rows() || y1.cols() != y2.cols()) {
    throw DimensionMismatchError("paths live on different grids");
  }
  // |Y1| + |Y2| - 2 <Y1, Y2>; steps are ordered along the path, so the
  // overlap is a sorted-merge count under the (i+j, i) order.
  auto key = [](const AlignmentPath::Step& s) { return std::pair(s.first + s.second, s.first); };
  std::size_t overlap = 0;
  const auto& s1 = y1.steps();
  const auto& s2 = y2.steps();
  std::size_t a = 0, b = 0;
  while (a < s1.size() && b < s2.size()) {
    if (key(s1[a]) == key(s2[b])) {
      ++overlap;
      ++a;
      ++b;
    } else if (key(s1[a]) < key(s2[b])) {
      ++a;
    } else {
      ++b;
    }
  }
  return static_cast<double>(s1.size() + s2.size() - 2 * overlap);
}

double hamming_loss(const Eigen::MatrixXd& y1, const Eigen::MatrixXd& y2) {
  if (y1.rows() != y2.rows() || y1.cols() != y2.cols()) {
    throw DimensionMismatchError("matrices have different shapes");
  }
  return (y1 - y2).squaredNorm();
}

namespace {

struct ColumnSpan {
  int min_row;
  int max_row;
};

// Row extent of a path in every column; valid paths visit every column.
std::vector<ColumnSpan> column_spans(const AlignmentPath& y) {
  std::vector<ColumnSpan> spans(y.cols(), {0, 0});
  std::vector<bool> seen(y.cols(), false);
  for (const auto& [i, j] : y.steps()) {
    auto& s = spans[j - 1];
    if (!seen[j - 1]) {
      s = {i, i};
      seen[j - 1] = true;
    } else {
      s.min_row = std::min(s.min_row, i);
      s.max_row = std::max(s.max_row, i);
    }
  }
  return spans;
}

}  // namespace

DeltaValues delta_losses(const AlignmentPath& y1, const AlignmentPath& y2) {
  if (y1.rows() != y2.rows() || y1.cols() != y2.cols()) {
    throw DimensionMismatchError("paths live on different grids");
  }
  const auto s1 = column_spans(y1);
  const auto s2 = column_spans(y2);
  double sum = 0.0;
  double worst = 0.0;
  for (int t = 0; t < y1.cols(); ++t) {
    const double d = std::min(std::abs(s1[t].min_row - s2[t].max_row),
                              std::abs(s1[t].max_row - s2[t].min_row));
    sum += d;
    worst = std::max(worst, d);
  }
  return DeltaValues{sum / y1.cols(), worst};
}

double delta_abs(const AlignmentPath& y1, const AlignmentPath& y2) {
  return delta_losses(y1, y2).mean;
}

double delta_max(const AlignmentPath& y1, const AlignmentPath& y2) {
  return delta_losses(y1, y2).max;
}

double area_loss_reference(const Eigen::MatrixXd& y1, const Eigen::MatrixXd& y2) {
  if (y1.rows() != y2.rows() || y1.cols() != y2.cols()) {
    throw DimensionMismatchError("matrices have different shapes");
  }
  return prefix_down(y1 - y2).squaredNorm();
}

double area_loss_reference(const AlignmentPath& y1, const AlignmentPath& y2) {
  return area_loss_reference(y1.to_matrix(), y2.to_matrix());
}

double sym_area_loss(const Eigen::MatrixXd& y1, const Eigen::MatrixXd& y2) {
  if (y1.rows() != y2.rows() || y1.cols() != y2.cols()) {
    throw DimensionMismatchError("matrices have different shapes");
  }
  const Eigen::MatrixXd m = y1 - y2;
  return 0.5 * (prefix_down(m).squaredNorm() + suffix_right(m).squaredNorm());
}

double sym_area_loss(const AlignmentPath& y1, const AlignmentPath& y2) {
  return sym_area_loss(y1.to_matrix(), y2.to_matrix());
}

namespace {

void check_coupling(const AlignmentPath& truth, const Eigen::MatrixXd& z,
                    const TriangularOperator& row_op, const TriangularOperator& col_op) {
  if (z.rows() != truth.rows() || z.cols() != truth.cols()) {
    throw DimensionMismatchError("coupling shape does not match the truth grid");
  }
  if (row_op.size() != truth.rows() || col_op.size() != truth.cols()) {
    throw DimensionMismatchError("triangular operators do not match the grid");
  }
  constexpr double kSlack = 1e-9;  // float drift from repeated convex combinations
  if (z.minCoeff() < -kSlack || z.maxCoeff() > 1.0 + kSlack) {
    throw OutOfRangeError("coupling entries must lie in [0, 1]");
  }
}

}  // namespace

double sal_concave(const AlignmentPath& truth, const Eigen::MatrixXd& z,
                   const TriangularOperator& row_op, const TriangularOperator& col_op) {
  check_coupling(truth, z, row_op, col_op);
  const Eigen::MatrixXd y = truth.to_matrix();
  const double d = row_op.lambda_max();
  const double d1 = col_op.lambda_max();
  const Eigen::MatrixXd lz = prefix_down(z);
  const Eigen::MatrixXd ly = prefix_down(y);
  const Eigen::MatrixXd zl = suffix_right(z);
  const Eigen::MatrixXd yl = suffix_right(y);
  const double zsq = z.squaredNorm();
  const double zsum = z.sum();
  // Each ||.||^2 quadratic in Z is shifted by its lambda_max so the quadratic
  // part is concave; the (d + d1)(sum(Z) - ||Z||^2) correction restores the
  // value on 0/1 couplings.
  const double value = lz.squaredNorm() - 2.0 * lz.cwiseProduct(ly).sum() + ly.squaredNorm() +
                       zl.squaredNorm() - 2.0 * zl.cwiseProduct(yl).sum() + yl.squaredNorm() +
                       (d + d1) * (zsum - zsq);
  return 0.5 * value;
}

double sal_concave(const AlignmentPath& truth, const Eigen::MatrixXd& z) {
  return sal_concave(truth, z, TriangularOperator(truth.rows()), TriangularOperator(truth.cols()));
}

Eigen::MatrixXd sal_concave_gradient(const AlignmentPath& truth, const Eigen::MatrixXd& z,
                                     const TriangularOperator& row_op,
                                     const TriangularOperator& col_op) {
  check_coupling(truth, z, row_op, col_op);
  const Eigen::MatrixXd diff = z - truth.to_matrix();
  const double d = row_op.lambda_max();
  const double d1 = col_op.lambda_max();
  // L^T L (Z - Y) + (Z - Y) L1 L1^T - (d + d1) Z + 0.5 (d + d1) U
  Eigen::MatrixXd grad = suffix_down(prefix_down(diff));
  grad += prefix_right(suffix_right(diff));
  grad -= (d + d1) * z;
  grad.array() += 0.5 * (d + d1);
  return grad;
}

Eigen::MatrixXd sal_concave_gradient(const AlignmentPath& truth, const Eigen::MatrixXd& z) {
  return sal_concave_gradient(truth, z, TriangularOperator(truth.rows()),
                              TriangularOperator(truth.cols()));
}

double sal_concave_curvature(const Eigen::MatrixXd& delta, const TriangularOperator& row_op,
                             const TriangularOperator& col_op) {
  if (row_op.size() != delta.rows() || col_op.size() != delta.cols()) {
    throw DimensionMismatchError("triangular operators do not match the direction shape");
  }
  const double d = row_op.lambda_max();
  const double d1 = col_op.lambda_max();
  return 0.5 * (prefix_down(delta).squaredNorm() + suffix_right(delta).squaredNorm() -
                (d + d1) * delta.squaredNorm());
}

}  // namespace warpmetric
