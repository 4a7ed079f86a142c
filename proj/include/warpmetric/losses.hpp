#pragma once

#include <Eigen/Dense>

#include "warpmetric/alignment.hpp"

namespace warpmetric {

/// Products with the lower-triangular all-ones matrix L, computed as running
/// sums instead of dense multiplications.
Eigen::MatrixXd prefix_down(const Eigen::MatrixXd& m);   // L * M
Eigen::MatrixXd suffix_down(const Eigen::MatrixXd& m);   // L^T * M
Eigen::MatrixXd suffix_right(const Eigen::MatrixXd& m);  // M * L1
Eigen::MatrixXd prefix_right(const Eigen::MatrixXd& m);  // M * L1^T

/// Largest eigenvalue of L^T L for the T x T lower-triangular all-ones L,
/// by power iteration (matrix applied as running sums, O(T) per step).
double lambda_max_LtL(int t, double rel_tol = 1e-12, long max_iters = 100000);

/// The implicit lower-triangular all-ones operator of one grid dimension,
/// with its largest LtL eigenvalue cached at construction. Immutable.
class TriangularOperator {
 public:
  explicit TriangularOperator(int size)
      : size_(size), lambda_max_(lambda_max_LtL(size)) {}
  int size() const { return size_; }
  double lambda_max() const { return lambda_max_; }

 private:
  int size_;
  double lambda_max_;
};

/// Squared Frobenius distance between the path matrices (unnormalized Hamming
/// loss for binary matrices); evaluated through the linear expansion
/// |Y1| + |Y2| - 2 <Y1, Y2>.
double hamming_loss(const AlignmentPath& y1, const AlignmentPath& y2);
double hamming_loss(const Eigen::MatrixXd& y1, const Eigen::MatrixXd& y2);

struct DeltaValues {
  double mean;  // delta_abs, in frames
  double max;   // delta_max, in frames
};

/// Per-column deviations between two paths; for each column t of B,
/// delta_t = min(|min row of y1 - max row of y2|, |max row of y1 - min row of y2|).
DeltaValues delta_losses(const AlignmentPath& y1, const AlignmentPath& y2);
double delta_abs(const AlignmentPath& y1, const AlignmentPath& y2);
double delta_max(const AlignmentPath& y1, const AlignmentPath& y2);

/// Reference-indexed area loss ||L (Y1 - Y2)||_F^2. For paths without
/// vertical moves this equals the discrete area between the two paths.
double area_loss_reference(const AlignmentPath& y1, const AlignmentPath& y2);
double area_loss_reference(const Eigen::MatrixXd& y1, const Eigen::MatrixXd& y2);

/// Symmetrized area loss 0.5 (||L (Y1-Y2)||_F^2 + ||(Y1-Y2) L1||_F^2).
double sym_area_loss(const AlignmentPath& y1, const AlignmentPath& y2);
double sym_area_loss(const Eigen::MatrixXd& y1, const Eigen::MatrixXd& y2);

/// Concave extension of the symmetrized area loss to the convex hull of the
/// path polytope: the quadratic terms are shifted by D = lambda_max(L^T L) I
/// and D1 = lambda_max(L1 L1^T) I, with matching linear corrections that
/// vanish on 0/1 couplings, so the extension coincides with sym_area_loss on
/// every integral Z and is concave in Z.
///
/// Z must have the truth's shape with entries in [0,1] (small float slack).
double sal_concave(const AlignmentPath& truth, const Eigen::MatrixXd& z,
                   const TriangularOperator& row_op, const TriangularOperator& col_op);
double sal_concave(const AlignmentPath& truth, const Eigen::MatrixXd& z);

/// Gradient of sal_concave with respect to Z.
Eigen::MatrixXd sal_concave_gradient(const AlignmentPath& truth, const Eigen::MatrixXd& z,
                                     const TriangularOperator& row_op,
                                     const TriangularOperator& col_op);
Eigen::MatrixXd sal_concave_gradient(const AlignmentPath& truth, const Eigen::MatrixXd& z);

/// Curvature term of sal_concave along a direction: the pure quadratic part
/// evaluated at delta. Always <= 0; used by the exact line search.
double sal_concave_curvature(const Eigen::MatrixXd& delta, const TriangularOperator& row_op,
                             const TriangularOperator& col_op);

}  // namespace warpmetric
