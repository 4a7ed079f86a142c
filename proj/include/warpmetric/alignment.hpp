#pragma once

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "warpmetric/errors.hpp"

namespace warpmetric {

using BigInt = boost::multiprecision::cpp_int;

/// A monotone warping path between two sequences of lengths rows() and cols().
///
/// Steps are 1-based (i, j) pairs, start at (1,1), end at (rows, cols), and
/// advance by (1,0), (0,1) or (1,1). Instances are immutable and always valid:
/// the only way to build one is through `validated` / `from_matrix`, which
/// throw on any violation.
class AlignmentPath {
 public:
  using Step = std::pair<int, int>;

  /// Checks all path invariants and throws EmptyPathError, BadEndpointError
  /// or BadMoveError naming the first violating step.
  static AlignmentPath validated(std::vector<Step> steps, int rows, int cols);

  /// Inverse of to_matrix. The matrix must be 0/1 and encode a valid path.
  static AlignmentPath from_matrix(const Eigen::MatrixXd& y);

  const std::vector<Step>& steps() const { return steps_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return steps_.size(); }

  /// Binary rows() x cols() matrix with a one at every step.
  Eigen::MatrixXd to_matrix() const;

  bool operator==(const AlignmentPath&) const = default;

 private:
  AlignmentPath(std::vector<Step> steps, int rows, int cols)
      : steps_(std::move(steps)), rows_(rows), cols_(cols) {}

  std::vector<Step> steps_;
  int rows_ = 0;
  int cols_ = 0;
};

struct DecodeResult {
  AlignmentPath path;
  double score;
};

/// Dynamic-programming decoder: returns the path maximizing the sum of
/// affinity entries over all valid paths, together with that sum.
///
/// Ties in the backtracking are broken deterministically: diagonal first,
/// then (i-1, j), then (i, j-1). `band`, when set, restricts the search to
/// |i - j| <= max(band, |T_A - T_B|) (Sakoe-Chiba style); unset means
/// unconstrained. Throws NonFiniteError if the affinity contains NaN or inf.
DecodeResult dtw_decode(const Eigen::MatrixXd& affinity,
                        std::optional<int> band = std::nullopt);

/// Number of valid paths on a rows x cols grid (exact integer arithmetic).
BigInt delannoy_count(int rows, int cols);

/// Every valid path on a rows x cols grid, in a fixed deterministic order.
/// Throws TooLargeError when delannoy_count(rows, cols) > 10^6.
std::vector<AlignmentPath> enumerate_paths(int rows, int cols);

}  // namespace warpmetric
