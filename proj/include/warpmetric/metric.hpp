#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>

#include "warpmetric/alignment.hpp"
#include "warpmetric/errors.hpp"

namespace warpmetric {

/// Allowed parameter sets for the learned metric.
enum class Structure { psd, diagonal_nonneg, unconstrained };

std::string to_string(Structure s);
Structure structure_from_string(const std::string& name);

/// The learned p x p metric parameter. Instances come from `make` (validated)
/// or from `project`, which guarantees the structure invariants by
/// construction.
class MetricMatrix {
 public:
  /// Validates the structure invariants: psd requires symmetry within 1e-10
  /// and eigenvalues >= -1e-8; diagonal_nonneg requires exactly zero
  /// off-diagonals and a nonnegative diagonal.
  static MetricMatrix make(Eigen::MatrixXd values, Structure structure);

  /// Identity scaled to unit trace, projected onto the structure set.
  static MetricMatrix identity_baseline(int dim, Structure structure);

  const Eigen::MatrixXd& values() const { return values_; }
  Structure structure() const { return structure_; }
  int dim() const { return static_cast<int>(values_.rows()); }

  /// Plain-text format: header line "p structure", then p rows of p decimals
  /// written with 17 significant digits (bit-exact round trip).
  void save(const std::filesystem::path& file) const;
  static MetricMatrix load(const std::filesystem::path& file);

 private:
  friend MetricMatrix project(const Eigen::MatrixXd&, Structure);
  struct Trusted {};
  MetricMatrix(Eigen::MatrixXd values, Structure structure, Trusted)
      : values_(std::move(values)), structure_(structure) {}

  Eigen::MatrixXd values_;
  Structure structure_;
};

/// Frobenius-nearest point of the structure set. psd: symmetrize then clamp
/// negative eigenvalues to zero; diagonal_nonneg: drop off-diagonals and clamp
/// the diagonal; unconstrained: identity map.
MetricMatrix project(const Eigen::MatrixXd& m, Structure structure);

/// Pairwise affinity C[i,j] = -(a_i - b_j)^T W (a_i - b_j). Rows of `a` and
/// `b` are frames. An asymmetric W is used through its symmetric part, which
/// leaves the quadratic form unchanged.
Eigen::MatrixXd affinity(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                         const MetricMatrix& w);
Eigen::MatrixXd affinity(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                         const Eigen::MatrixXd& w);

/// Joint feature map -sum_{i,j} Z[i,j] (a_i - b_j)(a_i - b_j)^T, evaluated via
/// Gram-style products, O((T_A + T_B) p^2 + T_A T_B p).
Eigen::MatrixXd feature_map(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                            const Eigen::MatrixXd& coupling);
Eigen::MatrixXd feature_map(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                            const AlignmentPath& path);

/// Entry of a sparse coupling: (row, col) 0-based, with weight.
struct CouplingEntry {
  int i;
  int j;
  double w;
};

/// Sparse-coupling evaluation, O((T_A + T_B) p^2 + nnz p).
Eigen::MatrixXd feature_map(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                            const std::vector<CouplingEntry>& coupling, int rows, int cols);

/// Dual residual psi = feature_map(truth) - feature_map(z).
Eigen::MatrixXd psi(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                    const AlignmentPath& truth, const Eigen::MatrixXd& z);
Eigen::MatrixXd psi(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                    const AlignmentPath& truth, const AlignmentPath& z);

}  // namespace warpmetric
