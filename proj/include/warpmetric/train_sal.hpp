#pragma once

#include <memory>

#include "warpmetric/dataset.hpp"
#include "warpmetric/losses.hpp"
#include "warpmetric/training.hpp"

namespace warpmetric {

/// A point of the alignment polytope: a dense coupling matrix together with
/// the convex combination of paths that produced it. Starts at a single path
/// and moves only by Frank-Wolfe steps, so the entries stay in [0,1], the
/// weights stay positive and sum to one, and the active set reconstructs the
/// dense matrix (auditable via reconstruction_error).
class FractionalAlignment {
 public:
  explicit FractionalAlignment(const AlignmentPath& start);

  const Eigen::MatrixXd& dense() const { return dense_; }
  const std::vector<std::pair<AlignmentPath, double>>& active_set() const { return active_set_; }
  int rows() const { return static_cast<int>(dense_.rows()); }
  int cols() const { return static_cast<int>(dense_.cols()); }

  /// Z <- (1-gamma) Z + gamma vertex; merges the vertex into the active set.
  void fw_step(const AlignmentPath& vertex, double gamma);

  double weight_sum() const;
  /// Max-abs difference between dense() and the active-set combination.
  double reconstruction_error() const;

 private:
  Eigen::MatrixXd dense_;
  std::vector<std::pair<AlignmentPath, double>> active_set_;
};

/// Frank-Wolfe specific knobs on top of the shared training config.
struct SalConfig {
  TrainConfig base;
  /// Total FW steps; 0 means the default budget of 50 * n.
  long steps = 0;
  /// Stop once the full-sweep FW gap at a checkpoint falls below this.
  double gap_tolerance = 1e-4;
  enum class Sampling { uniform, cyclic } sampling = Sampling::uniform;
  enum class LineSearch { exact, harmonic } line_search = LineSearch::exact;
  /// Drop the loss term from the dual (diagnostic mode: the optimum is then
  /// blocks = truths with W = 0).
  bool include_loss_term = true;
};

/// Primal metric recovered from the dual blocks: W = (1/(lambda n)) sum psi_i,
/// projected onto the structure set for psd / diagonal modes.
MetricMatrix representer(const std::vector<FractionalAlignment>& blocks,
                         const std::vector<SequencePair>& data, double lambda,
                         Structure structure);

/// Dual objective (to minimize):
/// (1/(2 lambda n^2)) ||sum psi_i||_F^2 - (1/n) sum sal_concave(Y_i, Z_i).
double dual_objective(const std::vector<FractionalAlignment>& blocks,
                      const std::vector<SequencePair>& data, double lambda,
                      bool include_loss_term = true);

/// Gradient of the dual objective with respect to block i:
/// -(1/n) [ C(X_i; W) + grad sal_concave(Y_i, Z_i) ] with W the unprojected
/// representer value.
Eigen::MatrixXd fw_block_gradient(int i, const std::vector<FractionalAlignment>& blocks,
                                  const std::vector<SequencePair>& data, double lambda,
                                  bool include_loss_term = true);

/// argmin over paths of <gradient, Y>, via dtw_decode(-gradient).
AlignmentPath fw_linear_oracle(const Eigen::MatrixXd& gradient);

struct StepSizeResult {
  double gamma;   // clamp(-b / (2a), 0, 1) with the degenerate branches below
  double quad_a;  // curvature of the objective along the segment, >= 0
  double lin_b;   // slope at gamma = 0 (equals -gap)
};

/// Exact line search for the segment Z_i(gamma) = (1-gamma) Z_i + gamma S.
/// Returns gamma = 0 when b >= 0 and gamma = 1 when the segment is linear
/// with negative slope.
StepSizeResult fw_step_size(int i, const AlignmentPath& vertex,
                            const std::vector<FractionalAlignment>& blocks,
                            const std::vector<SequencePair>& data, double lambda,
                            bool include_loss_term = true);

/// Frank-Wolfe certificate <gradient, Z - S>; nonnegative when S comes from
/// the linear oracle, zero iff the block is optimal.
double fw_gap(const Eigen::MatrixXd& gradient, const Eigen::MatrixXd& z, const AlignmentPath& s);

/// Incremental engine behind train_sal, exposed for inspection: keeps the
/// blocks, the cached sum of psi_i (hence the unprojected W) and a running
/// dual objective that is exactly non-increasing under accepted steps.
class SalDual {
 public:
  SalDual(const std::vector<SequencePair>& data, double lambda, bool include_loss_term = true);

  int size() const { return static_cast<int>(blocks_.size()); }
  const std::vector<FractionalAlignment>& blocks() const { return blocks_; }
  Eigen::MatrixXd w_unconstrained() const;
  MetricMatrix w(Structure structure) const;

  double objective() const;  // recomputed from the blocks
  double objective_incremental() const { return objective_incremental_; }

  Eigen::MatrixXd block_gradient(int i) const;

  struct StepOutcome {
    double gamma;
    double gap;       // FW gap of the touched block before the step
    double decrease;  // objective change, always <= 0
  };
  /// One Frank-Wolfe step on block i. gamma_override (in [0,1]) replaces the
  /// exact line search (used by the harmonic schedule).
  StepOutcome step(int i, std::optional<double> gamma_override = std::nullopt);

  double block_gap(int i) const;
  double full_gap() const;  // sum over blocks

  /// Consistency checks: active sets reconstruct the dense blocks, the cached
  /// sum of psi matches a recomputation, and so does the running objective.
  /// Throws NumericError beyond `tol`.
  void audit(double tol = 1e-8) const;

 private:
  const std::vector<SequencePair>* data_;
  double lambda_;
  bool include_loss_;
  std::vector<FractionalAlignment> blocks_;
  std::vector<TriangularOperator> row_ops_;
  std::vector<TriangularOperator> col_ops_;
  Eigen::MatrixXd psi_sum_;
  double objective_incremental_ = 0.0;
};

/// Block-coordinate Frank-Wolfe on the SAL dual, starting from blocks = Y_i
/// (so W = 0). Returns the projected representer metric.
TrainResult train_sal(const std::vector<SequencePair>& data, const SalConfig& config);

}  // namespace warpmetric
