#pragma once

#include "warpmetric/dataset.hpp"
#include "warpmetric/training.hpp"

namespace warpmetric {

struct LossAugmentedResult {
  AlignmentPath path;
  /// max over paths of hamming(Y, truth) + <C, Y> - |truth|; the -|truth|
  /// offset is the constant absorbed by decoding C + U - 2 Y_truth.
  double augmented_score;
};

/// Most-violated alignment for the Hamming hinge: decodes the modified
/// affinity C + U - 2 Y_truth, with U the all-ones matrix.
LossAugmentedResult loss_augmented_decode_hamming(const Eigen::MatrixXd& a,
                                                  const Eigen::MatrixXd& b,
                                                  const AlignmentPath& truth,
                                                  const MetricMatrix& w);

/// Margin-rescaled objective with the Hamming loss: (lambda/2) ||W||_F^2 plus
/// the mean exact hinge, each inner maximization solved by loss-augmented
/// decoding.
double primal_objective(const std::vector<SequencePair>& data, const MetricMatrix& w,
                        double lambda);

/// Projected stochastic subgradient (Pegasos-style) on the margin-rescaled
/// Hamming objective. Examples are visited in a fresh seeded shuffle each
/// epoch; every iterate is projected onto the structure set. The returned
/// model is the projected average of the last half of the iterates.
TrainResult train_hamming(const std::vector<SequencePair>& data, const TrainConfig& config);

}  // namespace warpmetric
