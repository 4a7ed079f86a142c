#include "warpmetric/train_hamming.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>

#include "warpmetric/losses.hpp"

namespace warpmetric {

namespace {

std::string format_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void validate_training_data(const std::vector<SequencePair>& data) {
  if (data.empty()) throw EmptyDatasetError();
  const auto p = data.front().dim();
  for (const auto& pair : data) {
    if (pair.dim() != p || pair.b.cols() != p) {
      throw DimensionMismatchError("pair '" + pair.id + "' has feature dimension " +
                                   std::to_string(pair.dim()) + ", expected " + std::to_string(p));
    }
    if (!pair.truth) {
      throw DataError("pair '" + pair.id + "' has no ground-truth path; training needs one");
    }
  }
}

double truth_score(const Eigen::MatrixXd& c, const AlignmentPath& truth) {
  double s = 0.0;
  for (const auto& [i, j] : truth.steps()) s += c(i - 1, j - 1);
  return s;
}

}  // namespace

LossAugmentedResult loss_augmented_decode_hamming(const Eigen::MatrixXd& a,
                                                  const Eigen::MatrixXd& b,
                                                  const AlignmentPath& truth,
                                                  const MetricMatrix& w) {
  Eigen::MatrixXd c = affinity(a, b, w);
  if (c.rows() != truth.rows() || c.cols() != truth.cols()) {
    throw DimensionMismatchError("truth path does not match the sequence lengths");
  }
  c.array() += 1.0;  // + U
  for (const auto& [i, j] : truth.steps()) c(i - 1, j - 1) -= 2.0;
  auto decoded = dtw_decode(c);
  return LossAugmentedResult{std::move(decoded.path), decoded.score};
}

double primal_objective(const std::vector<SequencePair>& data, const MetricMatrix& w,
                        double lambda) {
  validate_training_data(data);
  double hinge_sum = 0.0;
  for (const auto& pair : data) {
    const auto aug = loss_augmented_decode_hamming(pair.a, pair.b, *pair.truth, w);
    const Eigen::MatrixXd c = affinity(pair.a, pair.b, w);
    const double truth_size = static_cast<double>(pair.truth->size());
    // hinge = max_Y [ l_H(Y, truth) + <C, Y> ] - <C, truth>
    hinge_sum += aug.augmented_score + truth_size - truth_score(c, *pair.truth);
  }
  return 0.5 * lambda * w.values().squaredNorm() + hinge_sum / data.size();
}

TrainResult train_hamming(const std::vector<SequencePair>& data, const TrainConfig& config) {
  validate_training_data(data);
  if (config.lambda <= 0.0) throw OutOfRangeError("lambda must be positive");
  if (config.epochs < 1) throw OutOfRangeError("epochs must be positive");
  if (config.eval_every < 1) throw OutOfRangeError("eval_every must be positive");

  const int n = static_cast<int>(data.size());
  const int p = data.front().dim();
  const long total_steps = static_cast<long>(config.epochs) * n;
  const long tail_start = total_steps / 2 + 1;

  MetricMatrix w = MetricMatrix::identity_baseline(p, config.structure);
  Eigen::MatrixXd tail_sum = Eigen::MatrixXd::Zero(p, p);
  long tail_count = 0;

  std::mt19937_64 rng(config.seed);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  TrainReport report;
  report.add_provenance("loss", "hamming");
  report.add_provenance("lambda", format_g(config.lambda));
  report.add_provenance("epochs", std::to_string(config.epochs));
  report.add_provenance("seed", std::to_string(config.seed));
  report.add_provenance("structure", to_string(config.structure));
  report.add_provenance("step_rule", config.step_rule == StepRule::constant
                                         ? "constant(" + format_g(config.step_constant) + ")"
                                         : "pegasos_1_over_lambda_t");
  report.add_provenance("optimizer", "projected stochastic subgradient");

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    if (!config.record_timings) return 0.0;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  auto evaluate = [&](long iter, const MetricMatrix& model) {
    double delta_sum = 0.0;
    double hamming_sum = 0.0;
    for (const auto& pair : data) {
      const auto decoded = dtw_decode(affinity(pair.a, pair.b, model));
      delta_sum += delta_abs(decoded.path, *pair.truth);
      hamming_sum += hamming_loss(decoded.path, *pair.truth);
    }
    report.checkpoints.push_back(CheckpointRecord{iter, primal_objective(data, model, config.lambda),
                                                  delta_sum / n, hamming_sum / n, elapsed()});
  };

  long t = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (int k = 0; k < n; ++k) {
      ++t;
      const auto& pair = data[order[k]];
      const auto aug = loss_augmented_decode_hamming(pair.a, pair.b, *pair.truth, w);
      const Eigen::MatrixXd residual = psi(pair.a, pair.b, *pair.truth, aug.path);
      const double eta = config.step_rule == StepRule::constant
                             ? config.step_constant
                             : 1.0 / (config.lambda * static_cast<double>(t));
      w = project(w.values() - eta * (config.lambda * w.values() - residual), config.structure);
      if (t >= tail_start) {
        tail_sum += w.values();
        ++tail_count;
      }
      if (t % config.eval_every == 0 && t < total_steps) evaluate(t, w);
    }
  }

  MetricMatrix averaged = project(tail_sum / static_cast<double>(tail_count), config.structure);
  report.add_provenance("last_iterate_objective",
                        format_g(primal_objective(data, w, config.lambda)));
  report.add_provenance("returned_model", "tail_average");
  evaluate(total_steps, averaged);
  return TrainResult{std::move(averaged), std::move(report)};
}

}  // namespace warpmetric
