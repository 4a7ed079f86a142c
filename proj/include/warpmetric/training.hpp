#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "warpmetric/metric.hpp"

namespace warpmetric {

enum class StepRule { pegasos_1_over_lambda_t, constant };

/// Shared knobs of both trainers.
struct TrainConfig {
  double lambda = 1e-3;
  int epochs = 5;
  std::uint64_t seed = 0;
  Structure structure = Structure::psd;
  StepRule step_rule = StepRule::pegasos_1_over_lambda_t;
  double step_constant = 1e-3;  // step size when step_rule == constant
  int eval_every = 10;          // checkpoint cadence, in steps
  /// Fill the `seconds` column with measured wall time. Off by default so
  /// identical runs produce identical reports.
  bool record_timings = false;
};

struct CheckpointRecord {
  long iter = 0;
  double objective = 0.0;
  double train_delta_abs = 0.0;
  double train_hamming = 0.0;
  double seconds = 0.0;
  double dual_objective = 0.0;  // SAL trainer only
  double fw_gap = 0.0;          // SAL trainer only: gap of the touched block
};

/// Per-checkpoint training log. `has_dual_columns` selects the wider CSV
/// layout used by the SAL trainer.
struct TrainReport {
  std::vector<CheckpointRecord> checkpoints;
  std::vector<std::pair<std::string, std::string>> provenance;
  bool has_dual_columns = false;

  void add_provenance(std::string key, std::string value) {
    provenance.emplace_back(std::move(key), std::move(value));
  }
  /// CSV with leading "# key=value" provenance lines, then
  /// iter,objective,train_delta_abs,train_hamming,seconds[,dual_objective,fw_gap].
  std::string to_csv() const;
  void save_csv(const std::filesystem::path& file) const;
};

struct TrainResult {
  MetricMatrix model;
  TrainReport report;
};

}  // namespace warpmetric
