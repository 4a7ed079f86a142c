#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "warpmetric/dataset.hpp"
#include "warpmetric/metric.hpp"

namespace warpmetric {

struct PairEval {
  std::string id;
  double delta_abs;
  double delta_max;
  double hamming;
};

/// Per-pair alignment errors of one model plus their aggregates.
struct EvalSummary {
  std::vector<PairEval> pairs;
  double mean_delta_abs = 0.0;
  double mean_delta_max = 0.0;
  double mean_hamming = 0.0;
  double max_delta_abs = 0.0;
  double max_delta_max = 0.0;

  static EvalSummary from_pairs(std::vector<PairEval> pairs);
};

/// Best / worst mean errors over repeated experiments (e.g. different seeds).
struct RepeatAggregate {
  double best_mean_delta_abs;
  double worst_mean_delta_abs;
  double best_mean_delta_max;
  double worst_mean_delta_max;
};
RepeatAggregate aggregate_repeats(const std::vector<EvalSummary>& runs);

/// Decodes every pair with the model and scores the result against the truth.
/// Every pair must carry a ground-truth path.
EvalSummary evaluate_model(const MetricMatrix& w, const std::vector<SequencePair>& data);

/// Baselines: the (trace-normalized) identity metric plus one indicator
/// metric e_k e_k^T per feature. Returns (label, summary) rows; labels are
/// "identity" and "feature_<k>" (1-based).
std::vector<std::pair<std::string, EvalSummary>> baseline_summaries(
    const std::vector<SequencePair>& data);

/// CSV rows: row_type,id,delta_abs,delta_max,hamming with one `pair` row per
/// example followed by `mean` and `max` aggregate rows. `provenance` lines are
/// written as leading "# key=value" comments.
void save_eval_csv(const EvalSummary& summary,
                   const std::vector<std::pair<std::string, std::string>>& provenance,
                   const std::filesystem::path& file);

/// Same layout with a leading `model` column, one block per baseline.
void save_baseline_csv(const std::vector<std::pair<std::string, EvalSummary>>& baselines,
                       const std::vector<std::pair<std::string, std::string>>& provenance,
                       const std::filesystem::path& file);

/// Human-readable summary; for diagonal metrics includes per-feature weights.
std::string summary_text(const EvalSummary& summary, const MetricMatrix* w = nullptr);

}  // namespace warpmetric
