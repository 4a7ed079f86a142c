#include "warpmetric/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "warpmetric/losses.hpp"

namespace warpmetric {

namespace {

std::string format_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

EvalSummary EvalSummary::from_pairs(std::vector<PairEval> pairs) {
  if (pairs.empty()) throw EmptyDatasetError();
  EvalSummary s;
  s.pairs = std::move(pairs);
  for (const auto& p : s.pairs) {
    s.mean_delta_abs += p.delta_abs;
    s.mean_delta_max += p.delta_max;
    s.mean_hamming += p.hamming;
    s.max_delta_abs = std::max(s.max_delta_abs, p.delta_abs);
    s.max_delta_max = std::max(s.max_delta_max, p.delta_max);
  }
  const double n = static_cast<double>(s.pairs.size());
  s.mean_delta_abs /= n;
  s.mean_delta_max /= n;
  s.mean_hamming /= n;
  return s;
}

RepeatAggregate aggregate_repeats(const std::vector<EvalSummary>& runs) {
  if (runs.empty()) throw EmptyDatasetError();
  RepeatAggregate agg{runs[0].mean_delta_abs, runs[0].mean_delta_abs, runs[0].mean_delta_max,
                      runs[0].mean_delta_max};
  for (const auto& r : runs) {
    agg.best_mean_delta_abs = std::min(agg.best_mean_delta_abs, r.mean_delta_abs);
    agg.worst_mean_delta_abs = std::max(agg.worst_mean_delta_abs, r.mean_delta_abs);
    agg.best_mean_delta_max = std::min(agg.best_mean_delta_max, r.mean_delta_max);
    agg.worst_mean_delta_max = std::max(agg.worst_mean_delta_max, r.mean_delta_max);
  }
  return agg;
}

EvalSummary evaluate_model(const MetricMatrix& w, const std::vector<SequencePair>& data) {
  if (data.empty()) throw EmptyDatasetError();
  std::vector<PairEval> rows;
  rows.reserve(data.size());
  for (const auto& pair : data) {
    if (!pair.truth) {
      throw DataError("pair '" + pair.id + "' has no ground-truth path; evaluation needs one");
    }
    const auto decoded = dtw_decode(affinity(pair.a, pair.b, w));
    const auto deltas = delta_losses(decoded.path, *pair.truth);
    rows.push_back(
        PairEval{pair.id, deltas.mean, deltas.max, hamming_loss(decoded.path, *pair.truth)});
  }
  return EvalSummary::from_pairs(std::move(rows));
}

std::vector<std::pair<std::string, EvalSummary>> baseline_summaries(
    const std::vector<SequencePair>& data) {
  if (data.empty()) throw EmptyDatasetError();
  const int p = data.front().dim();
  std::vector<std::pair<std::string, EvalSummary>> out;
  out.emplace_back("identity",
                   evaluate_model(MetricMatrix::identity_baseline(p, Structure::psd), data));
  for (int k = 0; k < p; ++k) {
    Eigen::MatrixXd indicator = Eigen::MatrixXd::Zero(p, p);
    indicator(k, k) = 1.0;
    out.emplace_back("feature_" + std::to_string(k + 1),
                     evaluate_model(project(indicator, Structure::diagonal_nonneg), data));
  }
  return out;
}

namespace {

void write_provenance(std::ostream& out,
                      const std::vector<std::pair<std::string, std::string>>& provenance) {
  for (const auto& [key, value] : provenance) out << "# " << key << '=' << value << '\n';
}

void write_rows(std::ostream& out, const EvalSummary& s, const std::string& prefix) {
  for (const auto& p : s.pairs) {
    out << prefix << "pair," << p.id << ',' << format_g(p.delta_abs) << ','
        << format_g(p.delta_max) << ',' << format_g(p.hamming) << '\n';
  }
  out << prefix << "mean,all," << format_g(s.mean_delta_abs) << ',' << format_g(s.mean_delta_max)
      << ',' << format_g(s.mean_hamming) << '\n';
  out << prefix << "max,all," << format_g(s.max_delta_abs) << ',' << format_g(s.max_delta_max)
      << ",\n";
}

}  // namespace

void save_eval_csv(const EvalSummary& summary,
                   const std::vector<std::pair<std::string, std::string>>& provenance,
                   const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot open " + file.string() + " for writing");
  write_provenance(out, provenance);
  out << "row_type,id,delta_abs,delta_max,hamming\n";
  write_rows(out, summary, "");
  if (!out) throw IoError("write to " + file.string() + " failed");
}

void save_baseline_csv(const std::vector<std::pair<std::string, EvalSummary>>& baselines,
                       const std::vector<std::pair<std::string, std::string>>& provenance,
                       const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot open " + file.string() + " for writing");
  write_provenance(out, provenance);
  out << "model,row_type,id,delta_abs,delta_max,hamming\n";
  for (const auto& [label, summary] : baselines) write_rows(out, summary, label + ",");
  if (!out) throw IoError("write to " + file.string() + " failed");
}

std::string summary_text(const EvalSummary& summary, const MetricMatrix* w) {
  std::ostringstream out;
  out << "pairs evaluated: " << summary.pairs.size() << '\n';
  out << "mean delta_abs (frames): " << format_g(summary.mean_delta_abs) << '\n';
  out << "mean delta_max (frames): " << format_g(summary.mean_delta_max) << '\n';
  out << "max delta_abs  (frames): " << format_g(summary.max_delta_abs) << '\n';
  out << "max delta_max  (frames): " << format_g(summary.max_delta_max) << '\n';
  out << "mean hamming   (cells):  " << format_g(summary.mean_hamming) << '\n';
  if (w != nullptr && w->structure() == Structure::diagonal_nonneg) {
    out << "feature weights (diagonal of W):\n";
    const double trace = w->values().trace();
    for (int k = 0; k < w->dim(); ++k) {
      const double v = w->values()(k, k);
      out << "  feature_" << (k + 1) << ": " << format_g(v);
      if (trace > 0.0) out << "  (" << format_g(100.0 * v / trace) << "% of trace)";
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace warpmetric
