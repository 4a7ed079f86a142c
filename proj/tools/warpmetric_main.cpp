// warpmetric: learn a Mahalanobis metric for time-series alignment and use it
// to decode, evaluate and compare alignments.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "warpmetric/dataset.hpp"
#include "warpmetric/eval.hpp"
#include "warpmetric/train_hamming.hpp"
#include "warpmetric/train_sal.hpp"

namespace fs = std::filesystem;
using namespace warpmetric;

namespace {

using Provenance = std::vector<std::pair<std::string, std::string>>;

std::string format_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Structure parse_structure(const std::string& name) { return structure_from_string(name); }

struct TrainFlags {
  std::string manifest;
  std::string loss = "sal";
  std::string structure = "diag";
  double lambda = 1e-3;
  int epochs = 5;
  long steps = 0;
  std::uint64_t seed = 0;
  std::string step_rule = "pegasos";
  double step_size = 1e-3;
  int eval_every = 10;
  double gap_tol = 1e-4;
  std::string sampling = "uniform";
  std::string line_search = "exact";
  bool timings = false;
  std::string out_model;
  std::string out_report;
};

int run_synth(const std::string& spec_file, const std::string& out_dir) {
  const SynthSpec spec = SynthSpec::load(spec_file);
  auto data = generate_dataset(spec);
  fs::create_directories(out_dir);
  save_manifest(data, fs::path(out_dir) / "manifest.json");
  std::cout << "wrote " << data.size() << " pairs to " << out_dir << "/manifest.json\n";
  return 0;
}

int run_train(const TrainFlags& f) {
  const auto data = load_manifest(f.manifest);
  TrainConfig config;
  config.lambda = f.lambda;
  config.epochs = f.epochs;
  config.seed = f.seed;
  config.structure = parse_structure(f.structure);
  config.step_rule = f.step_rule == "constant" ? StepRule::constant
                                               : StepRule::pegasos_1_over_lambda_t;
  config.step_constant = f.step_size;
  config.eval_every = f.eval_every;
  config.record_timings = f.timings;

  TrainResult result = [&] {
    if (f.loss == "hamming") return train_hamming(data, config);
    if (f.loss != "sal") throw OutOfRangeError("unknown loss '" + f.loss + "'");
    SalConfig sal;
    sal.base = config;
    sal.steps = f.steps;
    sal.gap_tolerance = f.gap_tol;
    sal.sampling = f.sampling == "cyclic" ? SalConfig::Sampling::cyclic
                                          : SalConfig::Sampling::uniform;
    sal.line_search = f.line_search == "harmonic" ? SalConfig::LineSearch::harmonic
                                                  : SalConfig::LineSearch::exact;
    return train_sal(data, sal);
  }();

  result.report.add_provenance("command", "train");
  result.report.add_provenance("manifest", f.manifest);
  result.report.add_provenance("eval_every", std::to_string(f.eval_every));
  result.report.add_provenance("timings", f.timings ? "on" : "off");
  if (!f.out_model.empty()) result.model.save(f.out_model);
  if (!f.out_report.empty()) result.report.save_csv(f.out_report);

  const auto& last = result.report.checkpoints.back();
  std::cout << "trained on " << data.size() << " pairs; final objective "
            << format_g(last.objective) << ", train delta_abs "
            << format_g(last.train_delta_abs) << '\n';
  return 0;
}

int run_align(const std::string& model_file, const std::string& a_file,
              const std::string& b_file, const std::string& out_file, int band) {
  const MetricMatrix w = MetricMatrix::load(model_file);
  const Eigen::MatrixXd a = load_matrix_csv(a_file);
  const Eigen::MatrixXd b = load_matrix_csv(b_file);
  const auto decoded =
      dtw_decode(affinity(a, b, w), band >= 0 ? std::optional<int>(band) : std::nullopt);
  save_path_csv(decoded.path, out_file);
  std::cout << "alignment score " << format_g(decoded.score) << ", path length "
            << decoded.path.size() << '\n';
  return 0;
}

int run_eval(const std::string& model_file, const std::string& manifest,
             const std::string& out_file, const std::string& summary_file) {
  const MetricMatrix w = MetricMatrix::load(model_file);
  const auto data = load_manifest(manifest);
  const EvalSummary summary = evaluate_model(w, data);
  Provenance provenance{{"command", "eval"}, {"model", model_file}, {"manifest", manifest}};
  if (!out_file.empty()) save_eval_csv(summary, provenance, out_file);
  const std::string text = summary_text(summary, &w);
  if (!summary_file.empty()) {
    std::ofstream out(summary_file);
    if (!out) throw IoError("cannot open " + summary_file + " for writing");
    out << text;
  }
  std::cout << text;
  return 0;
}

int run_baseline(const std::string& manifest, const std::string& out_file,
                 const std::string& summary_file) {
  const auto data = load_manifest(manifest);
  const auto baselines = baseline_summaries(data);
  Provenance provenance{{"command", "baseline"}, {"manifest", manifest}};
  if (!out_file.empty()) save_baseline_csv(baselines, provenance, out_file);

  std::ostringstream text;
  const EvalSummary* best = nullptr;
  std::string best_label;
  for (const auto& [label, summary] : baselines) {
    text << label << ": mean delta_abs " << format_g(summary.mean_delta_abs)
         << ", mean delta_max " << format_g(summary.mean_delta_max) << '\n';
    if (label != "identity" && (best == nullptr || summary.mean_delta_abs < best->mean_delta_abs)) {
      best = &summary;
      best_label = label;
    }
  }
  if (best != nullptr) {
    text << "best single feature: " << best_label << " (mean delta_abs "
         << format_g(best->mean_delta_abs) << ")\n";
  }
  if (!summary_file.empty()) {
    std::ofstream out(summary_file);
    if (!out) throw IoError("cannot open " + summary_file + " for writing");
    out << text.str();
  }
  std::cout << text.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"warpmetric: metric learning for multivariate time-series alignment"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic warped-pair dataset");
  std::string spec_file, out_dir;
  synth->add_option("--spec", spec_file, "dataset spec JSON")->required();
  synth->add_option("--out", out_dir, "output directory for manifest and data files")->required();

  // train
  auto* train = app.add_subcommand("train", "learn a metric from a manifest with ground truth");
  TrainFlags tf;
  train->add_option("--manifest", tf.manifest, "dataset manifest JSON")->required();
  train->add_option("--loss", tf.loss, "training loss")
      ->check(CLI::IsMember({"hamming", "sal"}))
      ->capture_default_str();
  train->add_option("--structure", tf.structure, "metric structure")
      ->check(CLI::IsMember({"psd", "diag", "free"}))
      ->capture_default_str();
  train->add_option("--lambda", tf.lambda, "regularizer weight")->capture_default_str();
  train->add_option("--epochs", tf.epochs, "epochs (hamming loss)")->capture_default_str();
  train->add_option("--steps", tf.steps, "FW steps (sal loss); 0 = 50 * n")
      ->capture_default_str();
  train->add_option("--seed", tf.seed, "random seed")->capture_default_str();
  train->add_option("--step-rule", tf.step_rule, "subgradient step rule (hamming loss)")
      ->check(CLI::IsMember({"pegasos", "constant"}))
      ->capture_default_str();
  train->add_option("--step-size", tf.step_size, "step size for --step-rule constant")
      ->capture_default_str();
  train->add_option("--eval-every", tf.eval_every, "checkpoint cadence in steps")
      ->capture_default_str();
  train->add_option("--gap-tol", tf.gap_tol, "full-sweep FW gap stop (sal loss)")
      ->capture_default_str();
  train->add_option("--sampling", tf.sampling, "block sampling (sal loss)")
      ->check(CLI::IsMember({"uniform", "cyclic"}))
      ->capture_default_str();
  train->add_option("--line-search", tf.line_search, "FW step size rule (sal loss)")
      ->check(CLI::IsMember({"exact", "harmonic"}))
      ->capture_default_str();
  train->add_flag("--timings", tf.timings,
                  "record wall time in reports (off keeps outputs reproducible)");
  train->add_option("--out", tf.out_model, "output model file");
  train->add_option("--report", tf.out_report, "output training report CSV");

  // align
  auto* align = app.add_subcommand("align", "decode the best alignment of a pair");
  std::string model_file, a_file, b_file, path_out;
  int band = -1;
  align->add_option("--model", model_file, "metric file")->required();
  align->add_option("--a", a_file, "first sequence CSV")->required();
  align->add_option("--b", b_file, "second sequence CSV")->required();
  align->add_option("--out", path_out, "output path CSV")->required();
  align->add_option("--band", band, "Sakoe-Chiba band width (-1 = unconstrained)")
      ->capture_default_str();

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a metric against ground truth");
  std::string eval_model, eval_manifest, eval_out, eval_summary;
  eval->add_option("--model", eval_model, "metric file")->required();
  eval->add_option("--manifest", eval_manifest, "dataset manifest JSON")->required();
  eval->add_option("--out", eval_out, "output CSV");
  eval->add_option("--summary", eval_summary, "output text summary");

  // baseline
  auto* baseline = app.add_subcommand("baseline", "evaluate identity and single-feature metrics");
  std::string base_manifest, base_out, base_summary;
  baseline->add_option("--manifest", base_manifest, "dataset manifest JSON")->required();
  baseline->add_option("--out", base_out, "output CSV");
  baseline->add_option("--summary", base_summary, "output text summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*synth) return run_synth(spec_file, out_dir);
    if (*train) return run_train(tf);
    if (*align) return run_align(model_file, a_file, b_file, path_out, band);
    if (*eval) return run_eval(eval_model, eval_manifest, eval_out, eval_summary);
    if (*baseline) return run_baseline(base_manifest, base_out, base_summary);
  } catch (const NumericError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
