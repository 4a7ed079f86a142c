#include "warpmetric/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numbers>
#include <random>
#include <sstream>

namespace warpmetric {

namespace {

using json = nlohmann::json;

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double column_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

Eigen::MatrixXd normalize(const Eigen::MatrixXd& series, NormalizeMode mode) {
  if (series.rows() < 1) throw DimensionMismatchError("series must have at least one frame");
  Eigen::MatrixXd out = series;
  const Eigen::Index t = series.rows();
  std::vector<double> work(t);
  for (Eigen::Index j = 0; j < series.cols(); ++j) {
    for (Eigen::Index i = 0; i < t; ++i) work[i] = series(i, j);
    const double med = column_median(work);
    out.col(j).array() -= med;
    double scale = 0.0;
    if (mode == NormalizeMode::rms_about_median) {
      scale = std::sqrt(out.col(j).squaredNorm() / static_cast<double>(t));
    } else {
      for (Eigen::Index i = 0; i < t; ++i) work[i] = std::abs(out(i, j));
      scale = column_median(work);
    }
    if (scale >= 1e-12) out.col(j) /= scale;
  }
  return out;
}

namespace {

void validate_spec(const WarpSpec& spec) {
  if (spec.base_length < 1) throw BadSpecError("base_length must be >= 1");
  if (spec.informative_dims < 1) throw BadSpecError("informative_dims must be >= 1");
  if (spec.noise_dims < 0) throw BadSpecError("noise_dims must be >= 0");
  if (spec.noise_sigma < 0) throw BadSpecError("noise_sigma must be >= 0");
  if (spec.noise_feature_sigma < 0) throw BadSpecError("noise_feature_sigma must be >= 0");
  if (spec.warp_knots.size() < 2) throw BadSpecError("tempo curve needs at least two knots");
  if (spec.warp_knots.front().position != 0.0 || spec.warp_knots.back().position != 1.0) {
    throw BadSpecError("tempo knots must cover [0, 1]");
  }
  for (std::size_t k = 0; k < spec.warp_knots.size(); ++k) {
    if (spec.warp_knots[k].multiplier <= 0.0) {
      throw BadSpecError("tempo multiplier at knot " + std::to_string(k) + " must be positive");
    }
    if (k > 0 && spec.warp_knots[k].position <= spec.warp_knots[k - 1].position) {
      throw BadSpecError("tempo knot positions must be strictly increasing");
    }
  }
}

double tempo_at(const std::vector<WarpKnot>& knots, double u) {
  if (u <= knots.front().position) return knots.front().multiplier;
  if (u >= knots.back().position) return knots.back().multiplier;
  for (std::size_t k = 1; k < knots.size(); ++k) {
    if (u <= knots[k].position) {
      const double span = knots[k].position - knots[k - 1].position;
      const double w = (u - knots[k - 1].position) / span;
      return (1.0 - w) * knots[k - 1].multiplier + w * knots[k].multiplier;
    }
  }
  return knots.back().multiplier;
}

}  // namespace

SequencePair generate_pair(const WarpSpec& spec) {
  validate_spec(spec);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const int t_a = spec.base_length;
  const int p_info = spec.informative_dims;

  // Smooth base channels: three superposed sinusoids per channel with random
  // frequencies and phases, unit-order amplitude.
  constexpr int kComponents = 3;
  constexpr double kAmps[kComponents] = {1.0, 0.6, 0.35};
  Eigen::MatrixXd base(t_a, p_info);
  for (int d = 0; d < p_info; ++d) {
    double freq[kComponents], phase[kComponents];
    for (int c = 0; c < kComponents; ++c) {
      freq[c] = 0.5 + 3.5 * unif(rng);  // cycles over the whole series
      phase[c] = 2.0 * std::numbers::pi * unif(rng);
    }
    for (int i = 0; i < t_a; ++i) {
      const double u = t_a > 1 ? static_cast<double>(i) / (t_a - 1) : 0.0;
      double v = 0.0;
      for (int c = 0; c < kComponents; ++c) {
        v += kAmps[c] * std::sin(2.0 * std::numbers::pi * freq[c] * u + phase[c]);
      }
      base(i, d) = v;
    }
  }

  // Integer warp map: cumulative tempo decides how many B frames each base
  // frame receives; midpoint sampling of the cumulative curve keeps the map
  // monotone and surjective onto [1, t_a] for stretch-style curves.
  std::vector<double> cum(t_a + 1, 0.0);
  for (int i = 1; i <= t_a; ++i) {
    const double u = t_a > 1 ? static_cast<double>(i - 1) / (t_a - 1) : 0.0;
    cum[i] = cum[i - 1] + tempo_at(spec.warp_knots, u);
  }
  const double total = cum[t_a];
  const int t_b = std::max(1, static_cast<int>(std::llround(total)));
  std::vector<int> warp(t_b);
  for (int t = 0; t < t_b; ++t) {
    const double tau = (t + 0.5) * total / t_b;
    const int idx =
        static_cast<int>(std::upper_bound(cum.begin() + 1, cum.end(), tau) - cum.begin());
    warp[t] = std::min(idx, t_a);
  }

  // Truth path: walk the warp graph, bridging index jumps with vertical moves
  // in the later column and trailing frames in the last column.
  std::vector<AlignmentPath::Step> steps;
  steps.emplace_back(1, 1);
  int cur = 1;
  while (cur < warp[0]) steps.emplace_back(++cur, 1);
  for (int t = 1; t < t_b; ++t) {
    if (warp[t] == cur) {
      steps.emplace_back(cur, t + 1);
    } else {
      steps.emplace_back(++cur, t + 1);
      while (cur < warp[t]) steps.emplace_back(++cur, t + 1);
    }
  }
  while (cur < t_a) steps.emplace_back(++cur, t_b);
  AlignmentPath truth = AlignmentPath::validated(std::move(steps), t_a, t_b);

  const int p = p_info + spec.noise_dims;
  Eigen::MatrixXd a(t_a, p);
  Eigen::MatrixXd b(t_b, p);
  a.leftCols(p_info) = base;
  for (int t = 0; t < t_b; ++t) b.row(t).head(p_info) = base.row(warp[t] - 1);
  if (spec.noise_sigma > 0.0) {
    for (int i = 0; i < t_a; ++i)
      for (int d = 0; d < p_info; ++d) a(i, d) += spec.noise_sigma * gauss(rng);
    for (int i = 0; i < t_b; ++i)
      for (int d = 0; d < p_info; ++d) b(i, d) += spec.noise_sigma * gauss(rng);
  }
  for (int i = 0; i < t_a; ++i)
    for (int d = p_info; d < p; ++d) a(i, d) = spec.noise_feature_sigma * gauss(rng);
  for (int i = 0; i < t_b; ++i)
    for (int d = p_info; d < p; ++d) b(i, d) = spec.noise_feature_sigma * gauss(rng);

  return SequencePair{"", std::move(a), std::move(b), std::move(truth)};
}

namespace {

ParseError json_parse_error(const std::filesystem::path& file, const std::string& text,
                            const json::parse_error& e) {
  long line = 1, col = 1;
  for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return ParseError(file.string(), line, col, e.what());
}

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

SynthSpec SynthSpec::load(const std::filesystem::path& file) {
  const std::string text = read_file(file);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw json_parse_error(file, text, e);
  }
  SynthSpec spec;
  try {
    spec.num_pairs = doc.value("num_pairs", spec.num_pairs);
    spec.seed = doc.value("seed", spec.seed);
    if (doc.contains("base_length")) {
      const auto& bl = doc.at("base_length");
      if (bl.is_number()) {
        spec.base_length_min = spec.base_length_max = bl.get<int>();
      } else {
        spec.base_length_min = bl.value("min", spec.base_length_min);
        spec.base_length_max = bl.value("max", spec.base_length_max);
      }
    }
    spec.informative_dims = doc.value("informative_dims", spec.informative_dims);
    spec.noise_dims = doc.value("noise_dims", spec.noise_dims);
    spec.noise_sigma = doc.value("noise_sigma", spec.noise_sigma);
    spec.noise_feature_sigma = doc.value("noise_feature_sigma", spec.noise_feature_sigma);
    if (doc.contains("tempo")) {
      const auto& tempo = doc.at("tempo");
      if (tempo.contains("curve")) {
        for (const auto& knot : tempo.at("curve")) {
          spec.fixed_curve.push_back({knot.at(0).get<double>(), knot.at(1).get<double>()});
        }
      } else {
        spec.random_knots = tempo.value("knots", spec.random_knots);
        spec.multiplier_min = tempo.value("multiplier_min", spec.multiplier_min);
        spec.multiplier_max = tempo.value("multiplier_max", spec.multiplier_max);
      }
    }
  } catch (const json::exception& e) {
    throw BadSpecError(file.string() + ": " + e.what());
  }
  if (spec.num_pairs < 1) throw BadSpecError("num_pairs must be >= 1");
  if (spec.base_length_min < 1 || spec.base_length_max < spec.base_length_min) {
    throw BadSpecError("base_length range is invalid");
  }
  if (spec.random_knots < 2) throw BadSpecError("tempo needs at least two knots");
  if (spec.multiplier_min <= 0.0 || spec.multiplier_max < spec.multiplier_min) {
    throw BadSpecError("tempo multiplier range is invalid");
  }
  return spec;
}

std::vector<SequencePair> generate_dataset(const SynthSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<SequencePair> out;
  out.reserve(spec.num_pairs);
  for (int k = 0; k < spec.num_pairs; ++k) {
    WarpSpec ws;
    ws.base_length =
        spec.base_length_min +
        static_cast<int>(unif(rng) * (spec.base_length_max - spec.base_length_min + 1));
    ws.base_length = std::min(ws.base_length, spec.base_length_max);
    ws.informative_dims = spec.informative_dims;
    ws.noise_dims = spec.noise_dims;
    ws.noise_sigma = spec.noise_sigma;
    ws.noise_feature_sigma = spec.noise_feature_sigma;
    ws.seed = rng();
    if (!spec.fixed_curve.empty()) {
      ws.warp_knots = spec.fixed_curve;
    } else {
      std::vector<double> pos = {0.0, 1.0};
      for (int i = 0; i < spec.random_knots - 2; ++i) pos.push_back(unif(rng));
      std::sort(pos.begin(), pos.end());
      ws.warp_knots.clear();
      for (double u : pos) {
        const double m =
            spec.multiplier_min + unif(rng) * (spec.multiplier_max - spec.multiplier_min);
        // Duplicate positions can appear when a random interior knot lands on
        // an endpoint; nudge them apart.
        if (!ws.warp_knots.empty() && u <= ws.warp_knots.back().position) {
          u = std::nextafter(ws.warp_knots.back().position, 2.0);
        }
        ws.warp_knots.push_back({std::min(u, 1.0), m});
      }
      ws.warp_knots.front().position = 0.0;
      ws.warp_knots.back().position = 1.0;
    }
    SequencePair pair = generate_pair(ws);
    char id[32];
    std::snprintf(id, sizeof(id), "pair_%04d", k);
    pair.id = id;
    out.push_back(std::move(pair));
  }
  return out;
}

Eigen::MatrixXd load_matrix_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    const char* ptr = line.data();
    const char* end = line.data() + line.size();
    long col = 1;
    while (true) {
      double v = 0.0;
      const auto [next, ec] = std::from_chars(ptr, end, v);
      if (ec != std::errc()) {
        throw ParseError(file.string(), line_no, col, "expected a number");
      }
      row.push_back(v);
      ptr = next;
      if (ptr == end) break;
      if (*ptr != ',') {
        throw ParseError(file.string(), line_no, col, "expected ',' between fields");
      }
      ++ptr;
      ++col;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(file.string(), line_no, 1,
                       "row has " + std::to_string(row.size()) + " fields, expected " +
                           std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(file.string(), 1, 1, "matrix file is empty");
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

void save_matrix_csv(const Eigen::MatrixXd& m, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot open " + file.string() + " for writing");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_full(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("write to " + file.string() + " failed");
}

AlignmentPath load_path_csv(const std::filesystem::path& file, int rows, int cols) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  std::vector<AlignmentPath::Step> steps;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    int i = 0, j = 0;
    const char* ptr = line.data();
    const char* end = line.data() + line.size();
    auto [p1, e1] = std::from_chars(ptr, end, i);
    if (e1 != std::errc() || p1 == end || *p1 != ',') {
      throw ParseError(file.string(), line_no, 1, "expected 'i,j'");
    }
    auto [p2, e2] = std::from_chars(p1 + 1, end, j);
    if (e2 != std::errc() || p2 != end) {
      throw ParseError(file.string(), line_no, 2, "expected 'i,j'");
    }
    steps.emplace_back(i, j);
  }
  return AlignmentPath::validated(std::move(steps), rows, cols);
}

void save_path_csv(const AlignmentPath& path, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot open " + file.string() + " for writing");
  for (const auto& [i, j] : path.steps()) out << i << ',' << j << '\n';
  if (!out) throw IoError("write to " + file.string() + " failed");
}

std::vector<SequencePair> load_manifest(const std::filesystem::path& manifest_file) {
  const std::string text = read_file(manifest_file);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw json_parse_error(manifest_file, text, e);
  }
  const auto dir = manifest_file.parent_path();
  std::vector<SequencePair> out;
  if (!doc.contains("pairs") || !doc.at("pairs").is_array()) {
    throw ParseError(manifest_file.string(), 1, 1, "manifest must contain a 'pairs' array");
  }
  for (const auto& entry : doc.at("pairs")) {
    SequencePair pair;
    try {
      pair.id = entry.at("id").get<std::string>();
      pair.a = load_matrix_csv(dir / entry.at("file_A").get<std::string>());
      pair.b = load_matrix_csv(dir / entry.at("file_B").get<std::string>());
      if (entry.contains("file_truth") && !entry.at("file_truth").is_null()) {
        pair.truth = load_path_csv(dir / entry.at("file_truth").get<std::string>(),
                                   static_cast<int>(pair.a.rows()),
                                   static_cast<int>(pair.b.rows()));
      }
    } catch (const json::exception& e) {
      throw ParseError(manifest_file.string(), 1, 1, std::string("manifest entry: ") + e.what());
    }
    if (pair.a.cols() != pair.b.cols()) {
      throw InconsistentDimsError("pair '" + pair.id + "' has A with " +
                                  std::to_string(pair.a.cols()) + " features but B with " +
                                  std::to_string(pair.b.cols()));
    }
    out.push_back(std::move(pair));
  }
  return out;
}

void save_manifest(const std::vector<SequencePair>& data,
                   const std::filesystem::path& manifest_file) {
  const auto dir = manifest_file.parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  json pairs = json::array();
  for (const auto& pair : data) {
    const std::string fa = pair.id + "_A.csv";
    const std::string fb = pair.id + "_B.csv";
    save_matrix_csv(pair.a, dir / fa);
    save_matrix_csv(pair.b, dir / fb);
    json entry{{"id", pair.id}, {"file_A", fa}, {"file_B", fb}};
    if (pair.truth) {
      const std::string ft = pair.id + "_truth.csv";
      save_path_csv(*pair.truth, dir / ft);
      entry["file_truth"] = ft;
    }
    pairs.push_back(std::move(entry));
  }
  std::ofstream out(manifest_file);
  if (!out) throw IoError("cannot open " + manifest_file.string() + " for writing");
  out << json{{"pairs", std::move(pairs)}}.dump(2) << '\n';
  if (!out) throw IoError("write to " + manifest_file.string() + " failed");
}

}  // namespace warpmetric
