#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "oracles.hpp"
#include "warpmetric/dataset.hpp"
#include "warpmetric/losses.hpp"
#include "warpmetric/metric.hpp"

using namespace warpmetric;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("warpmetric_test_" + std::to_string(::getpid()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("normalize: degenerate, hand-computed and idempotent cases") {
  Eigen::MatrixXd constant(4, 1);
  constant << 3, 3, 3, 3;
  CHECK(normalize(constant).isZero(0.0));

  Eigen::MatrixXd two(2, 1);
  two << 0, 2;  // median 1, deviations (-1, 1), rms 1
  Eigen::MatrixXd expected(2, 1);
  expected << -1, 1;
  CHECK((normalize(two) - expected).cwiseAbs().maxCoeff() < 1e-15);

  const Eigen::MatrixXd once = normalize(two);
  CHECK((normalize(once) - once).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("normalize is invariant to positive affine rescaling") {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd x = oracles::random_matrix(rng, 17, 3);
  for (auto mode : {NormalizeMode::rms_about_median, NormalizeMode::mad}) {
    const Eigen::MatrixXd base = normalize(x, mode);
    const Eigen::MatrixXd scaled = normalize((2.5 * x).array() - 7.0, mode);
    CHECK((base - scaled).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("normalize mad mode uses the median absolute deviation") {
  Eigen::MatrixXd col(5, 1);
  col << 1, 2, 3, 4, 100;  // median 3, |dev| = (2,1,0,1,97), mad = 1
  const Eigen::MatrixXd out = normalize(col, NormalizeMode::mad);
  CHECK(out(0, 0) == doctest::Approx(-2.0));
  CHECK(out(4, 0) == doctest::Approx(97.0));
}

TEST_CASE("generate_pair: identity tempo gives B = A and a diagonal truth") {
  WarpSpec spec;
  spec.base_length = 12;
  spec.informative_dims = 2;
  spec.seed = 5;
  const SequencePair pair = generate_pair(spec);
  CHECK(pair.a.rows() == 12);
  CHECK(pair.b.rows() == 12);
  CHECK((pair.a - pair.b).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(pair.truth.has_value());
  CHECK(pair.truth->size() == 12);
  for (int k = 0; k < 12; ++k) {
    CHECK(pair.truth->steps()[k] == AlignmentPath::Step{k + 1, k + 1});
  }
}

TEST_CASE("generate_pair: doubling tempo matches each base frame to two frames") {
  WarpSpec spec;
  spec.base_length = 4;
  spec.warp_knots = {{0.0, 2.0}, {1.0, 2.0}};
  spec.seed = 9;
  const SequencePair pair = generate_pair(spec);
  CHECK(pair.b.rows() == 8);
  REQUIRE(pair.truth.has_value());
  const std::vector<AlignmentPath::Step> expected = {{1, 1}, {1, 2}, {2, 3}, {2, 4},
                                                     {3, 5}, {3, 6}, {4, 7}, {4, 8}};
  CHECK(pair.truth->steps() == expected);
  CHECK(delta_abs(*pair.truth, *pair.truth) == 0.0);
}

TEST_CASE("generate_pair truths validate across random stretch specs") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> mult(1.0, 2.5);
  std::uniform_int_distribution<int> len(1, 60);
  for (int trial = 0; trial < 40; ++trial) {
    WarpSpec spec;
    spec.base_length = len(rng);
    spec.warp_knots = {{0.0, mult(rng)}, {0.5, mult(rng)}, {1.0, mult(rng)}};
    spec.informative_dims = 2;
    spec.noise_dims = trial % 3;
    spec.noise_sigma = 0.1;
    spec.seed = rng();
    const SequencePair pair = generate_pair(spec);
    REQUIRE(pair.truth.has_value());  // construction throws if invalid
    CHECK(pair.truth->rows() == pair.a.rows());
    CHECK(pair.truth->cols() == pair.b.rows());
    CHECK(pair.dim() == spec.informative_dims + spec.noise_dims);
  }
}

TEST_CASE("noise-free pairs are re-decoded exactly by the identity metric") {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> mult(1.1, 2.0);
  std::uniform_int_distribution<int> len(20, 50);
  for (int trial = 0; trial < 10; ++trial) {
    WarpSpec spec;
    spec.base_length = len(rng);
    spec.warp_knots = {{0.0, mult(rng)}, {0.4, mult(rng)}, {1.0, mult(rng)}};
    spec.informative_dims = 2;
    spec.seed = rng();
    const SequencePair pair = generate_pair(spec);
    const auto decoded =
        dtw_decode(affinity(pair.a, pair.b, Eigen::MatrixXd::Identity(2, 2)));
    CHECK(delta_abs(decoded.path, *pair.truth) == 0.0);
  }
}

TEST_CASE("seeds control generation deterministically") {
  WarpSpec spec;
  spec.base_length = 30;
  spec.warp_knots = {{0.0, 1.0}, {1.0, 2.0}};
  spec.informative_dims = 2;
  spec.noise_dims = 1;
  spec.noise_sigma = 0.2;
  spec.seed = 1;
  const SequencePair first = generate_pair(spec);
  const SequencePair again = generate_pair(spec);
  CHECK((first.a - again.a).cwiseAbs().maxCoeff() == 0.0);
  CHECK((first.b - again.b).cwiseAbs().maxCoeff() == 0.0);

  spec.seed = 2;
  const SequencePair other = generate_pair(spec);
  CHECK(other.a.rows() == first.a.rows());
  CHECK(other.a.cols() == first.a.cols());
  CHECK((first.a - other.a).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("bad warp specs are rejected") {
  WarpSpec spec;
  spec.base_length = 0;
  CHECK_THROWS_AS(generate_pair(spec), BadSpecError);
  spec.base_length = 10;
  spec.warp_knots = {{0.0, 1.0}, {1.0, -2.0}};
  CHECK_THROWS_AS(generate_pair(spec), BadSpecError);
  spec.warp_knots = {{0.2, 1.0}, {1.0, 1.0}};
  CHECK_THROWS_AS(generate_pair(spec), BadSpecError);
  spec.warp_knots = {{0.0, 1.0}, {0.5, 1.0}, {0.5, 2.0}, {1.0, 1.0}};
  CHECK_THROWS_AS(generate_pair(spec), BadSpecError);
}

TEST_CASE("matrix and path files round-trip bit-exactly") {
  TempDir tmp;
  std::mt19937_64 rng(13);
  const Eigen::MatrixXd m = oracles::random_matrix(rng, 9, 4);
  save_matrix_csv(m, tmp.path / "m.csv");
  CHECK(load_matrix_csv(tmp.path / "m.csv") == m);

  const auto path = oracles::random_path(rng, 9, 7);
  save_path_csv(path, tmp.path / "p.csv");
  CHECK(load_path_csv(tmp.path / "p.csv", 9, 7) == path);
}

TEST_CASE("manifest round-trips a generated dataset bit-exactly") {
  TempDir tmp;
  SynthSpec spec;
  spec.num_pairs = 3;
  spec.seed = 21;
  spec.base_length_min = 10;
  spec.base_length_max = 20;
  spec.informative_dims = 2;
  spec.noise_dims = 1;
  spec.noise_sigma = 0.1;
  const auto data = generate_dataset(spec);
  REQUIRE(data.size() == 3);
  save_manifest(data, tmp.path / "manifest.json");
  const auto loaded = load_manifest(tmp.path / "manifest.json");
  REQUIRE(loaded.size() == data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    CHECK(loaded[i].id == data[i].id);
    CHECK(loaded[i].a == data[i].a);
    CHECK(loaded[i].b == data[i].b);
    REQUIRE(loaded[i].truth.has_value());
    CHECK(*loaded[i].truth == *data[i].truth);
  }
}

TEST_CASE("manifest error paths") {
  TempDir tmp;
  {
    std::ofstream out(tmp.path / "empty.json");
    out << "{\"pairs\": []}\n";
  }
  CHECK(load_manifest(tmp.path / "empty.json").empty());

  {
    std::ofstream out(tmp.path / "missing.json");
    out << R"({"pairs": [{"id": "x", "file_A": "nope_A.csv", "file_B": "nope_B.csv"}]})";
  }
  try {
    load_manifest(tmp.path / "missing.json");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("nope_A.csv") != std::string::npos);
  }

  {
    std::ofstream out(tmp.path / "broken.json");
    out << "{\"pairs\": [\n  {]}";
  }
  CHECK_THROWS_AS(load_manifest(tmp.path / "broken.json"), ParseError);

  // A and B with different feature counts
  {
    Eigen::MatrixXd a(2, 2), b(2, 3);
    a.setZero();
    b.setZero();
    save_matrix_csv(a, tmp.path / "inc_A.csv");
    save_matrix_csv(b, tmp.path / "inc_B.csv");
    std::ofstream out(tmp.path / "inconsistent.json");
    out << R"({"pairs": [{"id": "x", "file_A": "inc_A.csv", "file_B": "inc_B.csv"}]})";
  }
  CHECK_THROWS_AS(load_manifest(tmp.path / "inconsistent.json"), InconsistentDimsError);
}

TEST_CASE("csv parse errors carry line and column") {
  TempDir tmp;
  {
    std::ofstream out(tmp.path / "bad.csv");
    out << "1.0,2.0\n3.0,oops\n";
  }
  try {
    load_matrix_csv(tmp.path / "bad.csv");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
    CHECK(e.column == 2);
  }
  {
    std::ofstream out(tmp.path / "ragged.csv");
    out << "1.0,2.0\n3.0\n";
  }
  CHECK_THROWS_AS(load_matrix_csv(tmp.path / "ragged.csv"), ParseError);
  CHECK_THROWS_AS(load_matrix_csv(tmp.path / "does_not_exist.csv"), IoError);
}
