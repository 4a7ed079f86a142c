#include <Eigen/Eigenvalues>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "warpmetric/losses.hpp"

using namespace warpmetric;

namespace {

AlignmentPath make_path(std::vector<AlignmentPath::Step> steps, int rows, int cols) {
  return AlignmentPath::validated(std::move(steps), rows, cols);
}

Eigen::MatrixXd dense_l(int t) {
  return Eigen::MatrixXd::Ones(t, t).triangularView<Eigen::Lower>();
}

// Independent reference: the concave extension evaluated with dense L
// products straight from its trace expansion.
double sal_concave_dense(const AlignmentPath& truth, const Eigen::MatrixXd& z) {
  const Eigen::MatrixXd y = truth.to_matrix();
  const Eigen::MatrixXd l = dense_l(truth.rows());
  const Eigen::MatrixXd l1 = dense_l(truth.cols());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> er(l.transpose() * l);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ec(l1 * l1.transpose());
  const double d = er.eigenvalues().maxCoeff();
  const double d1 = ec.eigenvalues().maxCoeff();
  const Eigen::MatrixXd diff = z - y;
  return 0.5 * ((l * diff).squaredNorm() + (diff * l1).squaredNorm() +
                (d + d1) * (z.sum() - z.squaredNorm()));
}

}  // namespace

TEST_CASE("running-sum helpers realize the dense triangular products") {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd m = oracles::random_matrix(rng, 5, 7);
  const Eigen::MatrixXd l5 = dense_l(5);
  const Eigen::MatrixXd l7 = dense_l(7);
  CHECK((prefix_down(m) - l5 * m).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((suffix_down(m) - l5.transpose() * m).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((suffix_right(m) - m * l7).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((prefix_right(m) - m * l7.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  // transposition swaps the row-wise and column-wise versions
  CHECK((prefix_down(m) - prefix_right(m.transpose()).transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((suffix_right(m) - suffix_down(m.transpose()).transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("hamming loss examples and algebraic identity") {
  const auto diag = make_path({{1, 1}, {2, 2}}, 2, 2);
  const auto elbow = make_path({{1, 1}, {1, 2}, {2, 2}}, 2, 2);
  CHECK(hamming_loss(diag, diag) == 0.0);
  CHECK(hamming_loss(diag, elbow) == 1.0);
  CHECK(hamming_loss(elbow, diag) == 1.0);

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const auto y1 = oracles::random_path(rng, 5, 5);
    const auto y2 = oracles::random_path(rng, 5, 5);
    // linear expansion == Frobenius form, exactly
    CHECK(hamming_loss(y1, y2) == hamming_loss(y1.to_matrix(), y2.to_matrix()));
    CHECK(hamming_loss(y1, y2) == hamming_loss(y2, y1));
    if (!(y1 == y2)) CHECK(hamming_loss(y1, y2) > 0.0);
  }

  const auto other = make_path({{1, 1}, {2, 2}, {3, 3}}, 3, 3);
  CHECK_THROWS_AS(hamming_loss(diag, other), DimensionMismatchError);
}

TEST_CASE("delta losses: hand example, symmetry, corner extremes") {
  const auto y1 = make_path({{1, 1}, {2, 2}, {3, 3}}, 3, 3);
  const auto y2 = make_path({{1, 1}, {1, 2}, {2, 3}, {3, 3}}, 3, 3);
  const auto d = delta_losses(y1, y2);
  CHECK(d.mean == doctest::Approx(1.0 / 3.0));
  CHECK(d.max == doctest::Approx(1.0));
  CHECK(delta_abs(y2, y1) == delta_abs(y1, y2));
  CHECK(delta_max(y2, y1) == delta_max(y1, y2));
  CHECK(delta_abs(y1, y1) == 0.0);
  CHECK(delta_max(y1, y1) == 0.0);

  // opposite corner-hugging paths on t x t: delta_max = t - 1
  for (int t = 3; t <= 7; ++t) {
    std::vector<AlignmentPath::Step> upper, lower;
    for (int j = 1; j <= t; ++j) upper.emplace_back(1, j);
    for (int i = 2; i <= t; ++i) upper.emplace_back(i, t);
    for (int i = 1; i <= t; ++i) lower.emplace_back(i, 1);
    for (int j = 2; j <= t; ++j) lower.emplace_back(t, j);
    const auto hug_top = make_path(std::move(upper), t, t);
    const auto hug_bottom = make_path(std::move(lower), t, t);
    CHECK(delta_max(hug_top, hug_bottom) == doctest::Approx(t - 1.0));
  }
}

TEST_CASE("area loss equals the per-column index area for no-vertical-move paths") {
  const auto y = make_path({{1, 1}, {2, 2}}, 2, 2);
  CHECK(area_loss_reference(y, y) == 0.0);

  // 2x2 elbows, checked against the direct dense-matrix evaluation
  const auto via12 = make_path({{1, 1}, {1, 2}, {2, 2}}, 2, 2);
  const auto via21 = make_path({{1, 1}, {2, 1}, {2, 2}}, 2, 2);
  const Eigen::MatrixXd diff = via12.to_matrix() - via21.to_matrix();
  CHECK(area_loss_reference(via12, via21) ==
        doctest::Approx((dense_l(2) * diff).squaredNorm()));

  // exhaustive over every pair of no-vertical-move paths on grids <= 6x6
  for (int rows = 1; rows <= 6; ++rows) {
    for (int cols = rows; cols <= 6; ++cols) {
      std::vector<AlignmentPath> flat;
      for (const auto& p : enumerate_paths(rows, cols)) {
        if (static_cast<int>(p.size()) == cols) flat.push_back(p);  // one cell per column
      }
      for (const auto& pa : flat) {
        for (const auto& pb : flat) {
          double area = 0.0;
          for (int t = 0; t < cols; ++t) {
            area += std::abs(pa.steps()[t].first - pb.steps()[t].first);
          }
          CHECK(area_loss_reference(pa, pb) == doctest::Approx(area));
        }
      }
    }
  }
}

TEST_CASE("symmetrized area loss: definition matches the dense trace expansion") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 25; ++trial) {
    const int rows = 2 + trial % 4;
    const int cols = 2 + (trial * 3) % 4;
    const auto y1 = oracles::random_path(rng, rows, cols);
    const auto y2 = oracles::random_path(rng, rows, cols);
    const Eigen::MatrixXd m = y1.to_matrix() - y2.to_matrix();
    const double expansion =
        0.5 * ((dense_l(rows) * m).squaredNorm() + (m * dense_l(cols)).squaredNorm());
    CHECK(sym_area_loss(y1, y2) == doctest::Approx(expansion).epsilon(1e-12));
    CHECK(sym_area_loss(y1, y2) == sym_area_loss(y2, y1));
    CHECK(sym_area_loss(y1, y1) == 0.0);
    if (!(y1 == y2)) CHECK(sym_area_loss(y1, y2) > 0.0);
  }
}

TEST_CASE("hamming and area losses dissociate on the 10x10 triple") {
  // Y1: the plain diagonal. Y2: the diagonal with seven staircase inserts, so
  // it brushes Y1 everywhere. Y3: a single wide bulge with the same Hamming
  // loss but a large area.
  const int n = 10;
  std::vector<AlignmentPath::Step> s1, s2, s3;
  for (int i = 1; i <= n; ++i) s1.emplace_back(i, i);
  s2.emplace_back(1, 1);
  for (int k = 1; k < n; ++k) {
    if (k <= 7) s2.emplace_back(k, k + 1);
    s2.emplace_back(k + 1, k + 1);
  }
  for (int i = 1; i <= 4; ++i) s3.emplace_back(i, i);
  s3.insert(s3.end(), {{4, 5}, {4, 6}, {4, 7}, {5, 7}, {6, 7}, {7, 7}});
  for (int i = 8; i <= n; ++i) s3.emplace_back(i, i);
  const auto y1 = make_path(std::move(s1), n, n);
  const auto y2 = make_path(std::move(s2), n, n);
  const auto y3 = make_path(std::move(s3), n, n);

  CHECK(hamming_loss(y2, y1) == 7.0);
  CHECK(hamming_loss(y3, y1) == 7.0);
  CHECK(delta_abs(y2, y1) < delta_abs(y3, y1) / 2.0);
  CHECK(delta_abs(y3, y1) == doctest::Approx(0.3));
}

TEST_CASE("lambda_max of the triangular gram matrix") {
  CHECK(lambda_max_LtL(1) == doctest::Approx(1.0));
  CHECK(lambda_max_LtL(2) == doctest::Approx((3.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-10));

  const Eigen::MatrixXd l10 = dense_l(10);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l10.transpose() * l10);
  CHECK(lambda_max_LtL(10) == doctest::Approx(es.eigenvalues().maxCoeff()).epsilon(1e-9));

  for (int t = 1; t <= 100; ++t) {
    const double lam = lambda_max_LtL(t);
    CHECK(lam >= static_cast<double>(t) * (1.0 - 1e-12));
    CHECK(lam <= static_cast<double>(t) * t);
  }

  CHECK_THROWS_AS(lambda_max_LtL(50, 1e-12, 1), NoConvergenceError);
  CHECK_THROWS_AS(lambda_max_LtL(0), DimensionMismatchError);
}

TEST_CASE("sal_concave coincides with sym_area_loss on every integral coupling (<= 4x4)") {
  for (int rows = 1; rows <= 4; ++rows) {
    for (int cols = 1; cols <= 4; ++cols) {
      const auto paths = enumerate_paths(rows, cols);
      const TriangularOperator row_op(rows), col_op(cols);
      for (const auto& truth : paths) {
        for (const auto& z : paths) {
          CHECK(sal_concave(truth, z.to_matrix(), row_op, col_op) ==
                doctest::Approx(sym_area_loss(truth, z)).epsilon(1e-10));
        }
      }
    }
  }
}

TEST_CASE("sal_concave is concave: midpoints and segment second differences") {
  std::mt19937_64 rng(37);
  const int rows = 4, cols = 5;
  const TriangularOperator row_op(rows), col_op(cols);
  const auto truth = oracles::random_path(rng, rows, cols);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto random_z = [&] {
    Eigen::MatrixXd z(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) z(i, j) = unif(rng);
    return z;
  };

  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd z1 = random_z();
    const Eigen::MatrixXd z2 = random_z();
    const double mid = sal_concave(truth, 0.5 * (z1 + z2), row_op, col_op);
    const double ends = 0.5 * (sal_concave(truth, z1, row_op, col_op) +
                               sal_concave(truth, z2, row_op, col_op));
    CHECK(mid >= ends - 1e-10);

    // second difference along the segment
    auto at = [&](double t) {
      return sal_concave(truth, (1.0 - t) * z1 + t * z2, row_op, col_op);
    };
    const double second = at(0.4) - 2.0 * at(0.5) + at(0.6);
    CHECK(second <= 1e-10);
  }

  // mixing two vertices of the polytope can only increase the loss
  const auto ya = oracles::random_path(rng, rows, cols);
  const auto yb = oracles::random_path(rng, rows, cols);
  const Eigen::MatrixXd mix = 0.5 * ya.to_matrix() + 0.5 * yb.to_matrix();
  CHECK(sal_concave(truth, mix, row_op, col_op) >=
        0.5 * (sym_area_loss(truth, ya) + sym_area_loss(truth, yb)) - 1e-10);
}

TEST_CASE("sal_concave rejects out-of-range couplings and shape mismatches") {
  const auto truth = make_path({{1, 1}, {2, 2}}, 2, 2);
  Eigen::MatrixXd z = Eigen::MatrixXd::Constant(2, 2, 0.5);
  CHECK_NOTHROW(sal_concave(truth, z));
  z(0, 1) = 1.5;
  CHECK_THROWS_AS(sal_concave(truth, z), OutOfRangeError);
  CHECK_THROWS_AS(sal_concave(truth, Eigen::MatrixXd::Zero(3, 2)), DimensionMismatchError);
}

TEST_CASE("sal_concave_gradient matches finite differences and the dense reference") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> interior(0.05, 0.95);
  for (int probe = 0; probe < 10; ++probe) {
    const int rows = 4, cols = 4;
    const auto truth = oracles::random_path(rng, rows, cols);
    Eigen::MatrixXd z(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) z(i, j) = interior(rng);

    const Eigen::MatrixXd grad = sal_concave_gradient(truth, z);
    const Eigen::MatrixXd fd = oracles::finite_difference(
        [&](const Eigen::MatrixXd& probe_z) { return sal_concave(truth, probe_z); }, z);
    CHECK((grad - fd).cwiseAbs().maxCoeff() <= 1e-5 * std::max(1.0, fd.norm()));

    const Eigen::MatrixXd fd_dense = oracles::finite_difference(
        [&](const Eigen::MatrixXd& probe_z) { return sal_concave_dense(truth, probe_z); }, z);
    CHECK((grad - fd_dense).cwiseAbs().maxCoeff() <= 1e-5 * std::max(1.0, fd_dense.norm()));
  }
}

TEST_CASE("sal_concave is exactly quadratic along any direction") {
  std::mt19937_64 rng(43);
  const int rows = 4, cols = 3;
  const TriangularOperator row_op(rows), col_op(cols);
  const auto truth = oracles::random_path(rng, rows, cols);
  const auto y1 = oracles::random_path(rng, rows, cols);
  const auto y2 = oracles::random_path(rng, rows, cols);
  const Eigen::MatrixXd z = Eigen::MatrixXd::Constant(rows, cols, 0.5);
  const Eigen::MatrixXd dir = 0.25 * (y1.to_matrix() - y2.to_matrix());

  const double f0 = sal_concave(truth, z, row_op, col_op);
  const double slope = sal_concave_gradient(truth, z, row_op, col_op).cwiseProduct(dir).sum();
  const double curve = sal_concave_curvature(dir, row_op, col_op);
  CHECK(curve <= 1e-12);
  for (double c : {0.3, 0.7, 1.0}) {
    const double direct = sal_concave(truth, z + c * dir, row_op, col_op);
    CHECK(direct == doctest::Approx(f0 + c * slope + c * c * curve).epsilon(1e-9));
  }
}
