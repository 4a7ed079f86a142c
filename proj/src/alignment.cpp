#include "warpmetric/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace warpmetric {

AlignmentPath AlignmentPath::validated(std::vector<Step> steps, int rows, int cols) {
  if (rows < 1 || cols < 1) {
    throw DimensionMismatchError("path grid must be at least 1x1, got " + std::to_string(rows) +
                                 "x" + std::to_string(cols));
  }
  if (steps.empty()) throw EmptyPathError();
  if (steps.front() != Step{1, 1}) {
    throw BadEndpointError(1, "path must start at (1,1)");
  }
  if (steps.back() != Step{rows, cols}) {
    throw BadEndpointError(steps.size(), "path must end at (" + std::to_string(rows) + "," +
                                             std::to_string(cols) + ")");
  }
  for (std::size_t k = 1; k < steps.size(); ++k) {
    const int di = steps[k].first - steps[k - 1].first;
    const int dj = steps[k].second - steps[k - 1].second;
    const bool ok = (di == 1 && dj == 0) || (di == 0 && dj == 1) || (di == 1 && dj == 1);
    if (!ok) {
      throw BadMoveError(k + 1, "move (" + std::to_string(di) + "," + std::to_string(dj) +
                                    ") is not one of (1,0),(0,1),(1,1)");
    }
    if (steps[k].first > rows || steps[k].second > cols) {
      throw BadMoveError(k + 1, "step leaves the grid");
    }
  }
  return AlignmentPath(std::move(steps), rows, cols);
}

Eigen::MatrixXd AlignmentPath::to_matrix() const {
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(rows_, cols_);
  for (const auto& [i, j] : steps_) y(i - 1, j - 1) = 1.0;
  return y;
}

AlignmentPath AlignmentPath::from_matrix(const Eigen::MatrixXd& y) {
  std::vector<Step> steps;
  for (int j = 0; j < y.cols(); ++j) {
    for (int i = 0; i < y.rows(); ++i) {
      const double v = y(i, j);
      if (v != 0.0 && v != 1.0) {
        throw OutOfRangeError("path matrix entries must be 0 or 1");
      }
      if (v == 1.0) steps.emplace_back(i + 1, j + 1);
    }
  }
  // Column-major collection above is not path order; sort lexicographically
  // by (i+j, i) which linearizes any valid path.
  std::sort(steps.begin(), steps.end(), [](const Step& a, const Step& b) {
    return std::pair(a.first + a.second, a.first) < std::pair(b.first + b.second, b.first);
  });
  return validated(std::move(steps), static_cast<int>(y.rows()), static_cast<int>(y.cols()));
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool in_band(int i, int j, int half_width) {
  return std::abs(i - j) <= half_width;
}

}  // namespace

DecodeResult dtw_decode(const Eigen::MatrixXd& affinity, std::optional<int> band) {
  const int rows = static_cast<int>(affinity.rows());
  const int cols = static_cast<int>(affinity.cols());
  if (rows < 1 || cols < 1) {
    throw DimensionMismatchError("affinity matrix must be at least 1x1");
  }
  if (!affinity.allFinite()) {
    throw NonFiniteError("affinity matrix contains NaN or infinite entries");
  }
  if (band && *band < 0) {
    throw OutOfRangeError("band width must be nonnegative");
  }
  // A feasible monotone path always stays within |i-j| <= |rows-cols|.
  const int half_width =
      band ? std::max(*band, std::abs(rows - cols)) : std::max(rows, cols);

  // cum(i,j): best cumulated affinity of a path from (1,1) to (i,j); row/col 0
  // of the padded table stays at -inf except cum(0,0) = 0, which anchors (1,1).
  Eigen::MatrixXd cum = Eigen::MatrixXd::Constant(rows + 1, cols + 1, kNegInf);
  cum(0, 0) = 0.0;
  for (int i = 1; i <= rows; ++i) {
    for (int j = 1; j <= cols; ++j) {
      if (!in_band(i, j, half_width)) continue;
      const double best = std::max({cum(i - 1, j), cum(i, j - 1), cum(i - 1, j - 1)});
      if (best == kNegInf) continue;
      cum(i, j) = affinity(i - 1, j - 1) + best;
    }
  }

  std::vector<AlignmentPath::Step> steps;
  int i = rows;
  int j = cols;
  steps.emplace_back(i, j);
  while (i > 1 || j > 1) {
    if (i == 1) {
      --j;
    } else if (j == 1) {
      --i;
    } else {
      const double diag = cum(i - 1, j - 1);
      const double vert = cum(i - 1, j);
      const double horz = cum(i, j - 1);
      const double best = std::max({diag, vert, horz});
      if (diag == best) {
        --i;
        --j;
      } else if (vert == best) {
        --i;
      } else {
        --j;
      }
    }
    steps.emplace_back(i, j);
  }
  std::reverse(steps.begin(), steps.end());
  return DecodeResult{AlignmentPath::validated(std::move(steps), rows, cols), cum(rows, cols)};
}

BigInt delannoy_count(int rows, int cols) {
  if (rows < 1 || cols < 1) {
    throw DimensionMismatchError("grid must be at least 1x1");
  }
  // Paths on a rows x cols grid are Delannoy lattice paths to (rows-1, cols-1).
  std::vector<BigInt> prev(cols, 1), cur(cols, 1);
  for (int i = 1; i < rows; ++i) {
    cur[0] = 1;
    for (int j = 1; j < cols; ++j) cur[j] = prev[j] + cur[j - 1] + prev[j - 1];
    std::swap(prev, cur);
  }
  return prev[cols - 1];
}

std::vector<AlignmentPath> enumerate_paths(int rows, int cols) {
  const BigInt count = delannoy_count(rows, cols);
  if (count > 1000000) {
    throw TooLargeError("path count " + count.str() + " exceeds the enumeration guard of 10^6");
  }
  std::vector<AlignmentPath> out;
  out.reserve(static_cast<std::size_t>(count));
  std::vector<AlignmentPath::Step> stack{{1, 1}};
  // Depth-first with move order (1,1), (1,0), (0,1).
  auto rec = [&](auto&& self) -> void {
    const auto [i, j] = stack.back();
    if (i == rows && j == cols) {
      out.push_back(AlignmentPath::validated(stack, rows, cols));
      return;
    }
    constexpr int kMoves[3][2] = {{1, 1}, {1, 0}, {0, 1}};
    for (const auto& m : kMoves) {
      const int ni = i + m[0];
      const int nj = j + m[1];
      if (ni <= rows && nj <= cols) {
        stack.emplace_back(ni, nj);
        self(self);
        stack.pop_back();
      }
    }
  };
  rec(rec);
  return out;
}

}  // namespace warpmetric
