#include "warpmetric/metric.hpp"

#include <Eigen/Eigenvalues>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace warpmetric {

namespace {

constexpr double kSymTol = 1e-10;
constexpr double kEigTol = 1e-8;

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void check_same_dim(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) {
    throw DimensionMismatchError("sequences have feature dimensions " + std::to_string(a.cols()) +
                                 " and " + std::to_string(b.cols()));
  }
}

}  // namespace

std::string to_string(Structure s) {
  switch (s) {
    case Structure::psd: return "psd";
    case Structure::diagonal_nonneg: return "diagonal_nonneg";
    case Structure::unconstrained: return "unconstrained";
  }
  return "unknown";
}

Structure structure_from_string(const std::string& name) {
  if (name == "psd") return Structure::psd;
  if (name == "diagonal_nonneg" || name == "diag") return Structure::diagonal_nonneg;
  if (name == "unconstrained" || name == "free") return Structure::unconstrained;
  throw OutOfRangeError("unknown structure '" + name + "' (expected psd, diag or free)");
}

MetricMatrix MetricMatrix::make(Eigen::MatrixXd values, Structure structure) {
  if (values.rows() != values.cols() || values.rows() < 1) {
    throw DimensionMismatchError("metric matrix must be square and nonempty");
  }
  if (!values.allFinite()) throw NonFiniteError("metric matrix has non-finite entries");
  const int p = static_cast<int>(values.rows());
  switch (structure) {
    case Structure::psd: {
      if ((values - values.transpose()).cwiseAbs().maxCoeff() > kSymTol) {
        throw OutOfRangeError("psd metric must be symmetric within 1e-10");
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(values, Eigen::EigenvaluesOnly);
      if (es.info() != Eigen::Success) {
        throw EigenFailureError("eigendecomposition failed while validating metric");
      }
      if (es.eigenvalues().minCoeff() < -kEigTol) {
        throw OutOfRangeError("psd metric has eigenvalue below -1e-8");
      }
      break;
    }
    case Structure::diagonal_nonneg: {
      for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) {
          if (i != j && values(i, j) != 0.0) {
            throw OutOfRangeError("diagonal metric has nonzero off-diagonal entry");
          }
        }
        if (values(i, i) < 0.0) {
          throw OutOfRangeError("diagonal metric has negative diagonal entry");
        }
      }
      break;
    }
    case Structure::unconstrained: break;
  }
  return MetricMatrix(std::move(values), structure, Trusted{});
}

MetricMatrix MetricMatrix::identity_baseline(int dim, Structure structure) {
  if (dim < 1) throw DimensionMismatchError("metric dimension must be positive");
  Eigen::MatrixXd w = Eigen::MatrixXd::Identity(dim, dim) / static_cast<double>(dim);
  return project(w, structure);
}

MetricMatrix project(const Eigen::MatrixXd& m, Structure structure) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw DimensionMismatchError("projection input must be square and nonempty");
  }
  if (!m.allFinite()) throw NonFiniteError("projection input has non-finite entries");
  switch (structure) {
    case Structure::psd: {
      const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
      if (es.info() != Eigen::Success) {
        throw EigenFailureError("eigendecomposition did not converge in psd projection");
      }
      const Eigen::VectorXd clamped = es.eigenvalues().cwiseMax(0.0);
      Eigen::MatrixXd w = es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().transpose();
      w = 0.5 * (w + w.transpose());  // kill rounding asymmetry
      return MetricMatrix(std::move(w), structure, MetricMatrix::Trusted{});
    }
    case Structure::diagonal_nonneg: {
      Eigen::MatrixXd w = m.diagonal().cwiseMax(0.0).asDiagonal();
      return MetricMatrix(std::move(w), structure, MetricMatrix::Trusted{});
    }
    case Structure::unconstrained:
      return MetricMatrix(m, structure, MetricMatrix::Trusted{});
  }
  throw OutOfRangeError("unknown structure");
}

void MetricMatrix::save(const std::filesystem::path& file) const {
  std::ofstream out(file);
  if (!out) throw IoError("cannot open " + file.string() + " for writing");
  const int p = dim();
  out << p << ' ' << to_string(structure_) << '\n';
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      if (j) out << ' ';
      out << format_full(values_(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("write to " + file.string() + " failed");
}

MetricMatrix MetricMatrix::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  int p = 0;
  std::string structure_name;
  if (!(in >> p >> structure_name)) {
    throw ParseError(file.string(), 1, 1, "expected header line 'p structure'");
  }
  if (p < 1) throw ParseError(file.string(), 1, 1, "dimension must be positive");
  const Structure structure = structure_from_string(structure_name);
  Eigen::MatrixXd values(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      if (!(in >> values(i, j))) {
        throw ParseError(file.string(), i + 2, j + 1, "expected a matrix entry");
      }
    }
  }
  return make(std::move(values), structure);
}

Eigen::MatrixXd affinity(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                         const Eigen::MatrixXd& w) {
  check_same_dim(a, b);
  if (w.rows() != w.cols() || w.rows() != a.cols()) {
    throw DimensionMismatchError("metric is " + std::to_string(w.rows()) + "x" +
                                 std::to_string(w.cols()) + " but features have dimension " +
                                 std::to_string(a.cols()));
  }
  // The quadratic form only sees the symmetric part of W.
  const Eigen::MatrixXd sym = 0.5 * (w + w.transpose());
  const Eigen::MatrixXd as = a * sym;
  const Eigen::MatrixXd bs = b * sym;
  const Eigen::VectorXd qa = (as.array() * a.array()).rowwise().sum();
  const Eigen::VectorXd qb = (bs.array() * b.array()).rowwise().sum();
  Eigen::MatrixXd c = 2.0 * (as * b.transpose());
  c.colwise() -= qa;
  c.rowwise() -= qb.transpose();
  return c;
}

Eigen::MatrixXd affinity(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                         const MetricMatrix& w) {
  return affinity(a, b, w.values());
}

namespace {

// Shared tail of the feature-map evaluations: given row/column weight sums and
// the cross moment M = A^T Z B, assemble -[A^T diag(r) A + B^T diag(c) B - M - M^T].
Eigen::MatrixXd assemble_feature_map(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                     const Eigen::VectorXd& row_sums,
                                     const Eigen::VectorXd& col_sums,
                                     const Eigen::MatrixXd& cross) {
  Eigen::MatrixXd m = a.transpose() * row_sums.asDiagonal() * a;
  m.noalias() += b.transpose() * col_sums.asDiagonal() * b;
  m -= cross;
  m -= cross.transpose();
  return -m;
}

}  // namespace

Eigen::MatrixXd feature_map(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                            const Eigen::MatrixXd& coupling) {
  check_same_dim(a, b);
  if (coupling.rows() != a.rows() || coupling.cols() != b.rows()) {
    throw DimensionMismatchError("coupling is " + std::to_string(coupling.rows()) + "x" +
                                 std::to_string(coupling.cols()) + " but sequences have " +
                                 std::to_string(a.rows()) + " and " + std::to_string(b.rows()) +
                                 " frames");
  }
  const Eigen::VectorXd row_sums = coupling.rowwise().sum();
  const Eigen::VectorXd col_sums = coupling.colwise().sum();
  const Eigen::MatrixXd cross = a.transpose() * (coupling * b);
  return assemble_feature_map(a, b, row_sums, col_sums, cross);
}

Eigen::MatrixXd feature_map(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                            const std::vector<CouplingEntry>& coupling, int rows, int cols) {
  check_same_dim(a, b);
  if (rows != a.rows() || cols != b.rows()) {
    throw DimensionMismatchError("coupling shape does not match the sequences");
  }
  Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(rows);
  Eigen::VectorXd col_sums = Eigen::VectorXd::Zero(cols);
  Eigen::MatrixXd zb = Eigen::MatrixXd::Zero(rows, a.cols());
  for (const auto& e : coupling) {
    if (e.i < 0 || e.i >= rows || e.j < 0 || e.j >= cols) {
      throw OutOfRangeError("coupling entry outside the grid");
    }
    row_sums(e.i) += e.w;
    col_sums(e.j) += e.w;
    zb.row(e.i) += e.w * b.row(e.j);
  }
  const Eigen::MatrixXd cross = a.transpose() * zb;
  return assemble_feature_map(a, b, row_sums, col_sums, cross);
}

Eigen::MatrixXd feature_map(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                            const AlignmentPath& path) {
  std::vector<CouplingEntry> entries;
  entries.reserve(path.size());
  for (const auto& [i, j] : path.steps()) entries.push_back({i - 1, j - 1, 1.0});
  return feature_map(a, b, entries, path.rows(), path.cols());
}

Eigen::MatrixXd psi(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                    const AlignmentPath& truth, const Eigen::MatrixXd& z) {
  return feature_map(a, b, truth) - feature_map(a, b, z);
}

Eigen::MatrixXd psi(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                    const AlignmentPath& truth, const AlignmentPath& z) {
  return feature_map(a, b, truth) - feature_map(a, b, z);
}

}  // namespace warpmetric
