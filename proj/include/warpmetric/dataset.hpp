#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "warpmetric/alignment.hpp"

namespace warpmetric {

/// One training/evaluation example: two feature sequences (frames x features)
/// and, when known, the ground-truth alignment between them.
struct SequencePair {
  std::string id;
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  std::optional<AlignmentPath> truth;

  int dim() const { return static_cast<int>(a.cols()); }
};

enum class NormalizeMode {
  rms_about_median,  // divide by the RMS deviation about the median
  mad,               // divide by the median absolute deviation
};

/// Per-column robust standardization: subtract the median, divide by the
/// chosen deviation scale. Columns with scale below 1e-12 are centered only.
Eigen::MatrixXd normalize(const Eigen::MatrixXd& series,
                          NormalizeMode mode = NormalizeMode::rms_about_median);

struct WarpKnot {
  double position;    // base-time position in [0, 1]
  double multiplier;  // local tempo multiplier, > 0
};

/// Recipe for one synthetic warped pair with known ground truth.
struct WarpSpec {
  int base_length = 100;
  std::vector<WarpKnot> warp_knots = {{0.0, 1.0}, {1.0, 1.0}};
  double noise_sigma = 0.0;
  int informative_dims = 1;
  int noise_dims = 0;
  std::uint64_t seed = 0;
  /// Scale of the pure-noise padding columns (the informative columns have
  /// unit-order amplitude).
  double noise_feature_sigma = 1.0;
};

/// Draws a smooth multichannel base series, warps it along the tempo curve
/// with nearest-frame resampling, and returns A = base + noise, B = warped
/// base + noise, both padded with pure-noise columns, plus the exact
/// alignment induced by the integer warp map.
SequencePair generate_pair(const WarpSpec& spec);

/// Dataset-level recipe consumed by the synth command.
struct SynthSpec {
  int num_pairs = 10;
  std::uint64_t seed = 0;
  int base_length_min = 100;
  int base_length_max = 200;
  int informative_dims = 2;
  int noise_dims = 0;
  double noise_sigma = 0.0;
  double noise_feature_sigma = 1.0;
  /// Fixed tempo curve applied to every pair; empty means a random curve per
  /// pair, drawn from the knot/multiplier settings below.
  std::vector<WarpKnot> fixed_curve;
  int random_knots = 3;
  double multiplier_min = 1.0;
  double multiplier_max = 2.0;

  static SynthSpec load(const std::filesystem::path& file);
};

std::vector<SequencePair> generate_dataset(const SynthSpec& spec);

/// Matrix files: CSV, no header, one frame per row, 17 significant digits.
Eigen::MatrixXd load_matrix_csv(const std::filesystem::path& file);
void save_matrix_csv(const Eigen::MatrixXd& m, const std::filesystem::path& file);

/// Path files: CSV of 1-based "i,j" rows.
AlignmentPath load_path_csv(const std::filesystem::path& file, int rows, int cols);
void save_path_csv(const AlignmentPath& path, const std::filesystem::path& file);

/// Manifest: JSON list of {id, file_A, file_B, file_truth}, file names
/// resolved relative to the manifest location. save_manifest writes the
/// matrix and path files next to the manifest.
std::vector<SequencePair> load_manifest(const std::filesystem::path& manifest_file);
void save_manifest(const std::vector<SequencePair>& data,
                   const std::filesystem::path& manifest_file);

}  // namespace warpmetric
