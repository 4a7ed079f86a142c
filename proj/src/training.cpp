#include "warpmetric/training.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "warpmetric/errors.hpp"

namespace warpmetric {

namespace {

std::string format_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string TrainReport::to_csv() const {
  std::ostringstream out;
  for (const auto& [key, value] : provenance) out << "# " << key << '=' << value << '\n';
  out << "iter,objective,train_delta_abs,train_hamming,seconds";
  if (has_dual_columns) out << ",dual_objective,fw_gap";
  out << '\n';
  for (const auto& r : checkpoints) {
    out << r.iter << ',' << format_g(r.objective) << ',' << format_g(r.train_delta_abs) << ','
        << format_g(r.train_hamming) << ',' << format_g(r.seconds);
    if (has_dual_columns) out << ',' << format_g(r.dual_objective) << ',' << format_g(r.fw_gap);
    out << '\n';
  }
  return out.str();
}

void TrainReport::save_csv(const std::filesystem::path& file) const {
  std::ofstream out(file);
  if (!out) throw IoError("cannot open " + file.string() + " for writing");
  out << to_csv();
  if (!out) throw IoError("write to " + file.string() + " failed");
}

}  // namespace warpmetric
