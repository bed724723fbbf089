#pragma once

#include <string>
#include <vector>

#include "ldnn/csv.hpp"

namespace ldnn {

// Gap floor: below this, relative gaps are reported against the floor so
// near-zero predictions don't blow up the ratio.
inline constexpr double kRelativeGapFloor = 1e-6;

struct ComparisonRow {
  int t = 0;
  std::string metric;
  double predicted = 0.0;
  double median = 0.0;
  double p25 = 0.0;
  double p75 = 0.0;
  double abs_gap = 0.0;
  double rel_gap = 0.0;
  bool pass = false;
};

struct ComparisonReport {
  std::string config_hash;
  double rel_tol = 0.0;
  double abs_tol = 0.0;
  std::vector<ComparisonRow> rows;
  bool all_pass = true;
};

// Joins a predicted-trajectory table and a simulation-aggregate table on
// (t, metric); rows pass when |median - predicted| <= max(rel_tol *
// |predicted|, abs_tol). Throws when the config hashes differ: trajectories
// from different experiments must not be compared silently.
ComparisonReport compare_tables(const CsvTable& predicted, const CsvTable& aggregate,
                                double rel_tol, double abs_tol);

std::string report_to_json(const ComparisonReport& report);

}  // namespace ldnn
