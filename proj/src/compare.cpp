#include "ldnn/compare.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "ldnn/version.hpp"

namespace ldnn {

ComparisonReport compare_tables(const CsvTable& predicted, const CsvTable& aggregate,
                                double rel_tol, double abs_tol) {
  if (!(rel_tol >= 0.0) || !(abs_tol >= 0.0)) {
    throw std::invalid_argument("compare_tables: tolerances must be nonnegative");
  }
  const std::string pred_hash = predicted.meta_value("config_hash");
  const std::string agg_hash = aggregate.meta_value("config_hash");
  if (pred_hash.empty() || agg_hash.empty()) {
    throw std::runtime_error("compare_tables: missing config_hash metadata");
  }
  if (pred_hash != agg_hash) {
    throw std::runtime_error("compare_tables: config_hash mismatch (" + pred_hash + " vs " +
                             agg_hash + "); these runs are not the same experiment");
  }

  const int pt = predicted.column_index("t");
  const int pm = predicted.column_index("metric");
  const int pv = predicted.column_index("predicted_value");
  const int at = aggregate.column_index("t");
  const int am = aggregate.column_index("metric");
  const int amed = aggregate.column_index("median");
  const int a25 = aggregate.column_index("p25");
  const int a75 = aggregate.column_index("p75");

  ComparisonReport report;
  report.config_hash = pred_hash;
  report.rel_tol = rel_tol;
  report.abs_tol = abs_tol;

  for (const auto& prow : predicted.rows) {
    for (const auto& arow : aggregate.rows) {
      if (prow[pt] != arow[at] || prow[pm] != arow[am]) continue;
      ComparisonRow row;
      row.t = std::stoi(prow[pt]);
      row.metric = prow[pm];
      row.predicted = std::stod(prow[pv]);
      row.median = std::stod(arow[amed]);
      row.p25 = std::stod(arow[a25]);
      row.p75 = std::stod(arow[a75]);
      row.abs_gap = std::fabs(row.median - row.predicted);
      row.rel_gap = row.abs_gap / std::max(std::fabs(row.predicted), kRelativeGapFloor);
      row.pass = row.abs_gap <= std::max(rel_tol * std::fabs(row.predicted), abs_tol);
      report.all_pass = report.all_pass && row.pass;
      report.rows.push_back(row);
    }
  }
  return report;
}

std::string report_to_json(const ComparisonReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const ComparisonRow& r : report.rows) {
    rows.push_back({{"t", r.t},
                    {"metric", r.metric},
                    {"predicted", r.predicted},
                    {"median", r.median},
                    {"p25", r.p25},
                    {"p75", r.p75},
                    {"abs_gap", r.abs_gap},
                    {"rel_gap", r.rel_gap},
                    {"pass", r.pass}});
  }
  const nlohmann::json j{{"tool_version", kVersion},
                         {"config_hash", report.config_hash},
                         {"rel_tol", report.rel_tol},
                         {"abs_tol", report.abs_tol},
                         {"compared", report.rows.size()},
                         {"all_pass", report.all_pass},
                         {"rows", rows}};
  return j.dump(2) + "\n";
}

}  // namespace ldnn
