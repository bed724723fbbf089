#include "ldnn/commands.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <sstream>

#include "ldnn/compare.hpp"
#include "ldnn/csv.hpp"
#include "ldnn/svg.hpp"
#include "ldnn/version.hpp"

namespace ldnn {
namespace {

namespace fs = std::filesystem;

std::optional<std::uint64_t> seed_from_env() {
  const char* raw = std::getenv("LDNN_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const unsigned long long value = std::strtoull(raw, &end, 10);
  if (errno != 0 || end == raw || *end != '\0') {
    throw ConfigError(std::string("LDNN_SEED: not a valid unsigned integer: '") + raw + "'");
  }
  return static_cast<std::uint64_t>(value);
}

std::string metrics_string(const ExperimentConfig& cfg) {
  std::string out;
  for (MetricKind m : cfg.metrics) {
    if (!out.empty()) out += ";";
    out += to_string(m);
  }
  return out;
}

std::string metric_guarantees_string(const ExperimentConfig& cfg) {
  std::string out;
  for (MetricKind m : cfg.metrics) {
    if (!out.empty()) out += ";";
    out += std::string(to_string(m)) + ":" +
           (metric_within_guarantee(m) ? "within_guarantee" : "outside_guarantee");
  }
  return out;
}

CsvMeta base_meta(const std::string& schema, const ExperimentConfig& cfg) {
  CsvMeta meta;
  meta.schema = schema;
  meta.entries = {
      {"tool_version", kVersion},
      {"config_hash", config_hash(cfg)},
      {"n", std::to_string(cfg.n)},
      {"d", std::to_string(cfg.d)},
      {"kappa", format_double(cfg.kappa)},
      {"sigma", format_double(cfg.sigma)},
      {"lambda", format_double(cfg.lambda)},
      {"b", std::to_string(cfg.b)},
      {"T", std::to_string(cfg.T)},
      {"seed", std::to_string(cfg.seed)},
      {"psi", describe(cfg.psi)},
      {"psi_guarantee", to_string(guarantee_of(cfg.psi))},
      {"prior", describe(cfg.prior)},
      {"prior_guarantee",
       prior_within_assumption(cfg.prior) ? "within_assumption_1" : "outside_guarantee"},
      {"metrics", metrics_string(cfg)},
      {"metric_guarantees", metric_guarantees_string(cfg)},
  };
  return meta;
}

void ensure_parent_dir(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

void ensure_dir(const std::string& dir) {
  if (!dir.empty()) fs::create_directories(dir);
}

}  // namespace

ExperimentConfig load_config_with_overrides(const std::string& config_path, const RunOverrides& o) {
  ExperimentConfig cfg = parse_config_file(config_path);
  if (o.trials) {
    if (*o.trials <= 0) throw ConfigError("trials: override must be positive");
    cfg.trials = *o.trials;
  }
  if (o.particles) {
    if (*o.particles <= 0) throw ConfigError("particles: override must be positive");
    cfg.particles = *o.particles;
  }
  if (o.seed) cfg.seed = *o.seed;
  if (const auto env = seed_from_env()) cfg.seed = *env;
  return cfg;
}

std::vector<double> log_spaced(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > 0.0) || hi < lo) {
    throw std::invalid_argument("log_spaced: need 0 < lo <= hi");
  }
  if (count < 2) {
    if (count == 1 && lo == hi) return {lo};
    throw std::invalid_argument("log_spaced: need at least 2 points (or lo == hi with 1)");
  }
  std::vector<double> grid(count);
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < count; ++i) {
    grid[i] = std::exp(llo + (lhi - llo) * static_cast<double>(i) / (count - 1));
  }
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

TuneResult tune_lambda(const ExperimentConfig& cfg, const std::vector<double>& grid,
                       const SeOptions& opt) {
  if (grid.empty()) throw std::invalid_argument("tune_lambda: empty lambda grid");
  for (double l : grid) {
    if (!(l > 0.0) || !std::isfinite(l)) {
      throw std::invalid_argument("tune_lambda: grid values must be positive and finite");
    }
  }
  if (cfg.T <= 0) throw std::invalid_argument("tune_lambda: horizon T must be positive");

  TuneResult result;
  double best_error = std::numeric_limits<double>::infinity();
  bool any_finite = false;

  for (double l : grid) {
    ExperimentConfig trial_cfg = cfg;
    trial_cfg.lambda = l;
    trial_cfg.metrics = {MetricKind::kL1Error};
    const PredictedTrajectory pred = se_trajectory(trial_cfg, opt);

    TuneRow row;
    row.lambda = l;
    row.best_error = std::numeric_limits<double>::infinity();
    for (int t = 1; t <= trial_cfg.T; ++t) {
      const double err = pred.iterations[t - 1].metrics.front().second.value;
      if (std::isfinite(err) && err < row.best_error) {
        row.best_error = err;
        row.best_t = t;
      }
    }
    result.rows.push_back(row);
    if (!std::isfinite(row.best_error)) continue;
    any_finite = true;
    // Exact ties go to the larger lambda regardless of grid order.
    if (row.best_error < best_error ||
        (row.best_error == best_error && l > result.best_lambda)) {
      best_error = row.best_error;
      result.best_lambda = l;
    }
  }
  if (!any_finite) throw std::runtime_error("tune_lambda: no lambda produced finite predictions");
  return result;
}

SweepAxis sweep_axis_from_string(const std::string& name) {
  if (name == "b") return SweepAxis::kB;
  if (name == "lambda") return SweepAxis::kLambda;
  if (name == "kappa") return SweepAxis::kKappa;
  throw std::invalid_argument("sweep: unknown axis '" + name + "' (expected b, lambda, or kappa)");
}

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kB: return "b";
    case SweepAxis::kLambda: return "lambda";
    case SweepAxis::kKappa: return "kappa";
  }
  return "?";
}

namespace {

ExperimentConfig apply_axis(const ExperimentConfig& base, SweepAxis axis, double value) {
  ExperimentConfig cfg = base;
  switch (axis) {
    case SweepAxis::kB: {
      const double rounded = std::round(value);
      if (!(value > 0.0) || std::fabs(value - rounded) > 1e-9) {
        throw std::invalid_argument("sweep b: values must be positive integers");
      }
      cfg.b = static_cast<int>(rounded);
      if (cfg.d % cfg.b != 0) {
        throw std::invalid_argument("sweep b: d=" + std::to_string(cfg.d) +
                                    " not divisible by b=" + std::to_string(cfg.b));
      }
      break;
    }
    case SweepAxis::kLambda:
      if (!(value > 0.0)) throw std::invalid_argument("sweep lambda: values must be positive");
      cfg.lambda = value;
      break;
    case SweepAxis::kKappa: {
      if (!(value > 0.0)) throw std::invalid_argument("sweep kappa: values must be positive");
      const double n_real = static_cast<double>(cfg.d) / value;
      const double rounded = std::round(n_real);
      if (std::fabs(n_real - rounded) > 1e-6 || rounded < 1.0) {
        throw std::invalid_argument("sweep kappa: d/kappa must be a positive integer (d=" +
                                    std::to_string(cfg.d) + ")");
      }
      cfg.n = static_cast<int>(rounded);
      break;
    }
  }
  cfg.kappa = static_cast<double>(cfg.d) / static_cast<double>(cfg.n);
  return cfg;
}

}  // namespace

std::vector<SweepCell> run_sweep(const ExperimentConfig& base, SweepAxis axis,
                                 const std::vector<double>& values, bool with_sim, int threads) {
  if (values.empty()) throw std::invalid_argument("sweep: empty value list");
  std::vector<SweepCell> cells;
  cells.reserve(values.size());
  for (double value : values) {
    SweepCell cell;
    cell.axis_value = value;
    cell.cfg = apply_axis(base, axis, value);
    cell.predicted = se_trajectory(cell.cfg);
    if (with_sim) cell.simulated = run_experiment(cell.cfg, threads).agg;
    cells.push_back(std::move(cell));
  }
  return cells;
}

void write_trials_csv(const std::string& path, const ExperimentConfig& cfg,
                      const std::vector<TrajectoryRecord>& trials) {
  CsvMeta meta = base_meta("ldnn.trials.v1", cfg);
  meta.entries.emplace_back("trials", std::to_string(trials.size()));
  std::ostringstream os;
  os << csv_header_block(meta, {"trial", "t", "metric", "value"});
  for (const TrajectoryRecord& rec : trials) {
    for (const MetricSeries& series : rec.metrics) {
      for (int t = 1; t <= rec.T; ++t) {
        os << rec.trial_index << "," << t << "," << to_string(series.metric) << ","
           << format_double(series.values[t - 1]) << "\n";
      }
    }
  }
  atomic_write_file(path, os.str());
}

void write_aggregate_csv(const std::string& path, const ExperimentConfig& cfg,
                         const AggregateTrajectory& agg) {
  CsvMeta meta = base_meta("ldnn.aggregate.v1", cfg);
  meta.entries.emplace_back("trials", std::to_string(agg.trials));
  std::ostringstream os;
  os << csv_header_block(meta, {"t", "metric", "median", "p25", "p75"});
  for (const QuantileSeries& qs : agg.metrics) {
    for (int t = 1; t <= agg.T; ++t) {
      os << t << "," << to_string(qs.metric) << "," << format_double(qs.median[t - 1]) << ","
         << format_double(qs.p25[t - 1]) << "," << format_double(qs.p75[t - 1]) << "\n";
    }
  }
  atomic_write_file(path, os.str());
}

void write_predicted_csv(const std::string& path, const ExperimentConfig& cfg,
                         const PredictedTrajectory& pred) {
  CsvMeta meta = base_meta("ldnn.predicted.v1", cfg);
  meta.entries.emplace_back("particles", std::to_string(pred.particles));
  std::ostringstream os;
  os << csv_header_block(meta,
                         {"t", "gamma", "beta", "tau", "metric", "predicted_value", "mc_stderr"});
  for (int t = 1; t <= pred.T; ++t) {
    const IterationPrediction& ip = pred.iterations[t - 1];
    for (const auto& [metric, estimate] : ip.metrics) {
      os << t << "," << format_double(ip.saddle.gamma) << "," << format_double(ip.saddle.beta)
         << "," << format_double(ip.saddle.tau) << "," << to_string(metric) << ","
         << format_double(estimate.value) << "," << format_double(estimate.mc_stderr) << "\n";
    }
  }
  atomic_write_file(path, os.str());
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 const RunOverrides& o) {
  const ExperimentConfig cfg = load_config_with_overrides(config_path, o);
  const ExperimentResult result = run_experiment(cfg, o.threads);
  ensure_dir(out_dir);
  const std::string trials_path = (fs::path(out_dir) / "trials.csv").string();
  const std::string agg_path = (fs::path(out_dir) / "aggregate.csv").string();
  write_trials_csv(trials_path, cfg, result.trials);
  write_aggregate_csv(agg_path, cfg, result.agg);
  std::cout << "wrote " << trials_path << " and " << agg_path << " (config " << config_hash(cfg)
            << ", " << cfg.trials << " trials)\n";
  return 0;
}

int cmd_predict(const std::string& config_path, const std::string& out_dir,
                const RunOverrides& o) {
  const ExperimentConfig cfg = load_config_with_overrides(config_path, o);
  const PredictedTrajectory pred = se_trajectory(cfg);
  ensure_dir(out_dir);
  const std::string path = (fs::path(out_dir) / "predicted.csv").string();
  write_predicted_csv(path, cfg, pred);
  std::cout << "wrote " << path << " (config " << config_hash(cfg) << ", " << cfg.particles
            << " particles)\n";
  return 0;
}

int cmd_compare(const std::string& pred_csv, const std::string& sim_csv,
                const std::string& report_path, const std::string& svg_path, double rel_tol,
                double abs_tol) {
  const CsvTable pred = read_csv(pred_csv);
  const CsvTable agg = read_csv(sim_csv);
  const ComparisonReport report = compare_tables(pred, agg, rel_tol, abs_tol);

  ensure_parent_dir(report_path);
  atomic_write_file(report_path, report_to_json(report));

  if (!svg_path.empty()) {
    // Plot the first metric present in the prediction table.
    std::string metric;
    const int pm = pred.column_index("metric");
    if (!pred.rows.empty()) metric = pred.rows.front()[pm];
    SvgSeries predicted, median, p25, p75;
    for (const ComparisonRow& row : report.rows) {
      if (row.metric != metric) continue;
      predicted.t.push_back(row.t);
      predicted.value.push_back(row.predicted);
      median.t.push_back(row.t);
      median.value.push_back(row.median);
      p25.t.push_back(row.t);
      p25.value.push_back(row.p25);
      p75.t.push_back(row.t);
      p75.value.push_back(row.p75);
    }
    ensure_parent_dir(svg_path);
    write_comparison_svg(svg_path, metric + "  (config " + report.config_hash + ")", metric,
                         predicted, median, p25, p75);
  }

  int failed = 0;
  for (const ComparisonRow& row : report.rows) {
    if (!row.pass) ++failed;
  }
  std::cout << "compared " << report.rows.size() << " rows, " << failed
            << " outside tolerance (report " << report_path << ")\n";
  return failed == 0 ? 0 : 2;
}

int cmd_tune_lambda(const std::string& config_path, const std::vector<double>& grid,
                    const std::string& out_dir, const RunOverrides& o) {
  const ExperimentConfig cfg = load_config_with_overrides(config_path, o);
  const TuneResult result = tune_lambda(cfg, grid);

  CsvMeta meta = base_meta("ldnn.tune.v1", cfg);
  meta.entries.emplace_back("particles", std::to_string(cfg.particles));
  meta.entries.emplace_back("best_lambda", format_double(result.best_lambda));
  std::ostringstream os;
  os << csv_header_block(meta, {"lambda", "best_t", "best_predicted_l1_error", "selected"});
  for (const TuneRow& row : result.rows) {
    os << format_double(row.lambda) << "," << row.best_t << "," << format_double(row.best_error)
       << "," << (row.lambda == result.best_lambda ? 1 : 0) << "\n";
  }
  ensure_dir(out_dir);
  const std::string path = (fs::path(out_dir) / "tune.csv").string();
  atomic_write_file(path, os.str());
  std::cout << "best_lambda=" << format_double(result.best_lambda) << " (wrote " << path << ")\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& axis,
              const std::vector<double>& values, bool with_sim, const std::string& out_dir,
              const RunOverrides& o) {
  const ExperimentConfig base = load_config_with_overrides(config_path, o);
  const SweepAxis ax = sweep_axis_from_string(axis);
  const std::vector<SweepCell> cells = run_sweep(base, ax, values, with_sim, o.threads);

  CsvMeta meta = base_meta("ldnn.sweep.v1", base);
  meta.entries.emplace_back("axis", to_string(ax));
  meta.entries.emplace_back("particles", std::to_string(base.particles));
  if (with_sim) meta.entries.emplace_back("trials", std::to_string(base.trials));
  std::ostringstream os;
  os << csv_header_block(meta, {"axis", "axis_value", "t", "gamma", "beta", "tau", "metric",
                                "predicted_value", "mc_stderr", "median", "p25", "p75"});
  for (const SweepCell& cell : cells) {
    for (int t = 1; t <= cell.cfg.T; ++t) {
      const IterationPrediction& ip = cell.predicted.iterations[t - 1];
      for (std::size_t m = 0; m < ip.metrics.size(); ++m) {
        const auto& [metric, estimate] = ip.metrics[m];
        os << to_string(ax) << "," << format_double(cell.axis_value) << "," << t << ","
           << format_double(ip.saddle.gamma) << "," << format_double(ip.saddle.beta) << ","
           << format_double(ip.saddle.tau) << "," << to_string(metric) << ","
           << format_double(estimate.value) << "," << format_double(estimate.mc_stderr);
        if (cell.simulated) {
          const QuantileSeries& qs = cell.simulated->metrics[m];
          os << "," << format_double(qs.median[t - 1]) << "," << format_double(qs.p25[t - 1])
             << "," << format_double(qs.p75[t - 1]);
        } else {
          os << ",,,";
        }
        os << "\n";
      }
    }
  }
  ensure_dir(out_dir);
  const std::string path = (fs::path(out_dir) / "sweep.csv").string();
  atomic_write_file(path, os.str());
  std::cout << "wrote " << path << " (" << cells.size() << " axis values)\n";
  return 0;
}

}  // namespace ldnn
