#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ldnn/config.hpp"
#include "ldnn/simulate.hpp"
#include "ldnn/state_evolution.hpp"

namespace ldnn {

// Execution overrides layered on a config document. Seed precedence:
// LDNN_SEED environment variable > --seed flag > config field.
struct RunOverrides {
  std::optional<int> trials;
  std::optional<std::int64_t> particles;
  std::optional<std::uint64_t> seed;
  int threads = 0;
};

ExperimentConfig load_config_with_overrides(const std::string& config_path, const RunOverrides& o);

// Geometric grid from lo to hi inclusive.
std::vector<double> log_spaced(double lo, double hi, int count);

struct TuneRow {
  double lambda = 0.0;
  int best_t = 0;             // 1-based iteration achieving the row minimum
  double best_error = 0.0;    // min over t of the predicted l1 error
};

struct TuneResult {
  double best_lambda = 0.0;
  std::vector<TuneRow> rows;
};

// Predicts the trajectory for every lambda in the grid (same seed, so the
// grid shares clouds and refresh draws) and selects the lambda minimizing the
// minimum predicted l1 error over the horizon. Exact ties go to the larger
// lambda (more regularization for the same predicted error).
TuneResult tune_lambda(const ExperimentConfig& cfg, const std::vector<double>& grid,
                       const SeOptions& opt = {});

enum class SweepAxis { kB, kLambda, kKappa };
SweepAxis sweep_axis_from_string(const std::string& name);
const char* to_string(SweepAxis axis);

struct SweepCell {
  double axis_value = 0.0;
  ExperimentConfig cfg;
  PredictedTrajectory predicted;
  std::optional<AggregateTrajectory> simulated;
};

// One prediction (and optional simulation) per axis value, holding every
// other field of the base config fixed.
std::vector<SweepCell> run_sweep(const ExperimentConfig& base, SweepAxis axis,
                                 const std::vector<double>& values, bool with_sim, int threads);

// Command bodies behind the CLI: parse inputs, run, write outputs atomically.
// They throw on errors; exit-code mapping lives in the binary.
int cmd_simulate(const std::string& config_path, const std::string& out_dir, const RunOverrides& o);
int cmd_predict(const std::string& config_path, const std::string& out_dir, const RunOverrides& o);
// Returns 0 when every joined row is within tolerance, 2 otherwise.
int cmd_compare(const std::string& pred_csv, const std::string& sim_csv,
                const std::string& report_path, const std::string& svg_path, double rel_tol,
                double abs_tol);
int cmd_tune_lambda(const std::string& config_path, const std::vector<double>& grid,
                    const std::string& out_dir, const RunOverrides& o);
int cmd_sweep(const std::string& config_path, const std::string& axis,
              const std::vector<double>& values, bool with_sim, const std::string& out_dir,
              const RunOverrides& o);

// File writers, exposed for tests.
void write_trials_csv(const std::string& path, const ExperimentConfig& cfg,
                      const std::vector<TrajectoryRecord>& trials);
void write_aggregate_csv(const std::string& path, const ExperimentConfig& cfg,
                         const AggregateTrajectory& agg);
void write_predicted_csv(const std::string& path, const ExperimentConfig& cfg,
                         const PredictedTrajectory& pred);

}  // namespace ldnn
