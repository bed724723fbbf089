#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ldnn/config.hpp"
#include "ldnn/linalg.hpp"
#include "ldnn/rng.hpp"

namespace ldnn {

// Fresh batch: X has i.i.d. standard normal entries, epsilon ~ N(0, sigma^2 I),
// y = X theta* / sqrt(d) + epsilon. X is filled column by column, then
// epsilon, so the draw order is fixed for a given rng.
Batch generate_batch(int n, int d, const Eigen::VectorXd& theta_star, double sigma, Rng& rng);

// Estimation error of the product parameter u o v against theta*.
double l1_error(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const Eigen::VectorXd& theta_star);
double sq_error(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const Eigen::VectorXd& theta_star);
double eval_metric(MetricKind metric, const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                   const Eigen::VectorXd& theta_star);

struct MetricSeries {
  MetricKind metric = MetricKind::kL1Error;
  std::vector<double> values;  // values[t-1] is the error after iteration t
};

// One trial: the full metric trajectory of a single run.
struct TrajectoryRecord {
  std::string config_hash;
  std::uint64_t seed = 0;  // root seed; the trial stream is derived from it
  int trial_index = 0;
  int T = 0;
  std::vector<MetricSeries> metrics;
};

struct SimOptions {
  // Route every weight update through the generic block code even at b == 1,
  // instead of the scalar fast path. The two must agree bit for bit.
  bool force_block_psi = false;
};

// Called after each u-update with the batch and iterates of that iteration;
// v_prev is the weight vector the update was solved against.
using TrajectoryObserver =
    std::function<void(int t, const Batch& batch, const Eigen::VectorXd& u, const Eigen::VectorXd& v_prev)>;

// Runs one trial of the batched algorithm: fresh batch, weighted ridge
// u-update, metric evaluation at (u^(t+1), v^(t)), then the blockwise weight
// update. Signal, initialization, and every batch live on substreams derived
// from (cfg.seed, trial_index), so trials are reproducible in isolation.
TrajectoryRecord run_trajectory(const ExperimentConfig& cfg, int trial_index,
                                const SimOptions& opt = {}, const TrajectoryObserver& observer = {});

struct QuantileSeries {
  MetricKind metric = MetricKind::kL1Error;
  std::vector<double> median, p25, p75;  // indexed by t-1
};

struct AggregateTrajectory {
  std::string config_hash;
  int T = 0;
  int trials = 0;
  std::vector<QuantileSeries> metrics;
};

// Linear-interpolation quantile of a sorted sample (the convention where the
// median of an even count is the mean of the two central order statistics).
double quantile_sorted(std::span<const double> sorted, double q);

// Per-iteration median and quartiles across trials. All records must come
// from the same experiment (hash, horizon, metric set).
AggregateTrajectory aggregate_trials(std::span<const TrajectoryRecord> records);

struct ExperimentResult {
  std::vector<TrajectoryRecord> trials;
  AggregateTrajectory agg;
};

// Runs cfg.trials independent trials. threads <= 0 means use the hardware
// count; results are identical for any thread count because each trial owns
// its derived streams and lands in its slot by index.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads = 0,
                                const SimOptions& opt = {});

}  // namespace ldnn
