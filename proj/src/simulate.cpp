#include "ldnn/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

#include "ldnn/prior.hpp"

namespace ldnn {

Batch generate_batch(int n, int d, const Eigen::VectorXd& theta_star, double sigma, Rng& rng) {
  if (n <= 0 || d <= 0) throw std::invalid_argument("generate_batch: n and d must be positive");
  if (theta_star.size() != d) throw std::invalid_argument("generate_batch: theta* length != d");
  if (!(sigma >= 0.0)) throw std::invalid_argument("generate_batch: sigma must be nonnegative");

  std::normal_distribution<double> normal(0.0, 1.0);
  Batch batch;
  batch.X.resize(n, d);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < n; ++i) batch.X(i, j) = normal(rng);
  }
  batch.epsilon.resize(n);
  for (int i = 0; i < n; ++i) batch.epsilon[i] = sigma * normal(rng);
  batch.y = batch.X * theta_star / std::sqrt(static_cast<double>(d)) + batch.epsilon;
  return batch;
}

double l1_error(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const Eigen::VectorXd& theta_star) {
  if (u.size() != v.size() || u.size() != theta_star.size()) {
    throw std::invalid_argument("l1_error: length mismatch");
  }
  return (u.cwiseProduct(v) - theta_star).cwiseAbs().sum() / static_cast<double>(u.size());
}

double sq_error(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const Eigen::VectorXd& theta_star) {
  if (u.size() != v.size() || u.size() != theta_star.size()) {
    throw std::invalid_argument("sq_error: length mismatch");
  }
  return (u.cwiseProduct(v) - theta_star).squaredNorm() / static_cast<double>(u.size());
}

double eval_metric(MetricKind metric, const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                   const Eigen::VectorXd& theta_star) {
  return metric == MetricKind::kL1Error ? l1_error(u, v, theta_star) : sq_error(u, v, theta_star);
}

TrajectoryRecord run_trajectory(const ExperimentConfig& cfg, int trial_index, const SimOptions& opt,
                                const TrajectoryObserver& observer) {
  if (trial_index < 0) throw std::invalid_argument("run_trajectory: trial index must be nonnegative");

  const std::uint64_t trial_seed = derive_seed(cfg.seed, stream::kTrial, static_cast<std::uint64_t>(trial_index));
  Rng signal_rng = make_rng(derive_seed(trial_seed, stream::kSignal));
  Eigen::VectorXd theta_star, v;
  materialize_signal(cfg.prior, cfg.d, cfg.b, signal_rng, theta_star, v);

  TrajectoryRecord rec;
  rec.config_hash = config_hash(cfg);
  rec.seed = cfg.seed;
  rec.trial_index = trial_index;
  rec.T = cfg.T;
  rec.metrics.reserve(cfg.metrics.size());
  for (MetricKind m : cfg.metrics) rec.metrics.push_back({m, std::vector<double>()});

  std::vector<double> v_next(cfg.b);
  for (int t = 0; t < cfg.T; ++t) {
    Rng batch_rng = make_rng(derive_seed(trial_seed, stream::kBatch, static_cast<std::uint64_t>(t)));
    const Batch batch = generate_batch(cfg.n, cfg.d, theta_star, cfg.sigma, batch_rng);
    const Eigen::VectorXd u = weighted_ridge_solve(batch, v, cfg.lambda);

    for (auto& series : rec.metrics) {
      series.values.push_back(eval_metric(series.metric, u, v, theta_star));
    }
    if (observer) observer(t, batch, u, v);

    if (cfg.b == 1 && !opt.force_block_psi) {
      for (int i = 0; i < cfg.d; ++i) v[i] = apply_psi_scalar(cfg.psi, u[i], v[i]);
    } else {
      for (int start = 0; start < cfg.d; start += cfg.b) {
        apply_psi(cfg.psi, {u.data() + start, static_cast<std::size_t>(cfg.b)},
                  {v.data() + start, static_cast<std::size_t>(cfg.b)}, v_next);
        std::copy(v_next.begin(), v_next.end(), v.data() + start);
      }
    }
  }
  return rec;
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile_sorted: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile_sorted: q must be in [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

AggregateTrajectory aggregate_trials(std::span<const TrajectoryRecord> records) {
  if (records.empty()) throw std::invalid_argument("aggregate_trials: no records");
  const TrajectoryRecord& first = records.front();
  for (const TrajectoryRecord& r : records) {
    if (r.config_hash != first.config_hash) {
      throw std::invalid_argument("aggregate_trials: records from different experiments (hash " +
                                  r.config_hash + " vs " + first.config_hash + ")");
    }
    if (r.T != first.T || r.metrics.size() != first.metrics.size()) {
      throw std::invalid_argument("aggregate_trials: records disagree on horizon or metrics");
    }
  }

  AggregateTrajectory agg;
  agg.config_hash = first.config_hash;
  agg.T = first.T;
  agg.trials = static_cast<int>(records.size());
  for (std::size_t m = 0; m < first.metrics.size(); ++m) {
    QuantileSeries qs;
    qs.metric = first.metrics[m].metric;
    for (int t = 0; t < first.T; ++t) {
      std::vector<double> sample;
      sample.reserve(records.size());
      for (const TrajectoryRecord& r : records) sample.push_back(r.metrics[m].values[t]);
      std::sort(sample.begin(), sample.end());
      qs.p25.push_back(quantile_sorted(sample, 0.25));
      qs.median.push_back(quantile_sorted(sample, 0.50));
      qs.p75.push_back(quantile_sorted(sample, 0.75));
    }
    agg.metrics.push_back(std::move(qs));
  }
  return agg;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads, const SimOptions& opt) {
  int n_workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  n_workers = std::max(1, std::min(n_workers, cfg.trials));

  ExperimentResult result;
  result.trials.resize(cfg.trials);

  if (n_workers == 1) {
    for (int k = 0; k < cfg.trials; ++k) result.trials[k] = run_trajectory(cfg, k, opt);
  } else {
    // Static round-robin assignment: trial k is always computed from the same
    // derived stream and stored at index k, so the thread count cannot change
    // any output.
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(n_workers);
    for (int w = 0; w < n_workers; ++w) {
      pool.emplace_back([&, w]() {
        try {
          for (int k = w; k < cfg.trials; k += n_workers) {
            result.trials[k] = run_trajectory(cfg, k, opt);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (std::thread& th : pool) th.join();
    for (const std::exception_ptr& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  result.agg = aggregate_trials(result.trials);
  return result;
}

}  // namespace ldnn
