#include "ldnn/state_evolution.hpp"

#include <cassert>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ldnn/numeric.hpp"

namespace ldnn {
namespace {

void check_params(double lambda, double kappa) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
}

// Mean over particles and block coordinates of 1/(gamma V^2 + lambda).
double mean_inv(const Eigen::ArrayXXd& v2, double gamma, double lambda, bool force_block) {
  const int b = static_cast<int>(v2.cols());
  if (b == 1 && !force_block) {
    return chunked_mean((gamma * v2.col(0) + lambda).inverse());
  }
  double acc = 0.0;
  for (int j = 0; j < b; ++j) acc += chunked_mean((gamma * v2.col(j) + lambda).inverse());
  return acc / static_cast<double>(b);
}

}  // namespace

double gamma_fixed_point_rhs(const ParticleCloud& cloud, double gamma, double lambda, double kappa,
                             bool force_block) {
  check_params(lambda, kappa);
  if (cloud.count() == 0) throw std::invalid_argument("gamma_fixed_point_rhs: empty cloud");
  const Eigen::ArrayXXd v2 = cloud.v.square();
  return 1.0 - kappa + lambda * kappa * mean_inv(v2, gamma, lambda, force_block);
}

double gamma_fixed_point(const ParticleCloud& cloud, double lambda, double kappa, bool force_block) {
  check_params(lambda, kappa);
  if (cloud.count() == 0) throw std::invalid_argument("gamma_fixed_point: empty cloud");
  const Eigen::ArrayXXd v2 = cloud.v.square();
  const auto h = [&](double g) {
    return 1.0 - kappa + lambda * kappa * mean_inv(v2, g, lambda, force_block) - g;
  };

  // h(0) = 1 up to rounding and h is strictly decreasing; h(1) <= 0 except in
  // the degenerate V = 0 case where the root sits exactly at 1.
  double lo = 0.0, hi = 1.0;
  if (h(hi) >= 0.0) return 1.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (h(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::fabs(h(lo)) <= std::fabs(h(hi)) ? lo : hi;
}

SaddleSolution saddle_from_gamma(const ParticleCloud& cloud, double lambda, double kappa,
                                 double sigma, double gamma, bool force_block) {
  check_params(lambda, kappa);
  if (!(sigma >= 0.0)) throw std::invalid_argument("saddle_from_gamma: sigma must be nonnegative");
  if (cloud.count() == 0) throw std::invalid_argument("saddle_from_gamma: empty cloud");
  const int b = cloud.b;
  const Eigen::ArrayXXd v2 = cloud.v.square();

  // E[theta^2 / (gamma v^2 + lambda)^2] and E[1 / (gamma v^2 + lambda)^2],
  // averaged over block coordinates.
  double acc_num = 0.0, acc_den = 0.0;
  if (b == 1 && !force_block) {
    const Eigen::ArrayXd den = (gamma * v2.col(0) + lambda);
    acc_num = chunked_mean(cloud.theta.col(0).square() / den.square());
    acc_den = chunked_mean(den.square().inverse());
  } else {
    for (int j = 0; j < b; ++j) {
      const Eigen::ArrayXd den = (gamma * v2.col(j) + lambda);
      acc_num += chunked_mean(cloud.theta.col(j).square() / den.square());
      acc_den += chunked_mean(den.square().inverse());
    }
    acc_num /= static_cast<double>(b);
    acc_den /= static_cast<double>(b);
  }

  const double numerator = sigma * sigma + lambda * lambda * acc_num;
  const double denominator = 2.0 * gamma + kappa - 1.0 - lambda * lambda * kappa * acc_den;
  if (!(denominator > 0.0)) {
    std::ostringstream os;
    os << "saddle_from_gamma: nonpositive denominator " << denominator << " at gamma=" << gamma
       << " (gamma must solve the fixed point)";
    throw std::runtime_error(os.str());
  }

  SaddleSolution s;
  s.gamma = gamma;
  s.beta = std::sqrt(numerator / denominator);
  s.tau = gamma * s.beta;
  s.fixed_point_residual =
      std::fabs(gamma_fixed_point_rhs(cloud, gamma, lambda, kappa, force_block) - gamma);
  s.denominator = denominator;
  assert(s.beta >= sigma * (1.0 - 1e-9));
  return s;
}

SaddleSolution solve_saddle(const ParticleCloud& cloud, double lambda, double kappa, double sigma,
                            bool force_block) {
  const double gamma = gamma_fixed_point(cloud, lambda, kappa, force_block);
  return saddle_from_gamma(cloud, lambda, kappa, sigma, gamma, force_block);
}

namespace {

// Golden-section minimum of a unimodal function on [lo, hi].
template <class F>
double golden_min(const F& f, double lo, double hi, double tol) {
  constexpr double invphi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

// Geometric ladder from `floor` until a convex function rises; returns an
// interval containing its minimum.
template <class F>
std::pair<double, double> bracket_convex_min(const F& f, double floor_, double cap) {
  double prev = floor_;
  double cur = 2.0 * floor_;
  double f_prev = f(prev);
  double f_cur = f(cur);
  if (f_cur >= f_prev) return {floor_, cur};
  while (cur < cap) {
    const double next = 2.0 * cur;
    const double f_next = f(next);
    if (f_next >= f_cur) return {prev, next};
    prev = cur;
    f_prev = f_cur;
    cur = next;
    f_cur = f_next;
  }
  std::ostringstream os;
  os << "bracket_convex_min: no minimum below " << cap << " (f(" << prev << ")=" << f_prev
     << ", f(" << cur << ")=" << f_cur << ")";
  throw std::runtime_error(os.str());
}

}  // namespace

SaddleSolution saddle_bruteforce_oracle(const ParticleCloud& cloud, double lambda, double kappa,
                                        double sigma) {
  check_params(lambda, kappa);
  if (!(sigma >= 0.0)) throw std::invalid_argument("saddle_bruteforce_oracle: sigma must be nonnegative");
  if (cloud.count() == 0) throw std::invalid_argument("saddle_bruteforce_oracle: empty cloud");
  const int b = cloud.b;
  const Eigen::ArrayXXd v2 = cloud.v.square();
  const Eigen::ArrayXXd th2 = cloud.theta.square();
  const double sigma2 = sigma * sigma;

  const auto f_obj = [&](double tau, double beta) {
    const double b2k = beta * beta * kappa;
    double acc = 0.0;
    for (int j = 0; j < b; ++j) {
      acc += chunked_mean((th2.col(j) + b2k) / (tau * v2.col(j) + beta * lambda));
    }
    const double expectation = acc / static_cast<double>(b);
    return tau * sigma2 / beta + tau * beta * (1.0 - kappa) - tau * tau +
           tau * lambda * expectation;
  };

  const double floor_ = 1e-9 * (1.0 + sigma);
  const double cap = 1e12;
  const auto inner_min = [&](double tau) {
    const auto g = [&](double beta) { return f_obj(tau, beta); };
    const auto [blo, bhi] = bracket_convex_min(g, floor_, cap);
    const double beta = golden_min(g, blo, bhi, 1e-8 * (1.0 + bhi - blo) + 1e-10);
    return std::make_pair(beta, g(beta));
  };

  // Maximize the concave envelope phi(tau) = min_beta f(tau, beta).
  const auto neg_phi = [&](double tau) { return -inner_min(tau).second; };
  const auto [tlo, thi] = bracket_convex_min(neg_phi, floor_, cap);
  const double tau = golden_min(neg_phi, tlo, thi, 1e-8 * (1.0 + thi - tlo) + 1e-10);
  const double beta = inner_min(tau).first;

  SaddleSolution s;
  s.tau = tau;
  s.beta = beta;
  s.gamma = tau / beta;
  s.fixed_point_residual =
      std::fabs(gamma_fixed_point_rhs(cloud, s.gamma, lambda, kappa, true) - s.gamma);
  {
    double acc_den = 0.0;
    for (int j = 0; j < b; ++j) {
      acc_den += chunked_mean((s.gamma * v2.col(j) + lambda).square().inverse());
    }
    acc_den /= static_cast<double>(b);
    s.denominator = 2.0 * s.gamma + kappa - 1.0 - lambda * lambda * kappa * acc_den;
  }
  return s;
}

SeStepResult se_step(const ParticleCloud& cloud, const SaddleSolution& saddle,
                     const ReweightSpec& psi, double kappa, double lambda, Rng& rng,
                     const SeOptions& opt) {
  check_params(lambda, kappa);
  const Eigen::Index count = cloud.count();
  const int b = cloud.b;
  if (count == 0) throw std::invalid_argument("se_step: empty cloud");
  if (!(saddle.tau > 0.0) || !(saddle.beta > 0.0)) {
    throw std::invalid_argument("se_step: saddle parameters must be positive");
  }

  std::normal_distribution<double> normal(0.0, 1.0);
  const double beta_sqrt_kappa = saddle.beta * std::sqrt(kappa);

  SeStepResult out;
  out.q.resize(count, b);
  Eigen::ArrayXd g(count);
  for (int j = 0; j < b; ++j) {
    for (Eigen::Index i = 0; i < count; ++i) g[i] = normal(rng);
    if (opt.negate_gaussians) g = -g;
    out.q.col(j) = saddle.tau * cloud.v.col(j) * (cloud.theta.col(j) + beta_sqrt_kappa * g) /
                   (saddle.tau * cloud.v.col(j).square() + saddle.beta * lambda);
  }

  out.cloud.b = b;
  out.cloud.theta = cloud.theta;
  if (b == 1 && !opt.force_block_kernels) {
    out.cloud.v.resize(count, 1);
    for (Eigen::Index i = 0; i < count; ++i) {
      out.cloud.v(i, 0) = apply_psi_scalar(psi, out.q(i, 0), cloud.v(i, 0));
    }
  } else {
    apply_psi_rows(psi, out.q, cloud.v, out.cloud.v);
  }
  return out;
}

MetricEstimate predict_metric(const Eigen::ArrayXXd& q, const ParticleCloud& before,
                              MetricKind metric) {
  if (q.rows() != before.count() || q.cols() != before.b) {
    throw std::invalid_argument("predict_metric: shape mismatch");
  }
  const int b = before.b;
  Eigen::ArrayXd w;
  if (metric == MetricKind::kL1Error) {
    w = (q.col(0) * before.v.col(0) - before.theta.col(0)).abs();
    for (int j = 1; j < b; ++j) w += (q.col(j) * before.v.col(j) - before.theta.col(j)).abs();
  } else {
    w = (q.col(0) * before.v.col(0) - before.theta.col(0)).square();
    for (int j = 1; j < b; ++j) w += (q.col(j) * before.v.col(j) - before.theta.col(j)).square();
  }
  w /= static_cast<double>(b);
  const MeanWithStderr ms = mean_with_stderr(w);
  return {ms.mean, ms.mc_stderr};
}

PredictedTrajectory se_trajectory(const ExperimentConfig& cfg, const SeOptions& opt) {
  const std::uint64_t se_seed = derive_seed(cfg.seed, stream::kSeRoot);
  Rng cloud_rng = make_rng(derive_seed(se_seed, stream::kCloud));
  ParticleCloud cloud = sample_prior_particles(cfg.prior, cfg.b, cfg.particles, cloud_rng);

  PredictedTrajectory out;
  out.config_hash = config_hash(cfg);
  out.seed = cfg.seed;
  out.particles = cfg.particles;
  out.T = cfg.T;

  for (int t = 1; t <= cfg.T; ++t) {
    const SaddleSolution saddle =
        solve_saddle(cloud, cfg.lambda, cfg.kappa, cfg.sigma, opt.force_block_kernels);
    Rng step_rng = make_rng(derive_seed(se_seed, stream::kSeStep, static_cast<std::uint64_t>(t)));
    SeStepResult step = se_step(cloud, saddle, cfg.psi, cfg.kappa, cfg.lambda, step_rng, opt);

    IterationPrediction ip;
    ip.saddle = saddle;
    for (MetricKind m : cfg.metrics) ip.metrics.emplace_back(m, predict_metric(step.q, cloud, m));
    out.iterations.push_back(std::move(ip));
    cloud = std::move(step.cloud);
  }
  return out;
}

}  // namespace ldnn
