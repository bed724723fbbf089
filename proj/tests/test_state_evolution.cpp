#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "ldnn/state_evolution.hpp"

using namespace ldnn;

namespace {

ParticleCloud constant_cloud(double v, double theta, Eigen::Index count = 1, int b = 1) {
  ParticleCloud cloud;
  cloud.b = b;
  cloud.v = Eigen::ArrayXXd::Constant(count, b, v);
  cloud.theta = Eigen::ArrayXXd::Constant(count, b, theta);
  return cloud;
}

ParticleCloud gaussian_v_cloud(Eigen::Index count, std::uint64_t seed, double theta_p = 0.3) {
  PriorSpec prior;
  prior.kind = PriorKind::kBernoulli;
  prior.p = theta_p;
  prior.init.kind = InitKind::kGaussian;
  prior.init.stddev = 1.0;
  Rng rng = make_rng(seed);
  return sample_prior_particles(prior, 1, count, rng);
}

// Independent root finder: two-level sign-change scan of rhs(gamma) - gamma.
double grid_scan_gamma(const ParticleCloud& cloud, double lambda, double kappa) {
  const auto h = [&](double g) { return gamma_fixed_point_rhs(cloud, g, lambda, kappa) - g; };
  double lo = 0.0, hi = 1.0;
  for (int level = 0; level < 2; ++level) {
    const double width = (hi - lo) / 1000.0;
    double g_prev = lo;
    for (int i = 1; i <= 1000; ++i) {
      const double g = lo + width * i;
      if (h(g) <= 0.0) {
        lo = g_prev;
        hi = g;
        break;
      }
      g_prev = g;
    }
  }
  return 0.5 * (lo + hi);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// E|aG + c| for G ~ N(0,1), a > 0: folded-normal first moment.
double folded_mean(double a, double c) {
  return a * std::sqrt(2.0 / M_PI) * std::exp(-c * c / (2.0 * a * a)) +
         c * (2.0 * normal_cdf(c / a) - 1.0);
}

}  // namespace

TEST_CASE("degenerate weights pin the fixed point at one") {
  const ParticleCloud cloud = constant_cloud(0.0, 1.0, 8);
  CHECK(gamma_fixed_point_rhs(cloud, 0.3, 0.5, 2.0) == 1.0);
  CHECK(gamma_fixed_point(cloud, 0.5, 2.0) == 1.0);
}

TEST_CASE("unit weights give known quadratic roots") {
  const ParticleCloud cloud = constant_cloud(1.0, 1.0);
  // gamma = 1/(gamma + 1)  =>  golden ratio conjugate.
  CHECK(gamma_fixed_point(cloud, 1.0, 1.0) == doctest::Approx(0.6180339887498949).epsilon(1e-12));
  // kappa = 2, lambda = 1/2: gamma^2 + 3/2 gamma - 1/2 = 0.
  CHECK(gamma_fixed_point(cloud, 0.5, 2.0) ==
        doctest::Approx(0.28077640640441515).epsilon(1e-12));
  // kappa = 1/2, lambda = 1: gamma^2 + 1/2 gamma - 1 = 0.
  CHECK(gamma_fixed_point(cloud, 1.0, 0.5) ==
        doctest::Approx(0.7807764064044151).epsilon(1e-12));
}

TEST_CASE("a half-zero half-one weight law gives an exact rational root") {
  // E[1/(gamma v^2 + 1/2)] = 1 + 1/(2 gamma + 1); with lambda = 1/2, kappa = 2
  // the fixed point solves gamma^2 + gamma/2 - 1/2 = 0, i.e. gamma = 1/2.
  ParticleCloud cloud;
  cloud.b = 1;
  cloud.v.resize(4, 1);
  cloud.v << 0.0, 1.0, 0.0, 1.0;
  cloud.theta = Eigen::ArrayXXd::Zero(4, 1);
  CHECK(gamma_fixed_point(cloud, 0.5, 2.0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("bisection agrees with an independent sign-change scan") {
  const ParticleCloud cloud = gaussian_v_cloud(20000, 99);
  const double lambda = 0.01, kappa = 8.0;
  const double found = gamma_fixed_point(cloud, lambda, kappa);
  const double scanned = grid_scan_gamma(cloud, lambda, kappa);
  CHECK(std::fabs(found - scanned) <= 2e-6);
}

TEST_CASE("bisection root is a genuine fixed point") {
  const ParticleCloud cloud = gaussian_v_cloud(20000, 100);
  for (const auto [lambda, kappa] : {std::pair{0.01, 8.0}, std::pair{0.3, 2.0}, std::pair{1.0, 0.5}}) {
    const double gamma = gamma_fixed_point(cloud, lambda, kappa);
    CHECK(gamma > std::max(0.0, 1.0 - kappa));
    CHECK(gamma <= 1.0);
    CHECK(std::fabs(gamma_fixed_point_rhs(cloud, gamma, lambda, kappa) - gamma) <= 1e-12);
  }
}

TEST_CASE("closed form at a point mass with zero weights") {
  // v = 0, theta = 0, sigma = 1, kappa = lambda = 1, gamma = 1:
  // numerator = 1, denominator = 2 + 1 - 1 - 1 = 1, so beta = tau = 1.
  const ParticleCloud cloud = constant_cloud(0.0, 0.0, 4);
  const SaddleSolution s = saddle_from_gamma(cloud, 1.0, 1.0, 1.0, 1.0);
  CHECK(s.beta == 1.0);
  CHECK(s.tau == 1.0);
  CHECK(s.denominator == 1.0);
  CHECK(s.fixed_point_residual == 0.0);
}

TEST_CASE("off the fixed point the denominator check fires") {
  const ParticleCloud cloud = constant_cloud(1.0, 1.0);
  // gamma = 0, kappa = 1/2, lambda = 1: denominator = 0 + 1/2 - 1 - 1/2 = -1.
  CHECK_THROWS_WITH_AS(saddle_from_gamma(cloud, 1.0, 0.5, 0.1, 0.0),
                       doctest::Contains("nonpositive denominator"), std::runtime_error);
}

TEST_CASE("the noise floor is never undercut") {
  const ParticleCloud sampled = gaussian_v_cloud(5000, 7);
  for (const double sigma : {0.0, 0.05, 0.5, 2.0}) {
    for (const auto [lambda, kappa] : {std::pair{0.05, 4.0}, std::pair{0.5, 1.5}, std::pair{1.0, 0.5}}) {
      const SaddleSolution s = solve_saddle(sampled, lambda, kappa, sigma);
      CHECK(s.beta >= sigma * (1.0 - 1e-12));
      CHECK(s.tau == s.gamma * s.beta);
      CHECK(s.denominator > 0.0);
    }
  }
}

TEST_CASE("brute-force saddle search matches the closed form") {
  // Point mass: expectations are exact, so only the two solvers differ.
  const ParticleCloud point = constant_cloud(1.0, 1.0, 2);
  for (const auto [lambda, kappa, sigma] : {std::tuple{0.7, 2.0, 0.3}, std::tuple{0.1, 0.5, 0.0},
                                            std::tuple{1.5, 1.0, 1.0}}) {
    const SaddleSolution closed = solve_saddle(point, lambda, kappa, sigma);
    const SaddleSolution brute = saddle_bruteforce_oracle(point, lambda, kappa, sigma);
    CHECK(brute.tau == doctest::Approx(closed.tau).epsilon(1e-5));
    CHECK(brute.beta == doctest::Approx(closed.beta).epsilon(1e-5));
  }

  const ParticleCloud sampled = gaussian_v_cloud(5000, 11);
  for (const auto [lambda, kappa, sigma] : {std::tuple{0.1, 4.0, 0.1}, std::tuple{0.5, 0.8, 0.4}}) {
    const SaddleSolution closed = solve_saddle(sampled, lambda, kappa, sigma);
    const SaddleSolution brute = saddle_bruteforce_oracle(sampled, lambda, kappa, sigma);
    CHECK(brute.tau == doctest::Approx(closed.tau).epsilon(1e-5));
    CHECK(brute.beta == doctest::Approx(closed.beta).epsilon(1e-5));
    CHECK(brute.gamma == doctest::Approx(closed.gamma).epsilon(1e-5));
  }
}

TEST_CASE("refresh step: zero weights give exactly zero coordinates") {
  const ParticleCloud cloud = constant_cloud(0.0, 1.0, 100);
  SaddleSolution s;
  s.tau = 1.0;
  s.beta = 1.0;
  s.gamma = 1.0;
  Rng rng = make_rng(8);
  ReweightSpec psi;
  psi.kind = PsiKind::kTanhAbs;
  const SeStepResult step = se_step(cloud, s, psi, 1.0, 1.0, rng);
  CHECK((step.q == 0.0).all());
  CHECK((step.cloud.v == 0.0).all());
  CHECK((step.cloud.theta == 1.0).all());
}

TEST_CASE("refresh step reproduces its defining formula bit for bit") {
  const Eigen::Index count = 64;
  const ParticleCloud cloud = constant_cloud(1.0, 1.0, count);
  SaddleSolution s;
  s.tau = 1.0;
  s.beta = 1.0;
  s.gamma = 1.0;
  ReweightSpec psi;
  psi.kind = PsiKind::kAm;
  const std::uint64_t seed = 4242;
  Rng rng = make_rng(seed);
  const SeStepResult step = se_step(cloud, s, psi, 1.0, 1.0, rng);

  Rng replay = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < count; ++i) {
    const double g = normal(replay);
    const double expected = (1.0 * 1.0 * (1.0 + 1.0 * g)) / (1.0 * 1.0 + 1.0 * 1.0);
    CHECK(step.q(i, 0) == expected);
    CHECK(step.cloud.v(i, 0) == expected);  // am keeps v = q
  }
}

TEST_CASE("negating the refresh gaussians leaves predictions unchanged in law") {
  const ParticleCloud cloud = gaussian_v_cloud(30000, 21);
  const SaddleSolution s = solve_saddle(cloud, 0.3, 2.0, 0.1);
  ReweightSpec psi;
  psi.kind = PsiKind::kTanhAbs;
  Rng rng_a = make_rng(77), rng_b = make_rng(77);
  SeOptions negate;
  negate.negate_gaussians = true;
  const SeStepResult a = se_step(cloud, s, psi, 2.0, 0.3, rng_a);
  const SeStepResult b = se_step(cloud, s, psi, 2.0, 0.3, rng_b, negate);
  for (const MetricKind m : {MetricKind::kL1Error, MetricKind::kSquaredError}) {
    const MetricEstimate ma = predict_metric(a.q, cloud, m);
    const MetricEstimate mb = predict_metric(b.q, cloud, m);
    CHECK(std::fabs(ma.value - mb.value) <= 6.0 * (ma.mc_stderr + mb.mc_stderr));
  }
}

TEST_CASE("particle order is irrelevant") {
  const ParticleCloud cloud = gaussian_v_cloud(30000, 33);
  ParticleCloud shuffled;
  shuffled.b = cloud.b;
  std::vector<Eigen::Index> order(cloud.count());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), std::mt19937_64(5));
  shuffled.v.resize(cloud.count(), 1);
  shuffled.theta.resize(cloud.count(), 1);
  for (Eigen::Index i = 0; i < cloud.count(); ++i) {
    shuffled.v(i, 0) = cloud.v(order[i], 0);
    shuffled.theta(i, 0) = cloud.theta(order[i], 0);
  }

  // Saddle parameters are expectations: permutation changes only rounding.
  const SaddleSolution sa = solve_saddle(cloud, 0.2, 3.0, 0.1);
  const SaddleSolution sb = solve_saddle(shuffled, 0.2, 3.0, 0.1);
  CHECK(sa.tau == doctest::Approx(sb.tau).epsilon(1e-12));
  CHECK(sa.beta == doctest::Approx(sb.beta).epsilon(1e-12));

  // The refresh draws pair with different particles, so estimates agree only
  // statistically.
  ReweightSpec psi;
  psi.kind = PsiKind::kTanhAbs;
  Rng rng_a = make_rng(91), rng_b = make_rng(91);
  const SeStepResult a = se_step(cloud, sa, psi, 3.0, 0.2, rng_a);
  const SeStepResult b = se_step(shuffled, sb, psi, 3.0, 0.2, rng_b);
  const MetricEstimate ma = predict_metric(a.q, cloud, MetricKind::kL1Error);
  const MetricEstimate mb = predict_metric(b.q, shuffled, MetricKind::kL1Error);
  CHECK(std::fabs(ma.value - mb.value) <= 6.0 * (ma.mc_stderr + mb.mc_stderr));
}

TEST_CASE("monte carlo stderr shrinks like one over sqrt of the particle count") {
  ExperimentConfig cfg;
  cfg.n = 100;
  cfg.d = 400;
  cfg.kappa = 4.0;
  cfg.sigma = 0.2;
  cfg.lambda = 0.1;
  cfg.b = 1;
  cfg.T = 1;
  cfg.seed = 5;
  cfg.psi.kind = PsiKind::kTanhAbs;
  cfg.prior.kind = PriorKind::kBernoulli;
  cfg.prior.p = 0.2;
  cfg.particles = 20000;
  const PredictedTrajectory small = se_trajectory(cfg);
  cfg.particles = 80000;
  const PredictedTrajectory big = se_trajectory(cfg);
  const double ratio = big.iterations[0].metrics[0].second.mc_stderr /
                       small.iterations[0].metrics[0].second.mc_stderr;
  CHECK(ratio > 0.45);
  CHECK(ratio < 0.55);
}

TEST_CASE("metric estimates match a plain loop") {
  ParticleCloud cloud;
  cloud.b = 2;
  cloud.v.resize(3, 2);
  cloud.v << 1.0, 0.5, -0.25, 2.0, 0.0, 1.0;
  cloud.theta.resize(3, 2);
  cloud.theta << 0.5, 0.0, 1.0, -1.0, 0.25, 0.75;
  Eigen::ArrayXXd q(3, 2);
  q << 0.4, -0.1, 2.0, 0.3, 1.0, 0.9;

  for (const MetricKind m : {MetricKind::kL1Error, MetricKind::kSquaredError}) {
    std::vector<double> w(3, 0.0);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 2; ++j) {
        const double gap = q(i, j) * cloud.v(i, j) - cloud.theta(i, j);
        w[i] += m == MetricKind::kL1Error ? std::fabs(gap) : gap * gap;
      }
      w[i] /= 2.0;
    }
    const double mean = (w[0] + w[1] + w[2]) / 3.0;
    double var = 0.0;
    for (const double x : w) var += (x - mean) * (x - mean);
    var /= 2.0;  // sample variance, 3 - 1 degrees of freedom
    const MetricEstimate est = predict_metric(q, cloud, m);
    CHECK(est.value == doctest::Approx(mean).epsilon(1e-14));
    CHECK(est.mc_stderr == doctest::Approx(std::sqrt(var / 3.0)).epsilon(1e-14));
  }
}

TEST_CASE("one-step predictions match the folded-normal closed form") {
  // Point-mass prior: every particle is (V, Theta) = (1, 1), so after one
  // refresh Q V - Theta = a G + c exactly, with
  //   a = tau beta sqrt(kappa) / (tau + beta lambda),
  //   c = -beta lambda / (tau + beta lambda).
  ExperimentConfig cfg;
  cfg.n = 100;
  cfg.d = 200;
  cfg.kappa = 2.0;
  cfg.sigma = 0.3;
  cfg.lambda = 0.5;
  cfg.b = 1;
  cfg.T = 1;
  cfg.seed = 314;
  cfg.psi.kind = PsiKind::kTanhAbs;
  cfg.prior.kind = PriorKind::kPointMass;
  cfg.prior.value = 1.0;
  cfg.particles = 200000;
  cfg.metrics = {MetricKind::kL1Error, MetricKind::kSquaredError};

  const PredictedTrajectory pred = se_trajectory(cfg);
  REQUIRE(pred.iterations.size() == 1);
  const SaddleSolution& s = pred.iterations[0].saddle;
  CHECK(s.fixed_point_residual <= 1e-12);
  const double denom = s.tau + s.beta * cfg.lambda;
  const double a = s.tau * s.beta * std::sqrt(cfg.kappa) / denom;
  const double c = -s.beta * cfg.lambda / denom;

  const auto& metrics = pred.iterations[0].metrics;
  REQUIRE(metrics.size() == 2);
  CHECK(metrics[0].first == MetricKind::kL1Error);
  const MetricEstimate l1 = metrics[0].second;
  CHECK(std::fabs(l1.value - folded_mean(a, c)) <= 6.0 * l1.mc_stderr);
  const MetricEstimate sq = metrics[1].second;
  CHECK(std::fabs(sq.value - (a * a + c * c)) <= 6.0 * sq.mc_stderr);
}

TEST_CASE("trajectories are deterministic and extend by prefix") {
  ExperimentConfig cfg;
  cfg.n = 50;
  cfg.d = 200;
  cfg.kappa = 4.0;
  cfg.sigma = 0.1;
  cfg.lambda = 0.2;
  cfg.b = 1;
  cfg.T = 3;
  cfg.seed = 2718;
  cfg.psi.kind = PsiKind::kSqrtAbs;
  cfg.prior.kind = PriorKind::kBernoulli;
  cfg.prior.p = 0.1;
  cfg.particles = 5000;

  const PredictedTrajectory a = se_trajectory(cfg);
  const PredictedTrajectory b = se_trajectory(cfg);
  REQUIRE(a.iterations.size() == 3);
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK(a.iterations[t].saddle.tau == b.iterations[t].saddle.tau);
    CHECK(a.iterations[t].metrics[0].second.value == b.iterations[t].metrics[0].second.value);
  }

  cfg.T = 5;
  const PredictedTrajectory longer = se_trajectory(cfg);
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK(longer.iterations[t].saddle.tau == a.iterations[t].saddle.tau);
    CHECK(longer.iterations[t].saddle.beta == a.iterations[t].saddle.beta);
    CHECK(longer.iterations[t].metrics[0].second.value == a.iterations[t].metrics[0].second.value);
  }
}

TEST_CASE("forcing the block kernels at b=1 changes nothing") {
  ExperimentConfig cfg;
  cfg.n = 50;
  cfg.d = 100;
  cfg.kappa = 2.0;
  cfg.sigma = 0.2;
  cfg.lambda = 0.3;
  cfg.b = 1;
  cfg.T = 3;
  cfg.seed = 11;
  cfg.psi.kind = PsiKind::kIrlsEpsAlpha;
  cfg.prior.kind = PriorKind::kBernoulli;
  cfg.prior.p = 0.3;
  cfg.particles = 4000;

  SeOptions forced;
  forced.force_block_kernels = true;
  const PredictedTrajectory a = se_trajectory(cfg);
  const PredictedTrajectory b = se_trajectory(cfg, forced);
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK(a.iterations[t].saddle.gamma == b.iterations[t].saddle.gamma);
    CHECK(a.iterations[t].saddle.beta == b.iterations[t].saddle.beta);
    CHECK(a.iterations[t].metrics[0].second.value == b.iterations[t].metrics[0].second.value);
    CHECK(a.iterations[t].metrics[0].second.mc_stderr == b.iterations[t].metrics[0].second.mc_stderr);
  }
}

TEST_CASE("bad inputs are rejected") {
  ParticleCloud empty;
  empty.b = 1;
  empty.v.resize(0, 1);
  empty.theta.resize(0, 1);
  CHECK_THROWS_AS(gamma_fixed_point(empty, 1.0, 1.0), std::invalid_argument);
  const ParticleCloud cloud = constant_cloud(1.0, 1.0);
  CHECK_THROWS_AS(gamma_fixed_point(cloud, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(gamma_fixed_point(cloud, 1.0, 0.0), std::invalid_argument);
  SaddleSolution s;
  s.tau = 0.0;
  s.beta = 1.0;
  ReweightSpec psi;
  Rng rng = make_rng(1);
  CHECK_THROWS_AS(se_step(cloud, s, psi, 1.0, 1.0, rng), std::invalid_argument);
}
