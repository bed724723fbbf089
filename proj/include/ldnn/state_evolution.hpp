#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ldnn/config.hpp"
#include "ldnn/prior.hpp"
#include "ldnn/reweight.hpp"
#include "ldnn/rng.hpp"

namespace ldnn {

// Scalar saddle parameters of one asymptotic iteration, plus diagnostics:
// the fixed-point residual |gamma - rhs(gamma)| and the closed-form
// denominator (positive whenever the fixed point is solved).
struct SaddleSolution {
  double gamma = 0.0;
  double beta = 0.0;
  double tau = 0.0;
  double fixed_point_residual = 0.0;
  double denominator = 0.0;
};

struct SeOptions {
  // Route b == 1 computations through the generic block kernels instead of
  // the scalar fast path; the two must agree bit for bit.
  bool force_block_kernels = false;
  // Negate every refresh gaussian. Predictions must be invariant in
  // distribution; used by the sign-symmetry audit.
  bool negate_gaussians = false;
};

// rhs(gamma) = 1 - kappa + lambda * kappa * E[(1/b) sum_j 1/(gamma V_j^2 + lambda)],
// evaluated on the cloud with deterministic chunked sums.
double gamma_fixed_point_rhs(const ParticleCloud& cloud, double gamma, double lambda, double kappa,
                             bool force_block = false);

// Unique root of gamma = rhs(gamma) in (max(0, 1-kappa), 1], by bisection on
// [0, 1]; rhs is strictly decreasing in gamma and rhs(0) = 1.
double gamma_fixed_point(const ParticleCloud& cloud, double lambda, double kappa,
                         bool force_block = false);

// Closed form around the fixed point:
//   beta = sqrt( (sigma^2 + lambda^2 E[(1/b) sum_j Theta_j^2 /(gamma V_j^2+lambda)^2])
//              / (2 gamma + kappa - 1 - lambda^2 kappa E[(1/b) sum_j 1/(gamma V_j^2+lambda)^2]) ),
//   tau = gamma * beta.
// Throws if the denominator is not positive (only possible off the fixed point).
SaddleSolution saddle_from_gamma(const ParticleCloud& cloud, double lambda, double kappa,
                                 double sigma, double gamma, bool force_block = false);

SaddleSolution solve_saddle(const ParticleCloud& cloud, double lambda, double kappa, double sigma,
                            bool force_block = false);

// Independent cross-check: nested bracketing + golden-section search of the
// scalar max-min objective
//   f(tau, beta) = tau sigma^2 / beta + tau beta (1 - kappa) - tau^2
//                + tau lambda E[(1/b) sum_j (Theta_j^2 + beta^2 kappa) / (tau V_j^2 + beta lambda)],
// concave in tau, convex in beta. Slow but free of the closed form.
SaddleSolution saddle_bruteforce_oracle(const ParticleCloud& cloud, double lambda, double kappa,
                                        double sigma);

struct SeStepResult {
  ParticleCloud cloud;   // after the weight update
  Eigen::ArrayXXd q;     // per-particle blocks of the new u-coordinate
};

// One asymptotic iteration: per particle, with a fresh G ~ N(0, I_b),
//   Q = tau V (Theta + beta sqrt(kappa) G) / (tau V^2 + beta lambda)   entry-wise,
//   V' = psi(Q, V) blockwise. Theta never changes.
SeStepResult se_step(const ParticleCloud& cloud, const SaddleSolution& saddle,
                     const ReweightSpec& psi, double kappa, double lambda, Rng& rng,
                     const SeOptions& opt = {});

struct MetricEstimate {
  double value = 0.0;
  double mc_stderr = 0.0;  // sample stddev of per-particle values / sqrt(count)
};

// Plug-in estimate of E[(1/b) sum_j g(Q_j, V_j, Theta_j)] over the cloud,
// evaluated at the post-update Q against the pre-update V.
MetricEstimate predict_metric(const Eigen::ArrayXXd& q, const ParticleCloud& before,
                              MetricKind metric);

struct IterationPrediction {
  SaddleSolution saddle;
  std::vector<std::pair<MetricKind, MetricEstimate>> metrics;
};

struct PredictedTrajectory {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::int64_t particles = 0;
  int T = 0;
  std::vector<IterationPrediction> iterations;  // index t-1 holds iteration t
};

// Full predicted trajectory: prior cloud, then per iteration the saddle
// solve, the refresh step, and the metric estimates.
PredictedTrajectory se_trajectory(const ExperimentConfig& cfg, const SeOptions& opt = {});

}  // namespace ldnn
