#pragma once

#include <Eigen/Dense>

namespace ldnn {

// One measurement batch: y = X theta* / sqrt(d) + epsilon.
struct Batch {
  Eigen::MatrixXd X;        // n x d, i.i.d. standard normal entries
  Eigen::VectorXd y;        // n
  Eigen::VectorXd epsilon;  // n, retained for diagnostics
};

enum class SolveRoute { kAuto, kPrimal, kDual };

// argmin_u (1/n) || y - X (u o v) / sqrt(d) ||^2 + (lambda/d) ||u||^2, i.e.
// the normal equations ((1/n) D X^T X D + lambda I) u = (sqrt(d)/n) D X^T y
// with D = diag(v). kPrimal factors that d x d system; kDual factors the
// n x n system ((1/n) X D^2 X^T + lambda I) w and maps back via u = D X^T w,
// which is algebraically identical and cheaper when n < d. kAuto picks by
// shape. Entries with v_i = 0 come out exactly zero on both routes.
Eigen::VectorXd weighted_ridge_solve(const Batch& batch, const Eigen::VectorXd& v, double lambda,
                                     SolveRoute route = SolveRoute::kAuto);

// || ((1/n) D X^T X D + lambda I) u - (sqrt(d)/n) D X^T y ||_2, relative to
// max(1, rhs norm). Computed by matrix-vector products only.
double kkt_residual(const Batch& batch, const Eigen::VectorXd& v, double lambda,
                    const Eigen::VectorXd& u);

}  // namespace ldnn
