#include "ldnn/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace ldnn {
namespace {

void check_inputs(const Batch& batch, const Eigen::VectorXd& v, double lambda) {
  const Eigen::Index n = batch.X.rows();
  const Eigen::Index d = batch.X.cols();
  if (batch.y.size() != n) throw std::invalid_argument("weighted_ridge_solve: y length != rows of X");
  if (v.size() != d) throw std::invalid_argument("weighted_ridge_solve: v length != cols of X");
  if (!(lambda > 0.0)) throw std::invalid_argument("weighted_ridge_solve: lambda must be positive");
  if (!batch.X.allFinite() || !batch.y.allFinite() || !v.allFinite()) {
    throw std::invalid_argument("weighted_ridge_solve: non-finite input");
  }
}

}  // namespace

Eigen::VectorXd weighted_ridge_solve(const Batch& batch, const Eigen::VectorXd& v, double lambda,
                                     SolveRoute route) {
  check_inputs(batch, v, lambda);
  const Eigen::Index n = batch.X.rows();
  const Eigen::Index d = batch.X.cols();
  const double sqrt_d = std::sqrt(static_cast<double>(d));
  const double inv_n = 1.0 / static_cast<double>(n);

  if (route == SolveRoute::kAuto) route = n < d ? SolveRoute::kDual : SolveRoute::kPrimal;

  if (route == SolveRoute::kDual) {
    const Eigen::MatrixXd B = batch.X * v.asDiagonal();  // n x d
    Eigen::MatrixXd K = inv_n * (B * B.transpose());
    K.diagonal().array() += lambda;
    const Eigen::LLT<Eigen::MatrixXd> llt(K);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("weighted_ridge_solve: Cholesky factorization failed (dual)");
    }
    const Eigen::VectorXd w = llt.solve((sqrt_d * inv_n) * batch.y);
    return v.cwiseProduct(batch.X.transpose() * w);
  }

  const Eigen::MatrixXd B = batch.X * v.asDiagonal();  // n x d
  Eigen::MatrixXd M = inv_n * (B.transpose() * B);
  M.diagonal().array() += lambda;
  const Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("weighted_ridge_solve: Cholesky factorization failed (primal)");
  }
  return llt.solve((sqrt_d * inv_n) * (B.transpose() * batch.y));
}

double kkt_residual(const Batch& batch, const Eigen::VectorXd& v, double lambda,
                    const Eigen::VectorXd& u) {
  check_inputs(batch, v, lambda);
  if (u.size() != v.size()) throw std::invalid_argument("kkt_residual: u length != v length");
  const Eigen::Index n = batch.X.rows();
  const Eigen::Index d = batch.X.cols();
  const double sqrt_d = std::sqrt(static_cast<double>(d));
  const double inv_n = 1.0 / static_cast<double>(n);

  const Eigen::VectorXd rhs = (sqrt_d * inv_n) * v.cwiseProduct(batch.X.transpose() * batch.y);
  const Eigen::VectorXd lhs =
      inv_n * v.cwiseProduct(batch.X.transpose() * (batch.X * u.cwiseProduct(v))) + lambda * u;
  return (lhs - rhs).norm() / std::max(1.0, rhs.norm());
}

}  // namespace ldnn
