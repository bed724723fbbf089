#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace ldnn {

// Fixed reduction chunk. Chunks are summed by Eigen (vectorized) and the
// partials combined with Kahan compensation, so large expectations are both
// fast and accurate to ~1e-15 relative, with a result that depends only on
// the data order, never on threading or call pattern.
inline constexpr Eigen::Index kSumChunk = 1024;

template <class Derived>
double chunked_sum(const Eigen::ArrayBase<Derived>& expr) {
  const Eigen::Index n = expr.size();
  double sum = 0.0;
  double comp = 0.0;
  for (Eigen::Index start = 0; start < n; start += kSumChunk) {
    const Eigen::Index len = std::min(kSumChunk, n - start);
    const double part = expr.segment(start, len).sum();
    const double y = part - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

template <class Derived>
double chunked_mean(const Eigen::ArrayBase<Derived>& expr) {
  const Eigen::Index n = expr.size();
  return n == 0 ? 0.0 : chunked_sum(expr) / static_cast<double>(n);
}

struct MeanWithStderr {
  double mean = 0.0;
  double mc_stderr = 0.0;  // sample stddev / sqrt(count)
};

inline MeanWithStderr mean_with_stderr(const Eigen::ArrayXd& w) {
  const Eigen::Index n = w.size();
  MeanWithStderr out;
  if (n == 0) return out;
  out.mean = chunked_mean(w);
  if (n < 2) return out;
  const double ss = chunked_sum((w - out.mean).square());
  const double var = std::max(ss, 0.0) / static_cast<double>(n - 1);
  out.mc_stderr = std::sqrt(var / static_cast<double>(n));
  return out;
}

}  // namespace ldnn
