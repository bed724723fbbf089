#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

namespace ldnn {

enum class PsiKind {
  kAm,             // v <- u
  kIrlsEpsAlpha,   // v <- (u^2 v^2 + eps)^alpha
  kSqrtAbs,        // v <- |u v|^(1/2)
  kTanhAbs,        // v <- tanh|u v|
  kTanhSq,         // v <- tanh(u^2)
  kAbsUv,          // v <- |u v|        (unbounded)
  kUSq,            // v <- u^2          (unbounded)
  kGroupBlindTanh, // entry-wise tanh|u v| on each block
  kGroupAwareTanh, // block mean of tanh|u v|, broadcast to the block
};

// Whether a rule satisfies the regularity conditions (continuous and bounded,
// or squared rule of at-most-quadratic growth) that the exact asymptotic
// predictions are proved under. Rules outside the guarantee are still
// runnable; outputs are labeled so downstream readers can tell.
enum class Guarantee { kWithinAssumption2, kOutsideGuarantee };

struct ReweightSpec {
  PsiKind kind = PsiKind::kTanhAbs;
  double eps = 1e-6;   // irls_eps_alpha only
  double alpha = 0.5;  // irls_eps_alpha only
};

Guarantee guarantee_of(const ReweightSpec& spec);

// Blockwise update v <- psi(u, v). Blocks have length b >= 1; the scalar form
// is the b == 1 specialization used by the fast paths.
double apply_psi_scalar(const ReweightSpec& spec, double u, double v);
void apply_psi(const ReweightSpec& spec, std::span<const double> u_block,
               std::span<const double> v_block, std::span<double> out);
std::vector<double> apply_psi(const ReweightSpec& spec, std::span<const double> u_block,
                              std::span<const double> v_block);

// Vectorized form over a stack of blocks: u and v are (count x b) with one
// block per row. Used by the particle-cloud recursion.
void apply_psi_rows(const ReweightSpec& spec, const Eigen::ArrayXXd& u,
                    const Eigen::ArrayXXd& v, Eigen::ArrayXXd& out);

const char* to_string(PsiKind kind);
const char* to_string(Guarantee g);
PsiKind psi_kind_from_string(const std::string& name);  // throws std::invalid_argument
std::string describe(const ReweightSpec& spec);

}  // namespace ldnn
