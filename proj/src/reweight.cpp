#include "ldnn/reweight.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ldnn {

Guarantee guarantee_of(const ReweightSpec& spec) {
  switch (spec.kind) {
    case PsiKind::kAbsUv:
    case PsiKind::kUSq:
      return Guarantee::kOutsideGuarantee;
    case PsiKind::kIrlsEpsAlpha:
      // psi^2 grows like |uv|^(4*alpha); the quadratic-growth condition on
      // psi^2 holds exactly when alpha <= 1/2.
      return spec.alpha <= 0.5 ? Guarantee::kWithinAssumption2 : Guarantee::kOutsideGuarantee;
    default:
      return Guarantee::kWithinAssumption2;
  }
}

double apply_psi_scalar(const ReweightSpec& spec, double u, double v) {
  switch (spec.kind) {
    case PsiKind::kAm:
      return u;
    case PsiKind::kIrlsEpsAlpha:
      return std::pow(u * u * v * v + spec.eps, spec.alpha);
    case PsiKind::kSqrtAbs:
      return std::sqrt(std::fabs(u * v));
    case PsiKind::kTanhAbs:
    case PsiKind::kGroupBlindTanh:
    case PsiKind::kGroupAwareTanh:  // block of size one: mean of a single entry
      return std::tanh(std::fabs(u * v));
    case PsiKind::kTanhSq:
      return std::tanh(u * u);
    case PsiKind::kAbsUv:
      return std::fabs(u * v);
    case PsiKind::kUSq:
      return u * u;
  }
  throw std::logic_error("apply_psi_scalar: unhandled kind");
}

void apply_psi(const ReweightSpec& spec, std::span<const double> u_block,
               std::span<const double> v_block, std::span<double> out) {
  const std::size_t b = u_block.size();
  if (v_block.size() != b || out.size() != b) {
    throw std::invalid_argument("apply_psi: block length mismatch");
  }
  if (spec.kind == PsiKind::kGroupAwareTanh) {
    double acc = 0.0;
    for (std::size_t j = 0; j < b; ++j) acc += std::tanh(std::fabs(u_block[j] * v_block[j]));
    const double mean = acc / static_cast<double>(b);
    for (std::size_t j = 0; j < b; ++j) out[j] = mean;
    return;
  }
  for (std::size_t j = 0; j < b; ++j) out[j] = apply_psi_scalar(spec, u_block[j], v_block[j]);
}

std::vector<double> apply_psi(const ReweightSpec& spec, std::span<const double> u_block,
                              std::span<const double> v_block) {
  std::vector<double> out(u_block.size());
  apply_psi(spec, u_block, v_block, out);
  return out;
}

void apply_psi_rows(const ReweightSpec& spec, const Eigen::ArrayXXd& u,
                    const Eigen::ArrayXXd& v, Eigen::ArrayXXd& out) {
  if (u.rows() != v.rows() || u.cols() != v.cols()) {
    throw std::invalid_argument("apply_psi_rows: shape mismatch");
  }
  out.resize(u.rows(), u.cols());
  // Transcendental kinds go through lambdas that mirror apply_psi_scalar's
  // argument ordering exactly, so the stacked path is bit-identical to the
  // per-block loop regardless of how the target ISA vectorizes tanh/pow.
  const auto tanh_abs_uv = [](double a, double c) { return std::tanh(std::fabs(a * c)); };
  switch (spec.kind) {
    case PsiKind::kAm:
      out = u;
      return;
    case PsiKind::kIrlsEpsAlpha: {
      const double eps = spec.eps, alpha = spec.alpha;
      out = u.binaryExpr(v, [eps, alpha](double a, double c) {
        return std::pow(a * a * c * c + eps, alpha);
      });
      return;
    }
    case PsiKind::kSqrtAbs:
      // Packet sqrt is correctly rounded, so this stays vectorized.
      out = (u * v).abs().sqrt();
      return;
    case PsiKind::kTanhAbs:
    case PsiKind::kGroupBlindTanh:
      out = u.binaryExpr(v, tanh_abs_uv);
      return;
    case PsiKind::kTanhSq:
      out = u.unaryExpr([](double a) { return std::tanh(a * a); });
      return;
    case PsiKind::kAbsUv:
      out = (u * v).abs();
      return;
    case PsiKind::kUSq:
      out = u.square();
      return;
    case PsiKind::kGroupAwareTanh: {
      // Accumulate columns in ascending order so the result matches the
      // per-block loop bit for bit.
      const Eigen::Index b = u.cols();
      Eigen::ArrayXd acc = u.col(0).binaryExpr(v.col(0), tanh_abs_uv);
      for (Eigen::Index j = 1; j < b; ++j) acc += u.col(j).binaryExpr(v.col(j), tanh_abs_uv);
      acc /= static_cast<double>(b);
      for (Eigen::Index j = 0; j < b; ++j) out.col(j) = acc;
      return;
    }
  }
  throw std::logic_error("apply_psi_rows: unhandled kind");
}

const char* to_string(PsiKind kind) {
  switch (kind) {
    case PsiKind::kAm: return "am";
    case PsiKind::kIrlsEpsAlpha: return "irls_eps_alpha";
    case PsiKind::kSqrtAbs: return "sqrt_abs";
    case PsiKind::kTanhAbs: return "tanh_abs";
    case PsiKind::kTanhSq: return "tanh_sq";
    case PsiKind::kAbsUv: return "abs_uv";
    case PsiKind::kUSq: return "u_sq";
    case PsiKind::kGroupBlindTanh: return "group_blind_tanh";
    case PsiKind::kGroupAwareTanh: return "group_aware_tanh";
  }
  return "?";
}

const char* to_string(Guarantee g) {
  return g == Guarantee::kWithinAssumption2 ? "within_assumption_2" : "outside_guarantee";
}

PsiKind psi_kind_from_string(const std::string& name) {
  for (PsiKind k : {PsiKind::kAm, PsiKind::kIrlsEpsAlpha, PsiKind::kSqrtAbs, PsiKind::kTanhAbs,
                    PsiKind::kTanhSq, PsiKind::kAbsUv, PsiKind::kUSq, PsiKind::kGroupBlindTanh,
                    PsiKind::kGroupAwareTanh}) {
    if (name == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown reweighting kind '" + name + "'");
}

std::string describe(const ReweightSpec& spec) {
  if (spec.kind != PsiKind::kIrlsEpsAlpha) return to_string(spec.kind);
  std::ostringstream os;
  os << to_string(spec.kind) << "(eps=" << spec.eps << ",alpha=" << spec.alpha << ")";
  return os.str();
}

}  // namespace ldnn
