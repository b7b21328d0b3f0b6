// SPDX-License-Identifier: Apache-2.0

#include "rocp/precond.hpp"

#include <cmath>

#include "rocp/errors.hpp"

namespace rocp {

namespace {

// Fixed seed for the power-method start vectors; pinned so spectra-derived
// Chebyshev intervals are reproducible run to run.
constexpr std::uint64_t kPowerSeed = 42;

bool is_full_space(PrecondKind kind) {
  return kind == PrecondKind::SchurDrop || kind == PrecondKind::MatchedExact ||
         kind == PrecondKind::MatchedMean || kind == PrecondKind::MatchedCheb;
}

bool is_matched(PrecondKind kind) {
  return kind == PrecondKind::MatchedExact || kind == PrecondKind::MatchedMean ||
         kind == PrecondKind::MatchedCheb;
}

// Weighted sample mean of a stacked vector.
Eigen::VectorXd weighted_mean(const SaddleSystem& sys, const Eigen::VectorXd& v) {
  const int nh = sys.state_dim();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(nh);
  for (int i = 0; i < sys.samples(); ++i)
    mean += sys.zeta()[i] * v.segment(static_cast<Eigen::Index>(i) * nh, nh);
  return mean;
}

// sum_i zeta_i A_i^-1 applied to a state-sized vector.
Eigen::VectorXd sum_inv_apply(const SaddleSystem& sys, const Eigen::VectorXd& v) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
  for (int i = 0; i < sys.samples(); ++i) out += sys.zeta()[i] * sample_solve(sys, i, v);
  return out;
}

}  // namespace

std::string to_string(PrecondKind kind) {
  switch (kind) {
    case PrecondKind::SchurDrop: return "schur_drop";
    case PrecondKind::MatchedExact: return "matched_exact";
    case PrecondKind::MatchedMean: return "matched_mean";
    case PrecondKind::MatchedCheb: return "matched_cheb";
    case PrecondKind::NormMean: return "norm_mean";
    case PrecondKind::NormCheb: return "norm_cheb";
  }
  throw Error("to_string: unknown preconditioner kind");
}

PrecondKind precond_kind_from_string(const std::string& name) {
  if (name == "schur_drop") return PrecondKind::SchurDrop;
  if (name == "matched_exact") return PrecondKind::MatchedExact;
  if (name == "matched_mean") return PrecondKind::MatchedMean;
  if (name == "matched_cheb") return PrecondKind::MatchedCheb;
  if (name == "norm_mean") return PrecondKind::NormMean;
  if (name == "norm_cheb") return PrecondKind::NormCheb;
  throw ConfigError("unknown preconditioner kind \"" + name +
                    "\"; expected one of schur_drop, matched_exact, matched_mean, "
                    "matched_cheb, norm_mean, norm_cheb");
}

Eigen::VectorXd apply_matched_g(const SaddleSystem& sys, const Eigen::VectorXd& v) {
  const int nh = sys.state_dim();
  Eigen::VectorXd out = apply_block_A(sys, v);
  const Eigen::VectorXd coupling =
      (sys.M_s * weighted_mean(sys, v)) / std::sqrt(sys.beta);
  for (int i = 0; i < sys.samples(); ++i)
    out.segment(static_cast<Eigen::Index>(i) * nh, nh) += sys.zeta()[i] * coupling;
  return out;
}

Eigen::VectorXd apply_matched_schur(const SaddleSystem& sys, const Eigen::VectorXd& v) {
  return apply_matched_g(sys, apply_gamma_mass_inv(sys, apply_matched_g(sys, v)));
}

Eigen::VectorXd apply_core_forward(const SaddleSystem& sys, const Eigen::VectorXd& v) {
  if (v.size() != sys.state_dim())
    throw DimensionMismatch("apply_core_forward: vector is not state-sized");
  return v + (sys.M_s * sum_inv_apply(sys, v)) / std::sqrt(sys.beta);
}

Eigen::VectorXd apply_b1_forward(const SaddleSystem& sys, const Eigen::VectorXd& v) {
  const int nh = sys.state_dim();
  if (v.size() != nh) throw DimensionMismatch("apply_b1_forward: vector is not state-sized");
  const Eigen::VectorXd Kv = sys.K * v;
  // Lift, weight by the gamma mass, project back; plus beta K (sum zeta A^-1) K.
  Eigen::VectorXd lifted(static_cast<Eigen::Index>(sys.samples()) * nh);
  for (int i = 0; i < sys.samples(); ++i)
    lifted.segment(static_cast<Eigen::Index>(i) * nh, nh) = sample_solve(sys, i, Kv);
  const Eigen::VectorXd weighted = apply_gamma_mass(sys, lifted);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(nh);
  Eigen::VectorXd acc_beta = Eigen::VectorXd::Zero(nh);
  for (int i = 0; i < sys.samples(); ++i) {
    acc += sample_solve(sys, i, weighted.segment(static_cast<Eigen::Index>(i) * nh, nh));
    acc_beta += sys.zeta()[i] * lifted.segment(static_cast<Eigen::Index>(i) * nh, nh);
  }
  return sys.K * acc + sys.beta * (sys.K * acc_beta);
}

Eigen::VectorXd apply_b3_forward(const SaddleSystem& sys, const Eigen::VectorXd& v) {
  if (v.size() != sys.state_dim())
    throw DimensionMismatch("apply_b3_forward: vector is not state-sized");
  return (sys.K * sum_inv_apply(sys, sys.K * v)) / sys.beta;
}

Preconditioner::Preconditioner(const SaddleSystem& sys, const PrecondParams& params)
    : sys_(&sys), params_(params) {
  if (params_.k_it < 1) throw ConfigError("preconditioner: k_it must be positive");
  if (params_.power_iters < 1) throw ConfigError("preconditioner: power_iters must be positive");
  if (is_full_space(params_.kind) && sys.control_space != ControlSpace::L2)
    throw ConfigError("preconditioner: " + to_string(params_.kind) + " requires L2 control");
  if (!is_full_space(params_.kind) && sys.control_space != ControlSpace::H1)
    throw ConfigError("preconditioner: " + to_string(params_.kind) + " requires H1 control");

  const int nh = sys.state_dim();
  if (is_matched(params_.kind)) {
    SparseMat F = sys.A0 + (1.0 / std::sqrt(sys.beta)) * sys.M_s;
    F_solver_ = std::make_unique<SparseSolver>();
    F_solver_->compute(F);
    if (F_solver_->info() != Eigen::Success)
      throw Error("preconditioner: factorization of the mean core failed");
  }

  switch (params_.kind) {
    case PrecondKind::SchurDrop:
      break;
    case PrecondKind::MatchedExact: {
      if (sys.inner.mode != InnerSolveMode::Direct)
        throw ConfigError("preconditioner: the exact core needs direct per-sample solves");
      const long size = static_cast<long>(sys.samples()) * nh;
      if (size > params_.exact_core_cap)
        throw SizeCapExceeded("preconditioner: exact core needs N * N_h = " +
                              std::to_string(size) + " > cap " +
                              std::to_string(params_.exact_core_cap));
      Eigen::MatrixXd sum_inv = Eigen::MatrixXd::Zero(nh, nh);
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(nh, nh);
      for (int i = 0; i < sys.samples(); ++i)
        sum_inv += sys.zeta()[i] * sys_->A_solvers[i]->solve(eye);
      const Eigen::MatrixXd L =
          eye + (Eigen::MatrixXd(sys.M_s) * sum_inv) / std::sqrt(sys.beta);
      core_lu_.compute(L);
      has_core_lu_ = true;
      break;
    }
    case PrecondKind::MatchedMean:
      break;
    case PrecondKind::MatchedCheb: {
      auto op = [this](const Eigen::VectorXd& v) { return apply_core_forward(*sys_, v); };
      auto pre = [this](const Eigen::VectorXd& v) { return mean_core_inverse(v); };
      core_lambda_max_ = estimate_lambda_max(op, pre, nh, params_.power_iters, kPowerSeed);
      core_cheb_ = make_cheb_params(std::max(core_lambda_max_, 1.0), params_.k_it);
      break;
    }
    case PrecondKind::NormMean:
    case PrecondKind::NormCheb: {
      SparseMat F1 = sys.M_s + sys.beta * sys.A0;
      F1_solver_ = std::make_unique<SparseSolver>();
      F1_solver_->compute(F1);
      if (F1_solver_->info() != Eigen::Success)
        throw Error("preconditioner: factorization of the mean reduced block failed");
      if (params_.kind == PrecondKind::NormCheb) {
        auto op1 = [this](const Eigen::VectorXd& v) { return apply_b1_forward(*sys_, v); };
        auto pre1 = [this](const Eigen::VectorXd& v) { return b1_mean_inverse(v); };
        b1_lambda_max_ = estimate_lambda_max(op1, pre1, nh, params_.power_iters, kPowerSeed);
        b1_cheb_ = make_cheb_params(std::max(b1_lambda_max_, 1.0), params_.k_it);
        auto op3 = [this](const Eigen::VectorXd& v) { return apply_b3_forward(*sys_, v); };
        auto pre3 = [this](const Eigen::VectorXd& v) { return b3_mean_inverse(v); };
        b3_lambda_max_ = estimate_lambda_max(op3, pre3, nh, params_.power_iters, kPowerSeed);
        b3_cheb_ = make_cheb_params(std::max(b3_lambda_max_, 1.0), params_.k_it);
      }
      break;
    }
  }
}

bool Preconditioner::reduced() const { return !is_full_space(params_.kind); }

int Preconditioner::dim() const {
  return reduced() ? 3 * sys_->state_dim() : sys_->total_dim();
}

Eigen::VectorXd Preconditioner::mean_core_inverse(const Eigen::VectorXd& v) const {
  return sys_->A0 * F_solver_->solve(v);
}

Eigen::VectorXd Preconditioner::core_inverse(const Eigen::VectorXd& v) const {
  switch (params_.kind) {
    case PrecondKind::MatchedExact: {
      Eigen::VectorXd x = core_lu_.solve(v);
      if ((apply_core_forward(*sys_, x) - v).norm() > 1e-10 * v.norm())
        throw CoreSolveFailure("preconditioner: exact core solve lost accuracy");
      return x;
    }
    case PrecondKind::MatchedMean:
      return mean_core_inverse(v);
    case PrecondKind::MatchedCheb: {
      auto op = [this](const Eigen::VectorXd& u) { return apply_core_forward(*sys_, u); };
      auto pre = [this](const Eigen::VectorXd& u) { return mean_core_inverse(u); };
      return chebyshev_semi_iteration(op, pre, v, core_cheb_);
    }
    default:
      throw Error("core_inverse: not a matched kind");
  }
}

Eigen::VectorXd Preconditioner::g_inverse(const Eigen::VectorXd& v) const {
  if (!is_matched(params_.kind)) throw Error("g_inverse: not a matched kind");
  const SaddleSystem& sys = *sys_;
  const int nh = sys.state_dim();
  const double beta_root = std::sqrt(sys.beta);
  // Woodbury: x = t - beta^-1/2 A^-1 Z1 s with L s = M_s 1'Z t, t = A^-1 v.
  const Eigen::VectorXd t = solve_block_A(sys, v);
  const Eigen::VectorXd s = core_inverse(sys.M_s * weighted_mean(sys, t));
  Eigen::VectorXd out = t;
  for (int i = 0; i < sys.samples(); ++i)
    out.segment(static_cast<Eigen::Index>(i) * nh, nh) -= sample_solve(sys, i, s) / beta_root;
  return out;
}

Eigen::VectorXd Preconditioner::schur_inverse(const Eigen::VectorXd& v) const {
  const SaddleSystem& sys = *sys_;
  if (params_.kind == PrecondKind::SchurDrop)
    return solve_block_A(sys, apply_gamma_mass(sys, solve_block_A(sys, v)));
  if (is_matched(params_.kind))
    return g_inverse(apply_gamma_mass(sys, g_inverse(v)));
  throw Error("schur_inverse: not a full-space kind");
}

Eigen::VectorXd Preconditioner::b1_mean_inverse(const Eigen::VectorXd& v) const {
  const SaddleSystem& sys = *sys_;
  const Eigen::VectorXd a = sys.K_solver->solve(v);
  const Eigen::VectorXd b = F1_solver_->solve(sys.A0 * a);
  return sys.K_solver->solve(sys.A0 * b);
}

Eigen::VectorXd Preconditioner::b3_mean_inverse(const Eigen::VectorXd& v) const {
  const SaddleSystem& sys = *sys_;
  return sys.beta * sys.K_solver->solve(sys.A0 * sys.K_solver->solve(v));
}

Eigen::VectorXd Preconditioner::b1_inverse(const Eigen::VectorXd& v) const {
  if (params_.kind == PrecondKind::NormMean) return b1_mean_inverse(v);
  if (params_.kind == PrecondKind::NormCheb) {
    auto op = [this](const Eigen::VectorXd& u) { return apply_b1_forward(*sys_, u); };
    auto pre = [this](const Eigen::VectorXd& u) { return b1_mean_inverse(u); };
    return chebyshev_semi_iteration(op, pre, v, b1_cheb_);
  }
  throw Error("b1_inverse: not a reduced kind");
}

Eigen::VectorXd Preconditioner::b3_inverse(const Eigen::VectorXd& v) const {
  if (params_.kind == PrecondKind::NormMean) return b3_mean_inverse(v);
  if (params_.kind == PrecondKind::NormCheb) {
    auto op = [this](const Eigen::VectorXd& u) { return apply_b3_forward(*sys_, u); };
    auto pre = [this](const Eigen::VectorXd& u) { return b3_mean_inverse(u); };
    return chebyshev_semi_iteration(op, pre, v, b3_cheb_);
  }
  throw Error("b3_inverse: not a reduced kind");
}

Eigen::VectorXd Preconditioner::apply(const Eigen::VectorXd& v) const {
  const SaddleSystem& sys = *sys_;
  const int nh = sys.state_dim();
  if (v.size() != dim()) throw DimensionMismatch("preconditioner apply: wrong vector size");
  Eigen::VectorXd out(v.size());
  if (reduced()) {
    out.segment(0, nh) = b1_inverse(v.segment(0, nh));
    out.segment(nh, nh) = sys.K_solver->solve(v.segment(nh, nh)) / sys.beta;
    out.segment(2 * nh, nh) = b3_inverse(v.segment(2 * nh, nh));
    return out;
  }
  const Eigen::Index ns = static_cast<Eigen::Index>(sys.samples()) * nh;
  out.segment(0, ns) = apply_gamma_mass_inv(sys, v.segment(0, ns));
  out.segment(ns, nh) = mass_solve(sys, v.segment(ns, nh)) / sys.beta;
  out.segment(ns + nh, ns) = schur_inverse(v.segment(ns + nh, ns));
  return out;
}

}  // namespace rocp
