// SPDX-License-Identifier: Apache-2.0
//
// Block-diagonal preconditioners for the collocated optimality system.
//
// Full-space kinds (L2 control), P = diag(G, beta M_s, S_hat):
//   schur_drop     S_hat = A G^-1 A, the Schur complement with its coupling
//                  term dropped; applies are exact per-sample solves.
//   matched_exact  S_hat = Gw G^-1 Gw with Gw = A + beta^-1/2 Z1 M_s 1'Z,
//                  which matches the dropped term; Gw is inverted by a
//                  Woodbury identity whose state-sized core matrix
//                  L = I + beta^-1/2 M_s sum_i zeta_i A_i^-1 is formed
//                  densely and factorized (capped by exact_core_cap).
//   matched_mean   the core solve is replaced by the mean approximation
//                  L_0^-1 = A_0 (A_0 + beta^-1/2 M_s)^-1, A_0 = sum zeta A_i.
//   matched_cheb   the core solve runs k_it Chebyshev steps preconditioned
//                  by L_0; the interval comes from a power-method bound of
//                  lambda_max(L_0^-1 L), whose spectrum starts at 1.
//
// Reduced kinds (H1 control), acting on the three state-sized blocks of the
// lifted system, P = diag(B1, beta K, B3):
//   norm_mean      B1 and B3 are inverted through the mean stiffness:
//                  B1_0^-1 = K^-1 A_0 (M_s + beta A_0)^-1 A_0 K^-1 and
//                  B3_0^-1 = beta K^-1 A_0 K^-1; the middle block is exact.
//   norm_cheb      B1 and B3 solves run k_it Chebyshev steps preconditioned
//                  by their mean inverses.
//
// Every kind is a symmetric positive definite operator, so MINRES remains
// valid; the Chebyshev variants stay symmetric because a fixed polynomial in
// P^-1 B applied to P^-1 is symmetric whenever B and P are.

#pragma once

#include <string>

#include <Eigen/Dense>

#include "rocp/krylov.hpp"
#include "rocp/saddle.hpp"

namespace rocp {

enum class PrecondKind { SchurDrop, MatchedExact, MatchedMean, MatchedCheb, NormMean, NormCheb };

std::string to_string(PrecondKind kind);
PrecondKind precond_kind_from_string(const std::string& name);

struct PrecondParams {
  PrecondKind kind = PrecondKind::SchurDrop;
  int k_it = 2;           // Chebyshev steps in *_cheb kinds
  int power_iters = 20;   // power-method iterations for interval bounds
  long exact_core_cap = 20000;  // largest N * N_h the exact core may form
};

// Forward operators the preconditioners target; exposed for spectrum
// experiments and tests. All per-sample solves are exact and checked.

// Matched weighted operator Gw = A + beta^-1/2 Z1 M_s 1'Z on stacked vectors.
Eigen::VectorXd apply_matched_g(const SaddleSystem& sys, const Eigen::VectorXd& v);

// Matched Schur complement Gw G^-1 Gw.
Eigen::VectorXd apply_matched_schur(const SaddleSystem& sys, const Eigen::VectorXd& v);

// Woodbury core L = I + beta^-1/2 M_s sum_i zeta_i A_i^-1 (state-sized).
Eigen::VectorXd apply_core_forward(const SaddleSystem& sys, const Eigen::VectorXd& v);

// Reduced diagonal blocks (state-sized, H1 systems):
//   B1 = K 1'Z A^-1 (G_gamma) A^-1 Z1 K + beta K (sum zeta A^-1) K
//   B3 = (1/beta) K (sum zeta A^-1) K.
Eigen::VectorXd apply_b1_forward(const SaddleSystem& sys, const Eigen::VectorXd& v);
Eigen::VectorXd apply_b3_forward(const SaddleSystem& sys, const Eigen::VectorXd& v);

class Preconditioner {
 public:
  // Validates kind against the system's control space: full-space kinds
  // require L2, reduced kinds require H1 (ConfigError otherwise). The exact
  // core throws SizeCapExceeded when N * N_h exceeds exact_core_cap.
  Preconditioner(const SaddleSystem& sys, const PrecondParams& params);

  const PrecondParams& params() const { return params_; }
  bool reduced() const;
  // Dimension of the vectors apply() acts on.
  int dim() const;

  // Applies the preconditioner inverse. Full-space kinds take the flat
  // [y; u; p] layout; reduced kinds take three state-sized blocks.
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;

  // Inverse of the Schur block alone (full-space kinds).
  Eigen::VectorXd schur_inverse(const Eigen::VectorXd& v) const;
  // Inverse of Gw by Woodbury with this kind's core solve (matched kinds).
  Eigen::VectorXd g_inverse(const Eigen::VectorXd& v) const;
  // This kind's approximation of L^-1 (matched kinds).
  Eigen::VectorXd core_inverse(const Eigen::VectorXd& v) const;
  // Block inverses of the reduced kinds.
  Eigen::VectorXd b1_inverse(const Eigen::VectorXd& v) const;
  Eigen::VectorXd b3_inverse(const Eigen::VectorXd& v) const;

  // Power-method bounds feeding the Chebyshev intervals (zero when unused).
  double core_lambda_max() const { return core_lambda_max_; }
  double b1_lambda_max() const { return b1_lambda_max_; }
  double b3_lambda_max() const { return b3_lambda_max_; }

 private:
  Eigen::VectorXd mean_core_inverse(const Eigen::VectorXd& v) const;
  Eigen::VectorXd b1_mean_inverse(const Eigen::VectorXd& v) const;
  Eigen::VectorXd b3_mean_inverse(const Eigen::VectorXd& v) const;

  const SaddleSystem* sys_ = nullptr;
  PrecondParams params_;
  std::unique_ptr<SparseSolver> F_solver_;   // A0 + beta^-1/2 M_s
  std::unique_ptr<SparseSolver> F1_solver_;  // M_s + beta A0
  Eigen::PartialPivLU<Eigen::MatrixXd> core_lu_;
  bool has_core_lu_ = false;
  ChebParams core_cheb_, b1_cheb_, b3_cheb_;
  double core_lambda_max_ = 0.0, b1_lambda_max_ = 0.0, b3_lambda_max_ = 0.0;
};

}  // namespace rocp
