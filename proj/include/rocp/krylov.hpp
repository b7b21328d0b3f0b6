// SPDX-License-Identifier: Apache-2.0
//
// Iterative kernels: preconditioned MINRES and CG with stopping on the
// unpreconditioned relative residual, a fixed-step Chebyshev semi-iteration,
// a power-method bound estimator, Lanczos with full reorthogonalization in a
// user-supplied inner product, and dense (generalized) eigensolvers used at
// verification scale.

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "rocp/saddle.hpp"

namespace rocp {

using LinOp = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct SolveReport {
  int iterations = 0;
  bool converged = false;
  double final_residual = 0.0;     // ||b - S x|| / ||b||
  std::vector<double> residuals;   // one entry per iteration
  double seconds = 0.0;
};

// Minimum-residual iteration for symmetric (possibly indefinite) operators
// with a symmetric positive definite preconditioner. Convergence is judged
// on the unpreconditioned relative residual ||b - S x|| / ||b||, tracked by
// a recurrence and recomputed explicitly every tenth iteration to stop
// drift. A null preconditioner means identity. Non-convergence within maxit
// is reported, not thrown.
std::pair<Eigen::VectorXd, SolveReport> minres(const LinOp& op, const LinOp& pre,
                                               const Eigen::VectorXd& b, double tol, int maxit);

// Conjugate gradients for symmetric positive definite operators; same
// stopping rule and preconditioner convention as minres.
std::pair<Eigen::VectorXd, SolveReport> cg(const LinOp& op, const LinOp& pre,
                                           const Eigen::VectorXd& b, double tol, int maxit);

// Parameters of the damped preconditioned splitting underlying the Chebyshev
// semi-iteration: the iteration matrix T = I - alpha P^-1 B has its spectrum
// inside [t_lo, t_hi] with -1 < t_lo <= t_hi < 1.
struct ChebParams {
  double alpha = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  int k_it = 2;
};

// Standard rule for operators with sigma(P^-1 B) in [1, lambda_max]:
// alpha = 1/(1 + lambda_max), t_lo = 1 - alpha*lambda_max, t_hi = 1 - alpha.
ChebParams make_cheb_params(double lambda_max, int k_it);

// Runs k_it Chebyshev-accelerated steps of v <- v + alpha P^-1 (rhs - B v)
// from v = 0. For a fixed step count this is a fixed polynomial in P^-1 B
// applied to P^-1 rhs, hence linear in rhs; with symmetric B and suitable P
// it is a legitimate preconditioner block.
Eigen::VectorXd chebyshev_semi_iteration(const LinOp& op, const LinOp& pre,
                                         const Eigen::VectorXd& rhs, const ChebParams& params);

// Power method for the dominant eigenvalue of P^-1 B; start vector is
// all-ones plus a small seeded perturbation, the return value a Rayleigh
// quotient. Intended for spectra that are real and positive.
double estimate_lambda_max(const LinOp& op, const LinOp& pre, int dim, int iters,
                           std::uint64_t seed);

struct SpectrumReport {
  std::vector<double> spectrum;  // real parts, ascending
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double max_imag = 0.0;         // largest imaginary magnitude encountered
  int mult_one = 0;              // eigenvalues with |lambda - 1| <= 1e-8
  bool breakdown = false;        // Lanczos found an invariant subspace early
};

enum class DensePath { Auto, General, SymmetricDefinite };

// Dense spectrum of B^-1 A (pass an empty B for a standard problem). The
// symmetric-definite path requires symmetric A and SPD B and produces real
// eigenvalues; the general path reports real parts and records the largest
// imaginary part. Dimensions above size_cap throw SizeCapExceeded.
SpectrumReport dense_spectrum(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                              DensePath path = DensePath::Auto, int size_cap = 6000);

// Lanczos with full reorthogonalization for an operator self-adjoint in the
// inner product induced by SPD `ip` (null = Euclidean). Returns the extreme
// Ritz values after `iters` steps.
SpectrumReport lanczos_extremal(const LinOp& op, const LinOp& ip, int dim, int iters,
                                std::uint64_t seed);

// Spectrum of the state-sized matrix whose eigenvalues generate the
// beta-dependent part of the drop-preconditioned Schur spectrum:
//   R = E[Kw^2] + gamma (E[Kw^2] - E[Kw]^2),  Kw = A_w^-1 M_s.
// Computed through the mass similarity transform that makes each term
// symmetric, so the returned values are exactly real, ascending.
Eigen::VectorXd reduced_spectrum(const SaddleSystem& sys, int size_cap = 6000);

}  // namespace rocp
