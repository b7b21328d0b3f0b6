// SPDX-License-Identifier: Apache-2.0
//
// The coupled optimality system of the risk-averse control problem after
// collocation in the stochastic variable. With N samples, weights zeta_i
// summing to 1, per-sample stiffness A_i and shared mass M_s, the system in
// the stacked unknowns (y, u, p) reads
//
//     [ G        0          A  ] [y]   [ Z1 M_s y_d ]
//     [ 0        beta*L  -L 1'Z] [u] = [      0     ]
//     [ A     -Z1 L         0  ] [p]   [ Z1 M_s f   ]
//
// where A = blockdiag(zeta_i A_i), Z = diag(zeta_i I), 1 stacks identities,
// L is the control Riesz map (M_s for L2 control, the fixed-coefficient
// stiffness K for H1 control), and G is the gamma-weighted mass
//
//     G = M ((1+gamma) Z - gamma Z 1 1' Z),
//
// whose inverse has the closed form (Z^-1 + gamma 1 1') M^-1 / (1+gamma).
// The variance-penalty weight gamma >= 0 and the regularization beta > 0.
//
// Blocks are never formed; everything is matrix-free over per-sample sparse
// factorizations. Sample loops accumulate in ascending order so results are
// bitwise reproducible.

#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "rocp/fem.hpp"
#include "rocp/quadrature.hpp"
#include "rocp/random_field.hpp"

namespace rocp {

enum class ControlSpace { L2, H1 };

// How mass solves inside the gamma-mass inverse are carried out: exact
// factorization, or a 25-step diagonally preconditioned Chebyshev
// semi-iteration mimicking inexact inner solves.
enum class MassSolveMode { Direct, Chebyshev };

// How per-sample stiffness solves are carried out: exact sparse
// factorization (one per sample, reused), or Jacobi-preconditioned conjugate
// gradients stopped on the relative residual. PCG avoids the N
// factorizations and mimics the inexact multigrid inner solves of practical
// runs; paths that need exact solves (the H1 reduction, the exact dense
// core) refuse it.
enum class InnerSolveMode { Direct, PCG };

struct InnerSolverParams {
  InnerSolveMode mode = InnerSolveMode::Direct;
  double tol = 1e-10;
  int maxit = 400;
};

using SparseSolver = Eigen::SimplicialLDLT<SparseMat>;

// Stacked unknowns: y and p hold N state-sized blocks back to back, u is one
// state-sized control block.
struct BlockVector {
  Eigen::VectorXd y, u, p;
};

struct SystemParams {
  double beta = 1e-2;
  double gamma = 0.1;
  ControlSpace control_space = ControlSpace::L2;
  MassSolveMode mass_mode = MassSolveMode::Direct;
  InnerSolverParams inner;
};

struct SaddleSystem {
  FeSpace space;
  CollocationSet colloc;
  std::vector<SparseMat> A_samples;  // unweighted per-sample stiffness
  SparseMat M_s;                     // interior mass
  SparseMat K;                       // unweighted Laplacian (H1 Riesz map)
  SparseMat A0;                      // weighted mean stiffness sum_i zeta_i A_i
  double beta = 0.0;
  double gamma = 0.0;
  ControlSpace control_space = ControlSpace::L2;
  MassSolveMode mass_mode = MassSolveMode::Direct;
  InnerSolverParams inner;
  BlockVector rhs;

  // Shared factorizations; SaddleSystem is move-only because of these.
  // A_solvers stays empty in PCG inner mode.
  std::vector<std::unique_ptr<SparseSolver>> A_solvers;
  std::unique_ptr<SparseSolver> M_solver, K_solver, A0_solver;

  int samples() const { return static_cast<int>(A_samples.size()); }
  int state_dim() const { return space.dim(); }
  int total_dim() const { return (2 * samples() + 1) * state_dim(); }
  const Eigen::VectorXd& zeta() const { return colloc.weights; }
  const SparseMat& control_riesz() const { return control_space == ControlSpace::L2 ? M_s : K; }
};

// Assembles per-sample operators and the right-hand side. The target y_d and
// deterministic source f are given as callables evaluated at dof locations;
// the source defaults to zero. Throws DimensionMismatch if the collocation
// dimension disagrees with the field, NonPositiveCoefficient via assembly if
// a sample is not coercive.
SaddleSystem assemble_system(FeSpace space, const FieldModel& model, CollocationSet colloc,
                             const SystemParams& params,
                             const std::function<double(double, double)>& y_target,
                             const std::function<double(double, double)>& source = nullptr);

// Default target sin(pi x) sin(pi y), zero source.
SaddleSystem assemble_system(FeSpace space, const FieldModel& model, CollocationSet colloc,
                             const SystemParams& params);

// Mass solve honoring the system's MassSolveMode.
Eigen::VectorXd mass_solve(const SaddleSystem& sys, const Eigen::VectorXd& rhs);

// y' = G y + A p ; u' = beta L u - L (1'Z p) ; p' = A y - Z1 L u.
BlockVector apply_saddle(const SaddleSystem& sys, const BlockVector& v);

// Gamma-weighted mass and its closed-form inverse, acting on stacked
// state-sample vectors of length N * state_dim.
Eigen::VectorXd apply_gamma_mass(const SaddleSystem& sys, const Eigen::VectorXd& v);
Eigen::VectorXd apply_gamma_mass_inv(const SaddleSystem& sys, const Eigen::VectorXd& v);

// blockdiag(zeta_i A_i) and its exact inverse.
Eigen::VectorXd apply_block_A(const SaddleSystem& sys, const Eigen::VectorXd& v);
Eigen::VectorXd solve_block_A(const SaddleSystem& sys, const Eigen::VectorXd& v);

// Schur complement of the L2-control system after eliminating (y, u):
// S = A G^-1 A + (1/beta) Z1 M_s 1'Z. Requires L2 control.
Eigen::VectorXd apply_schur(const SaddleSystem& sys, const Eigen::VectorXd& v);

// Flat layout [y; u; p] used by the Krylov solvers.
Eigen::VectorXd to_flat(const BlockVector& v);
BlockVector from_flat(const SaddleSystem& sys, const Eigen::VectorXd& v);

// H1-control reduction to state size: with the lift E = blockdiag(A^-1 Z1 K,
// I, A^-1 Z1 K), the reduced operator is E' S E on vectors (y, u, p) of
// three state-sized blocks. Per-sample solves are exact (direct
// factorization, residual-checked to 1e-11) and throw InnerSolveFailure
// otherwise.
struct ReducedSystem {
  const SaddleSystem* sys = nullptr;

  int block_dim() const { return sys->state_dim(); }
  int total_dim() const { return 3 * sys->state_dim(); }
};

ReducedSystem make_reduced(const SaddleSystem& sys);
Eigen::VectorXd apply_reduced(const ReducedSystem& red, const Eigen::VectorXd& v);
Eigen::VectorXd reduced_rhs(const ReducedSystem& red);

// Per-sample solve with A_i (unweighted), honoring the system's inner-solve
// mode. Residual-checked: to 1e-11 in Direct mode, to the configured
// tolerance in PCG mode; throws InnerSolveFailure past the check.
Eigen::VectorXd sample_solve(const SaddleSystem& sys, int i, const Eigen::VectorXd& rhs);

}  // namespace rocp
