// SPDX-License-Identifier: Apache-2.0

#include "rocp/saddle.hpp"

#include <cmath>

#include "rocp/errors.hpp"
#include "rocp/krylov.hpp"

namespace rocp {

namespace {

// Stacked-block access: block i of a vector holding N state-sized blocks.
Eigen::VectorBlock<Eigen::VectorXd> seg(Eigen::VectorXd& v, int i, int nh) {
  return v.segment(static_cast<Eigen::Index>(i) * nh, nh);
}
Eigen::VectorBlock<const Eigen::VectorXd> seg(const Eigen::VectorXd& v, int i, int nh) {
  return v.segment(static_cast<Eigen::Index>(i) * nh, nh);
}

void require_stacked(const SaddleSystem& sys, const Eigen::VectorXd& v, const char* what) {
  if (v.size() != static_cast<Eigen::Index>(sys.samples()) * sys.state_dim())
    throw DimensionMismatch(std::string(what) + ": expected a stacked state-sample vector");
}

std::unique_ptr<SparseSolver> factorize(const SparseMat& A, const char* what) {
  auto solver = std::make_unique<SparseSolver>();
  solver->compute(A);
  if (solver->info() != Eigen::Success)
    throw Error(std::string(what) + ": sparse factorization failed");
  return solver;
}

}  // namespace

SaddleSystem assemble_system(FeSpace space, const FieldModel& model, CollocationSet colloc,
                             const SystemParams& params,
                             const std::function<double(double, double)>& y_target,
                             const std::function<double(double, double)>& source) {
  if (colloc.count() < 1) throw ConfigError("assemble_system: empty collocation set");
  if (colloc.dim() != model.dim())
    throw DimensionMismatch("assemble_system: collocation dimension " +
                            std::to_string(colloc.dim()) + " does not match field dimension " +
                            std::to_string(model.dim()));
  if (!(params.beta > 0.0)) throw ConfigError("assemble_system: beta must be positive");
  if (params.gamma < 0.0) throw ConfigError("assemble_system: gamma must be nonnegative");
  if (!(params.inner.tol > 0.0))
    throw ConfigError("assemble_system: inner solver tolerance must be positive");
  if (params.inner.maxit < 1)
    throw ConfigError("assemble_system: inner solver maxit must be at least 1");

  SaddleSystem sys;
  sys.space = std::move(space);
  sys.colloc = std::move(colloc);
  sys.beta = params.beta;
  sys.gamma = params.gamma;
  sys.control_space = params.control_space;
  sys.mass_mode = params.mass_mode;
  sys.inner = params.inner;

  sys.M_s = assemble_mass(sys.space);
  sys.K = assemble_laplacian(sys.space);

  const int n_samples = sys.colloc.count();
  sys.A_samples.reserve(n_samples);
  sys.A_solvers.reserve(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    const Eigen::VectorXd values =
        eval_field(model, sys.space.mesh, sys.colloc.nodes.row(i).transpose());
    field_extremes(values);  // rejects non-coercive samples
    sys.A_samples.push_back(assemble_stiffness(sys.space, values));
    if (i == 0)
      sys.A0 = sys.colloc.weights[0] * sys.A_samples.back();
    else
      sys.A0 += sys.colloc.weights[i] * sys.A_samples.back();
  }
  if (sys.inner.mode == InnerSolveMode::Direct)
    for (int i = 0; i < n_samples; ++i)
      sys.A_solvers.push_back(factorize(sys.A_samples[i], "sample stiffness"));
  sys.M_solver = factorize(sys.M_s, "mass");
  sys.K_solver = factorize(sys.K, "laplacian");
  sys.A0_solver = factorize(sys.A0, "mean stiffness");

  const int nh = sys.state_dim();
  const Eigen::VectorXd target_mass = sys.M_s * interpolate_at_dofs(sys.space, y_target);
  Eigen::VectorXd source_mass = Eigen::VectorXd::Zero(nh);
  if (source) source_mass = sys.M_s * interpolate_at_dofs(sys.space, source);

  sys.rhs.y.resize(static_cast<Eigen::Index>(n_samples) * nh);
  sys.rhs.u = Eigen::VectorXd::Zero(nh);
  sys.rhs.p.resize(static_cast<Eigen::Index>(n_samples) * nh);
  for (int i = 0; i < n_samples; ++i) {
    seg(sys.rhs.y, i, nh) = sys.colloc.weights[i] * target_mass;
    seg(sys.rhs.p, i, nh) = sys.colloc.weights[i] * source_mass;
  }
  return sys;
}

SaddleSystem assemble_system(FeSpace space, const FieldModel& model, CollocationSet colloc,
                             const SystemParams& params) {
  const double pi = std::acos(-1.0);
  return assemble_system(std::move(space), model, std::move(colloc), params,
                         [pi](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); });
}

Eigen::VectorXd mass_solve(const SaddleSystem& sys, const Eigen::VectorXd& rhs) {
  if (rhs.size() != sys.state_dim())
    throw DimensionMismatch("mass_solve: vector is not state-sized");
  if (sys.mass_mode == MassSolveMode::Direct) return sys.M_solver->solve(rhs);
  // Diagonally preconditioned Chebyshev. For linear elements on triangles
  // the Jacobi-scaled mass spectrum sits in [1/2, 2]; with damping 1/3 the
  // iteration matrix lives in [1/3, 5/6]. Fixed 25 steps keep the solve a
  // linear map while reaching ~1e-9 accuracy.
  const Eigen::VectorXd inv_diag = sys.M_s.diagonal().cwiseInverse();
  ChebParams params;
  params.alpha = 1.0 / 3.0;
  params.t_lo = 1.0 / 3.0;
  params.t_hi = 5.0 / 6.0;
  params.k_it = 25;
  auto op = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return sys.M_s * v; };
  auto pre = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return inv_diag.cwiseProduct(v);
  };
  return chebyshev_semi_iteration(op, pre, rhs, params);
}

BlockVector apply_saddle(const SaddleSystem& sys, const BlockVector& v) {
  const int nh = sys.state_dim();
  const int n = sys.samples();
  require_stacked(sys, v.y, "apply_saddle(y)");
  require_stacked(sys, v.p, "apply_saddle(p)");
  if (v.u.size() != nh) throw DimensionMismatch("apply_saddle(u): control is not state-sized");
  const Eigen::VectorXd& zeta = sys.zeta();
  const SparseMat& L = sys.control_riesz();
  const double g = sys.gamma;

  Eigen::VectorXd mean_y = Eigen::VectorXd::Zero(nh);
  Eigen::VectorXd mean_p = Eigen::VectorXd::Zero(nh);
  for (int i = 0; i < n; ++i) {
    mean_y += zeta[i] * seg(v.y, i, nh);
    mean_p += zeta[i] * seg(v.p, i, nh);
  }

  BlockVector out;
  out.y.resize(v.y.size());
  out.p.resize(v.p.size());
  const Eigen::VectorXd Lu = L * v.u;
  for (int i = 0; i < n; ++i) {
    out.y.segment(static_cast<Eigen::Index>(i) * nh, nh) =
        sys.M_s * (zeta[i] * ((1.0 + g) * seg(v.y, i, nh) - g * mean_y)) +
        zeta[i] * (sys.A_samples[i] * seg(v.p, i, nh));
    out.p.segment(static_cast<Eigen::Index>(i) * nh, nh) =
        zeta[i] * (sys.A_samples[i] * seg(v.y, i, nh)) - zeta[i] * Lu;
  }
  out.u = sys.beta * Lu - L * mean_p;
  return out;
}

Eigen::VectorXd apply_gamma_mass(const SaddleSystem& sys, const Eigen::VectorXd& v) {
  require_stacked(sys, v, "apply_gamma_mass");
  const int nh = sys.state_dim();
  const Eigen::VectorXd& zeta = sys.zeta();
  const double g = sys.gamma;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(nh);
  for (int i = 0; i < sys.samples(); ++i) mean += zeta[i] * seg(v, i, nh);
  Eigen::VectorXd out(v.size());
  for (int i = 0; i < sys.samples(); ++i)
    seg(out, i, nh) = sys.M_s * (zeta[i] * ((1.0 + g) * seg(v, i, nh) - g * mean));
  return out;
}

Eigen::VectorXd apply_gamma_mass_inv(const SaddleSystem& sys, const Eigen::VectorXd& v) {
  require_stacked(sys, v, "apply_gamma_mass_inv");
  const int nh = sys.state_dim();
  const Eigen::VectorXd& zeta = sys.zeta();
  const double g = sys.gamma;
  Eigen::VectorXd z(v.size());
  Eigen::VectorXd sum_z = Eigen::VectorXd::Zero(nh);
  for (int i = 0; i < sys.samples(); ++i) {
    seg(z, i, nh) = mass_solve(sys, seg(v, i, nh));
    sum_z += seg(z, i, nh);
  }
  Eigen::VectorXd out(v.size());
  for (int i = 0; i < sys.samples(); ++i)
    seg(out, i, nh) = seg(z, i, nh) / ((1.0 + g) * zeta[i]) + (g / (1.0 + g)) * sum_z;
  return out;
}

Eigen::VectorXd apply_block_A(const SaddleSystem& sys, const Eigen::VectorXd& v) {
  require_stacked(sys, v, "apply_block_A");
  const int nh = sys.state_dim();
  Eigen::VectorXd out(v.size());
  for (int i = 0; i < sys.samples(); ++i)
    seg(out, i, nh) = sys.zeta()[i] * (sys.A_samples[i] * seg(v, i, nh));
  return out;
}

Eigen::VectorXd solve_block_A(const SaddleSystem& sys, const Eigen::VectorXd& v) {
  require_stacked(sys, v, "solve_block_A");
  const int nh = sys.state_dim();
  Eigen::VectorXd out(v.size());
  for (int i = 0; i < sys.samples(); ++i)
    seg(out, i, nh) = sample_solve(sys, i, seg(v, i, nh)) / sys.zeta()[i];
  return out;
}

Eigen::VectorXd apply_schur(const SaddleSystem& sys, const Eigen::VectorXd& v) {
  if (sys.control_space != ControlSpace::L2)
    throw Error("apply_schur: Schur complement is defined for L2 control");
  require_stacked(sys, v, "apply_schur");
  const int nh = sys.state_dim();
  const Eigen::VectorXd& zeta = sys.zeta();
  Eigen::VectorXd out = apply_block_A(sys, apply_gamma_mass_inv(sys, apply_block_A(sys, v)));
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(nh);
  for (int i = 0; i < sys.samples(); ++i) mean += zeta[i] * seg(v, i, nh);
  const Eigen::VectorXd coupling = sys.M_s * mean / sys.beta;
  for (int i = 0; i < sys.samples(); ++i) seg(out, i, nh) += zeta[i] * coupling;
  return out;
}

Eigen::VectorXd to_flat(const BlockVector& v) {
  Eigen::VectorXd flat(v.y.size() + v.u.size() + v.p.size());
  flat << v.y, v.u, v.p;
  return flat;
}

BlockVector from_flat(const SaddleSystem& sys, const Eigen::VectorXd& v) {
  const Eigen::Index ns = static_cast<Eigen::Index>(sys.samples()) * sys.state_dim();
  if (v.size() != 2 * ns + sys.state_dim())
    throw DimensionMismatch("from_flat: vector does not match the system layout");
  BlockVector out;
  out.y = v.segment(0, ns);
  out.u = v.segment(ns, sys.state_dim());
  out.p = v.segment(ns + sys.state_dim(), ns);
  return out;
}

ReducedSystem make_reduced(const SaddleSystem& sys) {
  if (sys.control_space != ControlSpace::H1)
    throw Error("make_reduced: the state-sized reduction is defined for H1 control");
  if (sys.inner.mode != InnerSolveMode::Direct)
    throw ConfigError("make_reduced: the reduction needs exact per-sample solves");
  ReducedSystem red;
  red.sys = &sys;
  return red;
}

Eigen::VectorXd apply_reduced(const ReducedSystem& red, const Eigen::VectorXd& v) {
  const SaddleSystem& sys = *red.sys;
  const int nh = red.block_dim();
  if (v.size() != 3 * nh)
    throw DimensionMismatch("apply_reduced: expected three state-sized blocks");
  const int n = sys.samples();
  const Eigen::VectorXd& zeta = sys.zeta();
  const double g = sys.gamma;

  // Lift through E = blockdiag(A^-1 Z1 K, I, A^-1 Z1 K): per sample the
  // weighted inverse cancels the weight, leaving A_i^-1 K.
  const Eigen::VectorXd Ky = sys.K * v.segment(0, nh);
  const Eigen::VectorXd u = v.segment(nh, nh);
  const Eigen::VectorXd Kp = sys.K * v.segment(2 * nh, nh);
  Eigen::MatrixXd w_y(nh, n), w_p(nh, n);
  Eigen::VectorXd mean_wy = Eigen::VectorXd::Zero(nh);
  Eigen::VectorXd mean_wp = Eigen::VectorXd::Zero(nh);
  for (int i = 0; i < n; ++i) {
    w_y.col(i) = sample_solve(sys, i, Ky);
    w_p.col(i) = sample_solve(sys, i, Kp);
    mean_wy += zeta[i] * w_y.col(i);
    mean_wp += zeta[i] * w_p.col(i);
  }

  // Middle operator is the full system with the H1 Riesz map.
  const Eigen::VectorXd Ku = sys.K * u;
  Eigen::VectorXd out(3 * nh);
  Eigen::VectorXd acc_y = Eigen::VectorXd::Zero(nh);
  Eigen::VectorXd acc_p = Eigen::VectorXd::Zero(nh);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd y_i =
        sys.M_s * (zeta[i] * ((1.0 + g) * w_y.col(i) - g * mean_wy)) +
        zeta[i] * (sys.A_samples[i] * w_p.col(i));
    const Eigen::VectorXd p_i = zeta[i] * (sys.A_samples[i] * w_y.col(i)) - zeta[i] * Ku;
    // Project back through E': K 1'Z A^-1 collapses each block to A_i^-1.
    acc_y += sample_solve(sys, i, y_i);
    acc_p += sample_solve(sys, i, p_i);
  }
  out.segment(0, nh) = sys.K * acc_y;
  out.segment(nh, nh) = sys.beta * Ku - sys.K * mean_wp;
  out.segment(2 * nh, nh) = sys.K * acc_p;
  return out;
}

Eigen::VectorXd reduced_rhs(const ReducedSystem& red) {
  const SaddleSystem& sys = *red.sys;
  const int nh = red.block_dim();
  Eigen::VectorXd acc_y = Eigen::VectorXd::Zero(nh);
  Eigen::VectorXd acc_p = Eigen::VectorXd::Zero(nh);
  for (int i = 0; i < sys.samples(); ++i) {
    acc_y += sample_solve(sys, i, seg(sys.rhs.y, i, nh));
    acc_p += sample_solve(sys, i, seg(sys.rhs.p, i, nh));
  }
  Eigen::VectorXd out(3 * nh);
  out.segment(0, nh) = sys.K * acc_y;
  out.segment(nh, nh) = sys.rhs.u;
  out.segment(2 * nh, nh) = sys.K * acc_p;
  return out;
}

Eigen::VectorXd sample_solve(const SaddleSystem& sys, int i, const Eigen::VectorXd& rhs) {
  if (i < 0 || i >= sys.samples()) throw DimensionMismatch("sample_solve: sample index out of range");
  if (rhs.size() != sys.state_dim())
    throw DimensionMismatch("sample_solve: vector is not state-sized");
  const SparseMat& A = sys.A_samples[i];
  if (sys.inner.mode == InnerSolveMode::PCG) {
    const Eigen::VectorXd inv_diag = A.diagonal().cwiseInverse();
    auto [x, rep] = cg([&A](const Eigen::VectorXd& v) -> Eigen::VectorXd { return A * v; },
                       [&inv_diag](const Eigen::VectorXd& v) -> Eigen::VectorXd {
                         return inv_diag.cwiseProduct(v);
                       },
                       rhs, sys.inner.tol, sys.inner.maxit);
    if (!rep.converged)
      throw InnerSolveFailure("sample_solve: PCG stalled at relative residual " +
                              std::to_string(rep.final_residual) + " for sample " +
                              std::to_string(i));
    return x;
  }
  Eigen::VectorXd x = sys.A_solvers[i]->solve(rhs);
  const double scale = rhs.norm();
  if (scale == 0.0) return x;
  double res = (A * x - rhs).norm() / scale;
  if (res > 1e-11) {
    // One step of iterative refinement rescues ill-conditioned samples.
    x += sys.A_solvers[i]->solve(rhs - A * x);
    res = (A * x - rhs).norm() / scale;
    if (res > 1e-11)
      throw InnerSolveFailure("sample_solve: relative residual " + std::to_string(res) +
                              " exceeds 1e-11 for sample " + std::to_string(i));
  }
  return x;
}

}  // namespace rocp
