// SPDX-License-Identifier: Apache-2.0

#include "rocp/krylov.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "rocp/errors.hpp"

namespace rocp {

namespace {

Eigen::VectorXd apply_pre(const LinOp& pre, const Eigen::VectorXd& v) {
  return pre ? pre(v) : v;
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

// Seeded start vector: all ones plus a small perturbation so symmetric
// test problems cannot hide an eigendirection orthogonal to the seed.
Eigen::VectorXd perturbed_ones(int dim, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = 1.0 + scale * unif(rng);
  return v;
}

}  // namespace

std::pair<Eigen::VectorXd, SolveReport> minres(const LinOp& op, const LinOp& pre,
                                               const Eigen::VectorXd& b, double tol, int maxit) {
  const double t0 = now_seconds();
  const int n = static_cast<int>(b.size());
  SolveReport rep;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    rep.converged = true;
    rep.seconds = now_seconds() - t0;
    return {x, rep};
  }

  // Lanczos state in the P^-1 inner product. v spans the unpreconditioned
  // residual space, z = P^-1 v the preconditioned one.
  Eigen::VectorXd v = b;
  Eigen::VectorXd z = apply_pre(pre, v);
  double beta_sq = v.dot(z);
  if (!(beta_sq > 0.0)) throw Error("minres: preconditioner is not positive definite");
  double beta = std::sqrt(beta_sq);

  Eigen::VectorXd v_hat = v / beta;
  Eigen::VectorXd z_hat = z / beta;
  Eigen::VectorXd v_hat_prev = Eigen::VectorXd::Zero(n);

  // QR of the tridiagonal via two lagged Givens rotations.
  double c_km1 = 1.0, s_km1 = 0.0;
  double c_km2 = 1.0, s_km2 = 0.0;
  double beta_col = 0.0;    // superdiagonal entry T(k-1,k) entering column k
  double phi_bar = beta;    // P^-1-norm of the running residual

  Eigen::VectorXd d_prev = Eigen::VectorXd::Zero(n), d_prev2 = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd g_prev = Eigen::VectorXd::Zero(n), g_prev2 = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r_true = b;

  const double tiny = 1e-14 * bnorm;
  for (int k = 1; k <= maxit; ++k) {
    Eigen::VectorXd w_raw = op(z_hat);
    const double alpha = z_hat.dot(w_raw);
    Eigen::VectorXd w = w_raw - alpha * v_hat - beta_col * v_hat_prev;
    Eigen::VectorXd z_new = apply_pre(pre, w);
    double beta_next_sq = w.dot(z_new);
    if (beta_next_sq < 0.0) throw Error("minres: preconditioner is not positive definite");
    double beta_next = std::sqrt(std::max(beta_next_sq, 0.0));

    // Rotate column k of the tridiagonal: entries (beta_col, alpha, beta_next).
    const double eps_k = s_km2 * beta_col;
    const double delta = c_km2 * beta_col;
    const double delta_p = c_km1 * delta + s_km1 * alpha;
    const double alpha_bar = -s_km1 * delta + c_km1 * alpha;
    const double rho = std::hypot(alpha_bar, beta_next);
    if (rho == 0.0) break;  // operator annihilated the space; residual already settled
    const double c_k = alpha_bar / rho;
    const double s_k = beta_next / rho;
    const double tau = c_k * phi_bar;
    phi_bar = -s_k * phi_bar;

    Eigen::VectorXd d_k = (z_hat - delta_p * d_prev - eps_k * d_prev2) / rho;
    Eigen::VectorXd g_k = (w_raw - delta_p * g_prev - eps_k * g_prev2) / rho;
    x += tau * d_k;
    if (k % 10 == 0) {
      r_true = b - op(x);
    } else {
      r_true -= tau * g_k;
    }
    const double res = r_true.norm() / bnorm;
    rep.residuals.push_back(res);
    rep.iterations = k;
    rep.final_residual = res;
    if (res <= tol) {
      rep.converged = true;
      break;
    }
    if (beta_next <= tiny) {
      // Invariant subspace reached: the Krylov space cannot grow, so the
      // current iterate is as good as this cycle gets.
      r_true = b - op(x);
      rep.final_residual = r_true.norm() / bnorm;
      rep.residuals.back() = rep.final_residual;
      rep.converged = rep.final_residual <= tol;
      break;
    }

    v_hat_prev = v_hat;
    v_hat = w / beta_next;
    z_hat = z_new / beta_next;
    beta_col = beta_next;
    d_prev2.swap(d_prev);
    d_prev = d_k;
    g_prev2.swap(g_prev);
    g_prev = g_k;
    c_km2 = c_km1;
    s_km2 = s_km1;
    c_km1 = c_k;
    s_km1 = s_k;
  }
  rep.seconds = now_seconds() - t0;
  return {x, rep};
}

std::pair<Eigen::VectorXd, SolveReport> cg(const LinOp& op, const LinOp& pre,
                                           const Eigen::VectorXd& b, double tol, int maxit) {
  const double t0 = now_seconds();
  const int n = static_cast<int>(b.size());
  SolveReport rep;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    rep.converged = true;
    rep.seconds = now_seconds() - t0;
    return {x, rep};
  }
  Eigen::VectorXd r = b;
  Eigen::VectorXd z = apply_pre(pre, r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  for (int k = 1; k <= maxit; ++k) {
    Eigen::VectorXd q = op(p);
    const double pq = p.dot(q);
    if (!(pq > 0.0)) throw Error("cg: operator is not positive definite");
    const double alpha = rz / pq;
    x += alpha * p;
    r -= alpha * q;
    const double res = r.norm() / bnorm;
    rep.residuals.push_back(res);
    rep.iterations = k;
    rep.final_residual = res;
    if (res <= tol) {
      rep.converged = true;
      break;
    }
    z = apply_pre(pre, r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  rep.seconds = now_seconds() - t0;
  return {x, rep};
}

ChebParams make_cheb_params(double lambda_max, int k_it) {
  if (!(lambda_max > 0.0)) throw Error("chebyshev: nonpositive lambda_max estimate");
  ChebParams p;
  p.alpha = 1.0 / (1.0 + lambda_max);
  p.t_lo = 1.0 - p.alpha * lambda_max;
  p.t_hi = 1.0 - p.alpha;
  p.k_it = k_it;
  return p;
}

Eigen::VectorXd chebyshev_semi_iteration(const LinOp& op, const LinOp& pre,
                                         const Eigen::VectorXd& rhs, const ChebParams& params) {
  if (params.k_it < 1) throw Error("chebyshev: step count must be positive");
  if (!(params.t_lo <= params.t_hi && params.t_hi < 1.0 && params.t_lo > -1.0))
    throw Error("chebyshev: iteration-matrix interval must sit inside (-1, 1)");
  // Chebyshev acceleration of v <- v + (alpha P^-1)(rhs - B v) from v = 0.
  // With T = I - alpha P^-1 B in [t_lo, t_hi], the operator Atil = alpha P^-1 B
  // has spectrum in [1 - t_hi, 1 - t_lo], a positive interval.
  const double lo = 1.0 - params.t_hi;
  const double hi = 1.0 - params.t_lo;
  const double theta = 0.5 * (hi + lo);
  const double delta = 0.5 * (hi - lo);
  auto atil = [&](const Eigen::VectorXd& u) -> Eigen::VectorXd {
    return params.alpha * apply_pre(pre, op(u));
  };

  Eigen::VectorXd r = params.alpha * apply_pre(pre, rhs);  // residual at v = 0
  Eigen::VectorXd v = Eigen::VectorXd::Zero(rhs.size());
  Eigen::VectorXd d = r / theta;
  if (delta == 0.0) {
    // Single-point spectrum: one step is exact.
    return v + d;
  }
  const double sigma1 = theta / delta;
  double rho = 1.0 / sigma1;
  for (int k = 1; k <= params.k_it; ++k) {
    v += d;
    if (k == params.k_it) break;  // final residual update would be wasted work
    r -= atil(d);
    const double rho_new = 1.0 / (2.0 * sigma1 - rho);
    d = (rho_new * rho) * d + (2.0 * rho_new / delta) * r;
    rho = rho_new;
  }
  return v;
}

double estimate_lambda_max(const LinOp& op, const LinOp& pre, int dim, int iters,
                           std::uint64_t seed) {
  if (iters < 1) throw Error("power method: iteration count must be positive");
  Eigen::VectorXd v = perturbed_ones(dim, seed, 1e-3);
  v /= v.norm();
  double lambda = 1.0;
  for (int k = 0; k < iters; ++k) {
    Eigen::VectorXd w = apply_pre(pre, op(v));
    lambda = v.dot(w);
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;
    v = w / wn;
  }
  return lambda;
}

SpectrumReport dense_spectrum(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                              DensePath path, int size_cap) {
  if (A.rows() != A.cols()) throw DimensionMismatch("dense_spectrum: matrix must be square");
  if (A.rows() > size_cap)
    throw SizeCapExceeded("dense_spectrum: dimension " + std::to_string(A.rows()) +
                          " exceeds cap " + std::to_string(size_cap));
  const bool have_b = B.size() > 0;
  if (have_b && (B.rows() != A.rows() || B.cols() != A.cols()))
    throw DimensionMismatch("dense_spectrum: operator and metric dimensions differ");

  SpectrumReport rep;
  bool symmetric = false;
  if (path == DensePath::SymmetricDefinite) {
    symmetric = true;
  } else if (path == DensePath::Auto) {
    const double scale = A.cwiseAbs().maxCoeff() + (have_b ? B.cwiseAbs().maxCoeff() : 0.0);
    symmetric = (A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
    if (have_b && symmetric) {
      symmetric = (B - B.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
      if (symmetric) {
        Eigen::LLT<Eigen::MatrixXd> llt(B);
        symmetric = llt.info() == Eigen::Success;
      }
    }
  }

  Eigen::VectorXd vals;
  if (symmetric) {
    if (have_b) {
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B);
      if (es.info() != Eigen::Success) throw Error("dense_spectrum: generalized solver failed");
      vals = es.eigenvalues();
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
      if (es.info() != Eigen::Success) throw Error("dense_spectrum: symmetric solver failed");
      vals = es.eigenvalues();
    }
  } else {
    Eigen::MatrixXd C = A;
    if (have_b) C = B.partialPivLu().solve(A);
    Eigen::EigenSolver<Eigen::MatrixXd> es(C);
    if (es.info() != Eigen::Success) throw Error("dense_spectrum: general solver failed");
    vals = es.eigenvalues().real();
    rep.max_imag = es.eigenvalues().imag().cwiseAbs().maxCoeff();
  }
  rep.spectrum.assign(vals.data(), vals.data() + vals.size());
  std::sort(rep.spectrum.begin(), rep.spectrum.end());
  rep.lambda_min = rep.spectrum.front();
  rep.lambda_max = rep.spectrum.back();
  for (double l : rep.spectrum)
    if (std::abs(l - 1.0) <= 1e-8) ++rep.mult_one;
  return rep;
}

SpectrumReport lanczos_extremal(const LinOp& op, const LinOp& ip, int dim, int iters,
                                std::uint64_t seed) {
  if (iters < 1) throw Error("lanczos: iteration count must be positive");
  iters = std::min(iters, dim);
  auto apply_ip = [&](const Eigen::VectorXd& u) { return ip ? ip(u) : u; };

  SpectrumReport rep;
  Eigen::MatrixXd Q(dim, iters);        // ip-orthonormal basis
  Eigen::MatrixXd BQ(dim, iters);       // ip applied to the basis columns
  Eigen::VectorXd alpha(iters), beta(iters);

  Eigen::VectorXd w = perturbed_ones(dim, seed, 1e-3);
  Eigen::VectorXd bw = apply_ip(w);
  double nrm = std::sqrt(w.dot(bw));
  if (!(nrm > 0.0)) throw Error("lanczos: inner product is not positive definite");
  Q.col(0) = w / nrm;
  BQ.col(0) = bw / nrm;

  int m = 0;  // completed columns of the tridiagonal
  for (int j = 0; j < iters; ++j) {
    w = op(Q.col(j));
    alpha[j] = BQ.col(j).dot(w);
    w -= alpha[j] * Q.col(j);
    if (j > 0) w -= beta[j - 1] * Q.col(j - 1);
    // Full reorthogonalization against every stored basis vector.
    for (int i = 0; i <= j; ++i) w -= BQ.col(i).dot(w) * Q.col(i);
    m = j + 1;
    if (j + 1 == iters) break;
    bw = apply_ip(w);
    const double bsq = w.dot(bw);
    if (bsq < 0.0) throw Error("lanczos: inner product is not positive definite");
    beta[j] = std::sqrt(std::max(bsq, 0.0));
    if (beta[j] <= 1e-13 * std::abs(alpha.head(m).cwiseAbs().maxCoeff())) {
      rep.breakdown = true;  // invariant subspace: Ritz values are exact on it
      break;
    }
    Q.col(j + 1) = w / beta[j];
    BQ.col(j + 1) = bw / beta[j];
  }

  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
  for (int j = 0; j < m; ++j) {
    T(j, j) = alpha[j];
    if (j + 1 < m) {
      T(j, j + 1) = beta[j];
      T(j + 1, j) = beta[j];
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  if (es.info() != Eigen::Success) throw Error("lanczos: tridiagonal solver failed");
  const Eigen::VectorXd vals = es.eigenvalues();
  rep.spectrum.assign(vals.data(), vals.data() + vals.size());
  rep.lambda_min = rep.spectrum.front();
  rep.lambda_max = rep.spectrum.back();
  for (double l : rep.spectrum)
    if (std::abs(l - 1.0) <= 1e-8) ++rep.mult_one;
  return rep;
}

Eigen::VectorXd reduced_spectrum(const SaddleSystem& sys, int size_cap) {
  const int nh = sys.state_dim();
  if (nh > size_cap)
    throw SizeCapExceeded("reduced_spectrum: dimension " + std::to_string(nh) +
                          " exceeds cap " + std::to_string(size_cap));
  // Symmetrize through the mass square root: with S_i = Ms^1/2 A_i^-1 Ms^1/2
  // every K_i = A_i^-1 Ms is similar to the symmetric S_i, and
  //   R = (1+gamma) E[K^2] - gamma E[K]^2
  // is similar to (1+gamma) E[S^2] - gamma E[S]^2, which is symmetric.
  Eigen::MatrixXd M_dense = Eigen::MatrixXd(sys.M_s);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> mes(M_dense);
  if (mes.info() != Eigen::Success) throw Error("reduced_spectrum: mass eigensolver failed");
  if (mes.eigenvalues().minCoeff() <= 0.0)
    throw Error("reduced_spectrum: mass matrix is not positive definite");
  Eigen::MatrixXd M_half = mes.eigenvectors() *
                           mes.eigenvalues().cwiseSqrt().asDiagonal() *
                           mes.eigenvectors().transpose();

  Eigen::MatrixXd ES = Eigen::MatrixXd::Zero(nh, nh);
  Eigen::MatrixXd ES2 = Eigen::MatrixXd::Zero(nh, nh);
  const Eigen::VectorXd& zeta = sys.zeta();
  for (int i = 0; i < sys.samples(); ++i) {
    Eigen::MatrixXd X(nh, nh);
    for (int c = 0; c < nh; ++c) X.col(c) = sample_solve(sys, i, M_half.col(c));
    Eigen::MatrixXd S_i = M_half * X;
    S_i = 0.5 * (S_i + S_i.transpose());
    ES += zeta[i] * S_i;
    ES2 += zeta[i] * (S_i * S_i);
  }
  const double gamma = sys.gamma;
  Eigen::MatrixXd R = (1.0 + gamma) * ES2 - gamma * (ES * ES);
  R = 0.5 * (R + R.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R);
  if (es.info() != Eigen::Success) throw Error("reduced_spectrum: eigensolver failed");
  return es.eigenvalues();
}

}  // namespace rocp
