// SPDX-License-Identifier: Apache-2.0
//
// Coefficient random fields on the unit square. Two models are supported:
//   Bounded:   a(x, xi) = 1 + exp(s2 * (xi1 cos(1.1 pi x) + xi2 cos(1.2 pi x)
//                                + xi3 sin(1.3 pi y) + xi4 sin(1.4 pi y))),
//              xi uniform on [-1, 1]^4, so 1 < a <= 1 + exp(4 s2).
//   LogNormal: a(x, xi) = exp(sqrt(s2) * sum_j sqrt(lambda_j) b_j(x) xi_j),
//              xi standard normal, with (lambda_j, b_j) the leading
//              eigenpairs of the unit-variance Gaussian covariance kernel
//              exp(-||x - y||^2 / L^2).
// Fields are sampled at mesh vertices; the assembly interpolates linearly.

#pragma once

#include <iosfwd>

#include <Eigen/Dense>

#include "rocp/fem.hpp"

namespace rocp {

// Truncated expansion of the unit-variance covariance operator. Eigenvalues
// are descending; modes are columns, orthonormal in the full mass inner
// product, so sum_j lambda_j <= |D| = 1 and the captured-variance fraction
// is eigvals.sum().
struct KLBasis {
  Eigen::VectorXd eigvals;  // m_terms entries
  Eigen::MatrixXd modes;    // vertex_count x m_terms

  int terms() const { return static_cast<int>(eigvals.size()); }
};

// Galerkin/Nystrom discretization of the covariance operator on the mesh
// vertices (boundary included), mass-weighted: solves the generalized
// symmetric eigenproblem (M C M) b = lambda M b with C the kernel matrix.
// Throws TruncationTooLarge if m_terms exceeds the vertex count.
KLBasis kl_expansion(const StructuredMesh& mesh, double corr_len2, int m_terms);

void save_kl(const KLBasis& kl, std::ostream& os);
KLBasis load_kl(std::istream& is);

struct FieldModel {
  enum class Kind { Bounded, LogNormal };
  Kind kind = Kind::Bounded;
  double sigma2 = 0.0;
  KLBasis kl;  // LogNormal only

  static FieldModel bounded(double sigma2);
  static FieldModel log_normal(double sigma2, KLBasis kl);

  // Number of stochastic coordinates a sample must provide.
  int dim() const { return kind == Kind::Bounded ? 4 : kl.terms(); }
};

// Field values at every mesh vertex for one sample xi.
Eigen::VectorXd eval_field(const FieldModel& model, const StructuredMesh& mesh,
                           const Eigen::VectorXd& xi);

struct FieldExtremes {
  double a_min = 0.0;
  double a_max = 0.0;
};

// Extremes of a realized field; throws NonPositiveField if min <= 0, since a
// non-coercive sample invalidates every solve that would use it.
FieldExtremes field_extremes(const Eigen::VectorXd& values);

}  // namespace rocp
