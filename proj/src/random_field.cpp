// SPDX-License-Identifier: Apache-2.0

#include "rocp/random_field.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <string>

#include <Eigen/Eigenvalues>

#include "rocp/errors.hpp"

namespace rocp {

KLBasis kl_expansion(const StructuredMesh& mesh, double corr_len2, int m_terms) {
  const int nv = mesh.vertex_count();
  if (m_terms < 1 || m_terms > nv)
    throw TruncationTooLarge("requested " + std::to_string(m_terms) + " modes on a mesh with " +
                             std::to_string(nv) + " vertices");
  if (!(corr_len2 > 0.0)) throw DimensionMismatch("correlation length squared must be positive");

  const Eigen::MatrixXd M = Eigen::MatrixXd(assemble_mass_full(mesh));
  Eigen::MatrixXd C(nv, nv);
  for (int i = 0; i < nv; ++i) {
    C(i, i) = 1.0;
    for (int j = 0; j < i; ++j) {
      const double dx = mesh.vertices(i, 0) - mesh.vertices(j, 0);
      const double dy = mesh.vertices(i, 1) - mesh.vertices(j, 1);
      C(i, j) = C(j, i) = std::exp(-(dx * dx + dy * dy) / corr_len2);
    }
  }
  // Galerkin projection of the integral operator with the kernel interpolated
  // bilinearly: (M C M) b = lambda M b. Eigenvectors come out M-orthonormal.
  const Eigen::MatrixXd G = M * C * M;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(G, M);
  if (es.info() != Eigen::Success) throw Error("covariance eigensolve failed");

  KLBasis kl;
  kl.eigvals.resize(m_terms);
  kl.modes.resize(nv, m_terms);
  // Eigen returns ascending order; keep the largest m_terms, descending.
  for (int j = 0; j < m_terms; ++j) {
    const int src = nv - 1 - j;
    kl.eigvals[j] = es.eigenvalues()[src];
    kl.modes.col(j) = es.eigenvectors().col(src);
  }
  return kl;
}

void save_kl(const KLBasis& kl, std::ostream& os) {
  os << kl.terms() << " " << kl.modes.rows() << "\n";
  os << std::setprecision(17);
  for (int j = 0; j < kl.terms(); ++j) os << (j ? " " : "") << kl.eigvals[j];
  os << "\n";
  for (int j = 0; j < kl.terms(); ++j) {
    for (Eigen::Index i = 0; i < kl.modes.rows(); ++i) os << (i ? " " : "") << kl.modes(i, j);
    os << "\n";
  }
}

KLBasis load_kl(std::istream& is) {
  int terms = 0;
  Eigen::Index nv = 0;
  if (!(is >> terms >> nv) || terms < 1 || nv < 1)
    throw Error("malformed expansion header");
  KLBasis kl;
  kl.eigvals.resize(terms);
  kl.modes.resize(nv, terms);
  for (int j = 0; j < terms; ++j)
    if (!(is >> kl.eigvals[j])) throw Error("expansion eigenvalues truncated");
  for (int j = 0; j < terms; ++j)
    for (Eigen::Index i = 0; i < nv; ++i)
      if (!(is >> kl.modes(i, j))) throw Error("expansion modes truncated");
  return kl;
}

FieldModel FieldModel::bounded(double sigma2) {
  FieldModel m;
  m.kind = Kind::Bounded;
  m.sigma2 = sigma2;
  return m;
}

FieldModel FieldModel::log_normal(double sigma2, KLBasis kl) {
  FieldModel m;
  m.kind = Kind::LogNormal;
  m.sigma2 = sigma2;
  m.kl = std::move(kl);
  return m;
}

Eigen::VectorXd eval_field(const FieldModel& model, const StructuredMesh& mesh,
                           const Eigen::VectorXd& xi) {
  if (xi.size() != model.dim())
    throw DimensionMismatch("sample has " + std::to_string(xi.size()) + " coordinates, field needs " +
                            std::to_string(model.dim()));
  const int nv = mesh.vertex_count();
  Eigen::VectorXd a(nv);
  if (model.kind == FieldModel::Kind::Bounded) {
    for (int v = 0; v < nv; ++v) {
      const double x = mesh.vertices(v, 0), y = mesh.vertices(v, 1);
      const double g = xi[0] * std::cos(1.1 * M_PI * x) + xi[1] * std::cos(1.2 * M_PI * x) +
                       xi[2] * std::sin(1.3 * M_PI * y) + xi[3] * std::sin(1.4 * M_PI * y);
      a[v] = 1.0 + std::exp(model.sigma2 * g);
    }
  } else {
    if (model.kl.modes.rows() != nv)
      throw DimensionMismatch("expansion was built on a mesh with " +
                              std::to_string(model.kl.modes.rows()) + " vertices, not " +
                              std::to_string(nv));
    const double sigma = std::sqrt(model.sigma2);
    Eigen::VectorXd coef(model.dim());
    for (int j = 0; j < model.dim(); ++j)
      coef[j] = sigma * std::sqrt(std::max(0.0, model.kl.eigvals[j])) * xi[j];
    const Eigen::VectorXd g = model.kl.modes * coef;
    a = g.array().exp();
  }
  return a;
}

FieldExtremes field_extremes(const Eigen::VectorXd& values) {
  if (values.size() == 0) throw DimensionMismatch("empty field");
  FieldExtremes e;
  e.a_min = values.minCoeff();
  e.a_max = values.maxCoeff();
  if (!(e.a_min > 0.0))
    throw NonPositiveField("field minimum is " + std::to_string(e.a_min));
  return e;
}

}  // namespace rocp
