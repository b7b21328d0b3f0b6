// SPDX-License-Identifier: Apache-2.0
//
// Shared test fixtures: small assembled systems and dense compositions of
// their blocks, built by literal placement so they are independent of the
// matrix-free apply routines under test.

#pragma once

#include "oracle_utils.hpp"
#include "rocp/saddle.hpp"

namespace fixtures {

struct DenseBlocks {
  Eigen::MatrixXd S;   // full saddle matrix in [y; u; p] layout
  Eigen::MatrixXd G;   // gamma-weighted mass
  Eigen::MatrixXd Ad;  // blockdiag(zeta_i A_i)
  Eigen::MatrixXd C;   // Z 1 L, tall ns x nh
};

inline DenseBlocks dense_blocks(const rocp::SaddleSystem& sys) {
  const int nh = sys.state_dim();
  const int n = sys.samples();
  const int ns = n * nh;
  const Eigen::MatrixXd Md(sys.M_s);
  const Eigen::MatrixXd L(sys.control_riesz());
  const Eigen::VectorXd& z = sys.zeta();
  const double g = sys.gamma;

  DenseBlocks d;
  d.G = Eigen::MatrixXd::Zero(ns, ns);
  d.Ad = Eigen::MatrixXd::Zero(ns, ns);
  d.C = Eigen::MatrixXd::Zero(ns, nh);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double w = (i == j ? (1.0 + g) * z[i] : 0.0) - g * z[i] * z[j];
      d.G.block(i * nh, j * nh, nh, nh) = w * Md;
    }
    d.Ad.block(i * nh, i * nh, nh, nh) = z[i] * Eigen::MatrixXd(sys.A_samples[i]);
    d.C.block(i * nh, 0, nh, nh) = z[i] * L;
  }
  d.S = Eigen::MatrixXd::Zero(2 * ns + nh, 2 * ns + nh);
  d.S.block(0, 0, ns, ns) = d.G;
  d.S.block(0, ns + nh, ns, ns) = d.Ad;
  d.S.block(ns, ns, nh, nh) = sys.beta * L;
  d.S.block(ns, ns + nh, nh, ns) = -d.C.transpose();
  d.S.block(ns + nh, 0, ns, ns) = d.Ad;
  d.S.block(ns + nh, ns, ns, nh) = -d.C;
  return d;
}

inline Eigen::MatrixXd densify_saddle(const rocp::SaddleSystem& sys) {
  return oracle::densify(
      [&](const Eigen::VectorXd& f) {
        return rocp::to_flat(rocp::apply_saddle(sys, rocp::from_flat(sys, f)));
      },
      sys.total_dim());
}

inline rocp::SaddleSystem small_system(rocp::FieldModel::Kind kind, rocp::ControlSpace cs,
                                       double beta, double gamma,
                                       rocp::MassSolveMode mode = rocp::MassSolveMode::Direct,
                                       int mesh_n = 4,
                                       rocp::InnerSolverParams inner = {}) {
  using namespace rocp;
  auto space = FeSpace::on(StructuredMesh::unit_square(mesh_n));
  SystemParams params;
  params.beta = beta;
  params.gamma = gamma;
  params.control_space = cs;
  params.mass_mode = mode;
  params.inner = inner;
  if (kind == FieldModel::Kind::Bounded) {
    auto model = FieldModel::bounded(0.5);
    auto colloc = tensorize(gauss_legendre_1d(2), 4);
    return assemble_system(std::move(space), model, std::move(colloc), params);
  }
  auto kl = kl_expansion(space.mesh, 0.5, 3);
  auto model = FieldModel::log_normal(0.5, std::move(kl));
  auto colloc = tensorize(gauss_hermite_1d(2), 3);
  return assemble_system(std::move(space), model, std::move(colloc), params);
}

}  // namespace fixtures
