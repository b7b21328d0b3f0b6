// SPDX-License-Identifier: Apache-2.0

#include "rocp/quadrature.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "rocp/errors.hpp"

namespace rocp {

namespace {

// Golub-Welsch: nodes are the eigenvalues of the symmetric tridiagonal
// Jacobi matrix built from the monic three-term recurrence; the weight of
// node j is mu_0 times the squared first component of its unit eigenvector.
// Both measures here are probability measures, so mu_0 = 1.
Rule1d golub_welsch(const Eigen::VectorXd& offdiag) {
  const int m = static_cast<int>(offdiag.size()) + 1;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
  for (int k = 0; k + 1 < m; ++k) {
    J(k, k + 1) = offdiag[k];
    J(k + 1, k) = offdiag[k];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Rule1d rule;
  rule.nodes = es.eigenvalues();
  rule.weights.resize(m);
  for (int j = 0; j < m; ++j) {
    const double q = es.eigenvectors()(0, j);
    rule.weights[j] = q * q;
  }
  return rule;
}

}  // namespace

Rule1d gauss_legendre_1d(int m) {
  if (m < 1) throw DimensionMismatch("gauss rule needs m >= 1");
  // Monic Legendre recurrence: b_k = k^2 / (4k^2 - 1).
  Eigen::VectorXd off(m - 1);
  for (int k = 1; k < m; ++k) off[k - 1] = std::sqrt(k * k / (4.0 * k * k - 1.0));
  return golub_welsch(off);
}

Rule1d gauss_hermite_1d(int m) {
  if (m < 1) throw DimensionMismatch("gauss rule needs m >= 1");
  // Monic probabilists' Hermite recurrence: b_k = k.
  Eigen::VectorXd off(m - 1);
  for (int k = 1; k < m; ++k) off[k - 1] = std::sqrt(static_cast<double>(k));
  return golub_welsch(off);
}

CollocationSet tensorize(const Rule1d& rule, int dims, long node_cap) {
  if (dims < 1) throw DimensionMismatch("tensor grid needs dims >= 1");
  const long m = rule.nodes.size();
  long total = 1;
  for (int d = 0; d < dims; ++d) {
    total *= m;
    if (total > node_cap)
      throw BudgetExceeded("tensor grid has " + std::to_string(m) + "^" + std::to_string(dims) +
                           " nodes, above the cap of " + std::to_string(node_cap));
  }
  CollocationSet set;
  set.nodes.resize(total, dims);
  set.weights.resize(total);
  std::vector<int> idx(dims, 0);
  for (long row = 0; row < total; ++row) {
    double w = 1.0;
    for (int d = 0; d < dims; ++d) {
      set.nodes(row, d) = rule.nodes[idx[d]];
      w *= rule.weights[idx[d]];
    }
    set.weights[row] = w;
    // Odometer: last dimension fastest.
    for (int d = dims - 1; d >= 0; --d) {
      if (++idx[d] < m) break;
      idx[d] = 0;
    }
  }
  set.provenance = "tensor(m=" + std::to_string(m) + ", dims=" + std::to_string(dims) + ")";
  return set;
}

CollocationSet monte_carlo(SampleDist dist, int dims, int count, std::uint64_t seed) {
  if (dims < 1 || count < 1) throw DimensionMismatch("monte carlo needs dims >= 1 and count >= 1");
  std::mt19937_64 rng(seed);
  auto uniform01 = [&rng]() {
    // 53-bit mantissa draw; identical on every conforming platform.
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  CollocationSet set;
  set.nodes.resize(count, dims);
  set.weights = Eigen::VectorXd::Constant(count, 1.0 / count);
  if (dist == SampleDist::Uniform) {
    for (int i = 0; i < count; ++i)
      for (int d = 0; d < dims; ++d) set.nodes(i, d) = 2.0 * uniform01() - 1.0;
    set.provenance = "monte_carlo(uniform";
  } else {
    // Box-Muller with a carried spare so the stream stays sequential.
    bool have_spare = false;
    double spare = 0.0;
    auto normal = [&]() {
      if (have_spare) {
        have_spare = false;
        return spare;
      }
      const double u1 = uniform01();
      const double u2 = uniform01();
      const double r = std::sqrt(-2.0 * std::log1p(-u1));  // log(1-u1), safe at u1 = 0
      const double z0 = r * std::cos(2.0 * M_PI * u2);
      spare = r * std::sin(2.0 * M_PI * u2);
      have_spare = true;
      return z0;
    };
    for (int i = 0; i < count; ++i)
      for (int d = 0; d < dims; ++d) set.nodes(i, d) = normal();
    set.provenance = "monte_carlo(normal";
  }
  set.provenance += ", count=" + std::to_string(count) + ", seed=" + std::to_string(seed) + ")";
  return set;
}

void dump_csv(const CollocationSet& set, std::ostream& os) {
  os << std::setprecision(17);
  for (int i = 0; i < set.count(); ++i) {
    os << set.weights[i];
    for (int d = 0; d < set.dim(); ++d) os << "," << set.nodes(i, d);
    os << "\n";
  }
}

}  // namespace rocp
