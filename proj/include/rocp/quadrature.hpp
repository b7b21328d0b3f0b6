// SPDX-License-Identifier: Apache-2.0
//
// Collocation rules in probability form: weights are positive and sum to 1,
// so weighted sums are expectations. One-dimensional Gauss rules come from
// the Golub-Welsch eigenproblem of the Jacobi matrix; multi-dimensional sets
// are full tensor grids or Monte Carlo draws from a pinned generator.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include <Eigen/Dense>

namespace rocp {

struct CollocationSet {
  Eigen::MatrixXd nodes;    // count x dim
  Eigen::VectorXd weights;  // count entries, positive, summing to 1
  std::string provenance;   // human-readable description of the source

  int count() const { return static_cast<int>(nodes.rows()); }
  int dim() const { return static_cast<int>(nodes.cols()); }
};

struct Rule1d {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

// Gauss rule for the uniform distribution on [-1, 1]. Exact for polynomials
// through degree 2m-1.
Rule1d gauss_legendre_1d(int m);

// Gauss rule for the standard normal distribution. Exact for polynomials
// through degree 2m-1.
Rule1d gauss_hermite_1d(int m);

// Full tensor grid over `dims` dimensions; throws BudgetExceeded when the
// node count m^dims would exceed node_cap. Rows are ordered with the last
// dimension varying fastest.
CollocationSet tensorize(const Rule1d& rule, int dims, long node_cap = 1000000);

enum class SampleDist { Uniform, Normal };

// Seeded Monte Carlo set with equal weights 1/count. The generator is
// std::mt19937_64; uniforms in [0, 1) are (x >> 11) * 2^-53, mapped to
// [-1, 1) for Uniform mode; Normal mode applies Box-Muller to uniform
// pairs. The stream is consumed sample by sample, dimensions in order, so
// results are reproducible bit for bit across platforms.
CollocationSet monte_carlo(SampleDist dist, int dims, int count, std::uint64_t seed);

// CSV dump, one row per node: weight, then the node components.
void dump_csv(const CollocationSet& set, std::ostream& os);

}  // namespace rocp
