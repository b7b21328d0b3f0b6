// SPDX-License-Identifier: Apache-2.0
//
// Piecewise-linear finite elements on a uniform triangulation of the unit
// square with homogeneous Dirichlet boundary conditions.

#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace rocp {

using SparseMat = Eigen::SparseMatrix<double>;

// Uniform n x n grid of squares, each split along the lower-left to
// upper-right diagonal. Vertices are ordered lexicographically by (y, x):
// vertex (ix, iy) has index iy*(n+1) + ix.
struct StructuredMesh {
  int n = 0;       // cells per side, n >= 2
  double h = 0.0;  // mesh width 1/n
  Eigen::Matrix<double, Eigen::Dynamic, 2> vertices;  // (n+1)^2 rows
  std::vector<std::array<int, 3>> triangles;          // 2*n^2 entries

  static StructuredMesh unit_square(int n);
  int vertex_count() const { return static_cast<int>(vertices.rows()); }
};

// Interior-dof view of a mesh: boundary vertices are eliminated and the
// remaining (n-1)^2 vertices keep their lexicographic (y, x) order.
struct FeSpace {
  StructuredMesh mesh;
  std::vector<int> dof_of_vertex;  // -1 on the boundary
  std::vector<int> vertex_of_dof;  // size (n-1)^2

  static FeSpace on(StructuredMesh mesh);
  int dim() const { return static_cast<int>(vertex_of_dof.size()); }
};

// Consistent mass matrix over interior dofs.
SparseMat assemble_mass(const FeSpace& space);

// Consistent mass matrix over all vertices, boundary included. Used by the
// covariance eigensolver, where boundary values matter.
SparseMat assemble_mass_full(const StructuredMesh& mesh);

// Stiffness matrix of -div(a grad u) with one-point (centroid) quadrature of
// the coefficient. Throws NonPositiveCoefficient if a <= 0 at any quadrature
// point.
SparseMat assemble_stiffness(const FeSpace& space,
                             const std::function<double(double, double)>& coeff);

// Same, with the coefficient given by values at all mesh vertices and
// interpolated linearly; the centroid value is the mean of the three vertex
// values of the triangle.
SparseMat assemble_stiffness(const FeSpace& space,
                             const Eigen::VectorXd& vertex_values);

// Unweighted Laplacian (coefficient identically 1).
SparseMat assemble_laplacian(const FeSpace& space);

// Evaluates a callable at every interior dof location, in dof order.
Eigen::VectorXd interpolate_at_dofs(const FeSpace& space,
                                    const std::function<double(double, double)>& f);

}  // namespace rocp
