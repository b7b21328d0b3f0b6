// SPDX-License-Identifier: Apache-2.0

#include "rocp/fem.hpp"

#include <cmath>
#include <string>

#include "rocp/errors.hpp"

namespace rocp {

StructuredMesh StructuredMesh::unit_square(int n) {
  if (n < 2) throw DimensionMismatch("mesh subdivision must satisfy n >= 2, got " + std::to_string(n));
  StructuredMesh mesh;
  mesh.n = n;
  mesh.h = 1.0 / n;
  const int side = n + 1;
  mesh.vertices.resize(side * side, 2);
  for (int iy = 0; iy < side; ++iy)
    for (int ix = 0; ix < side; ++ix) {
      const int v = iy * side + ix;
      mesh.vertices(v, 0) = ix * mesh.h;
      mesh.vertices(v, 1) = iy * mesh.h;
    }
  mesh.triangles.reserve(2 * n * n);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const int v00 = iy * side + ix;
      const int v10 = v00 + 1;
      const int v01 = v00 + side;
      const int v11 = v01 + 1;
      // Both triangles share the lower-left to upper-right diagonal.
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
    }
  return mesh;
}

FeSpace FeSpace::on(StructuredMesh mesh) {
  FeSpace space;
  const int n = mesh.n;
  const int side = n + 1;
  space.dof_of_vertex.assign(side * side, -1);
  space.vertex_of_dof.reserve((n - 1) * (n - 1));
  for (int iy = 1; iy < n; ++iy)
    for (int ix = 1; ix < n; ++ix) {
      const int v = iy * side + ix;
      space.dof_of_vertex[v] = static_cast<int>(space.vertex_of_dof.size());
      space.vertex_of_dof.push_back(v);
    }
  space.mesh = std::move(mesh);
  return space;
}

namespace {

// Constant P1 gradients on a triangle, as columns of a 2x3 matrix.
Eigen::Matrix<double, 2, 3> p1_gradients(const StructuredMesh& mesh,
                                         const std::array<int, 3>& tri,
                                         double& area) {
  const Eigen::Vector2d p0 = mesh.vertices.row(tri[0]);
  const Eigen::Vector2d p1 = mesh.vertices.row(tri[1]);
  const Eigen::Vector2d p2 = mesh.vertices.row(tri[2]);
  Eigen::Matrix2d edges;
  edges.col(0) = p1 - p0;
  edges.col(1) = p2 - p0;
  const double det = edges(0, 0) * edges(1, 1) - edges(0, 1) * edges(1, 0);
  area = 0.5 * std::abs(det);
  Eigen::Matrix<double, 2, 3> ref;
  ref << -1, 1, 0,
         -1, 0, 1;
  return edges.transpose().inverse() * ref;
}

template <class CentroidCoeff>
SparseMat assemble_stiffness_impl(const FeSpace& space, CentroidCoeff&& coeff_at) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(space.mesh.triangles.size() * 9);
  for (std::size_t t = 0; t < space.mesh.triangles.size(); ++t) {
    const auto& tri = space.mesh.triangles[t];
    double area = 0.0;
    const auto grads = p1_gradients(space.mesh, tri, area);
    const double a = coeff_at(t, tri);
    if (!(a > 0.0))
      throw NonPositiveCoefficient("coefficient is " + std::to_string(a) +
                                   " at the quadrature point of triangle " + std::to_string(t));
    const Eigen::Matrix3d local = a * area * grads.transpose() * grads;
    for (int i = 0; i < 3; ++i) {
      const int di = space.dof_of_vertex[tri[i]];
      if (di < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const int dj = space.dof_of_vertex[tri[j]];
        if (dj < 0) continue;
        trip.emplace_back(di, dj, local(i, j));
      }
    }
  }
  SparseMat A(space.dim(), space.dim());
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  return A;
}

}  // namespace

SparseMat assemble_mass(const FeSpace& space) {
  Eigen::Matrix3d ref;
  ref << 2, 1, 1,
         1, 2, 1,
         1, 1, 2;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(space.mesh.triangles.size() * 9);
  for (const auto& tri : space.mesh.triangles) {
    const double area = 0.5 * space.mesh.h * space.mesh.h;
    const Eigen::Matrix3d local = (area / 12.0) * ref;
    for (int i = 0; i < 3; ++i) {
      const int di = space.dof_of_vertex[tri[i]];
      if (di < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const int dj = space.dof_of_vertex[tri[j]];
        if (dj < 0) continue;
        trip.emplace_back(di, dj, local(i, j));
      }
    }
  }
  SparseMat M(space.dim(), space.dim());
  M.setFromTriplets(trip.begin(), trip.end());
  M.makeCompressed();
  return M;
}

SparseMat assemble_mass_full(const StructuredMesh& mesh) {
  Eigen::Matrix3d ref;
  ref << 2, 1, 1,
         1, 2, 1,
         1, 1, 2;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.triangles.size() * 9);
  for (const auto& tri : mesh.triangles) {
    const double area = 0.5 * mesh.h * mesh.h;
    const Eigen::Matrix3d local = (area / 12.0) * ref;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trip.emplace_back(tri[i], tri[j], local(i, j));
  }
  SparseMat M(mesh.vertex_count(), mesh.vertex_count());
  M.setFromTriplets(trip.begin(), trip.end());
  M.makeCompressed();
  return M;
}

SparseMat assemble_stiffness(const FeSpace& space,
                             const std::function<double(double, double)>& coeff) {
  return assemble_stiffness_impl(space, [&](std::size_t, const std::array<int, 3>& tri) {
    const auto& v = space.mesh.vertices;
    const double cx = (v(tri[0], 0) + v(tri[1], 0) + v(tri[2], 0)) / 3.0;
    const double cy = (v(tri[0], 1) + v(tri[1], 1) + v(tri[2], 1)) / 3.0;
    return coeff(cx, cy);
  });
}

SparseMat assemble_stiffness(const FeSpace& space, const Eigen::VectorXd& vertex_values) {
  if (vertex_values.size() != space.mesh.vertex_count())
    throw DimensionMismatch("coefficient vector has " + std::to_string(vertex_values.size()) +
                            " entries for " + std::to_string(space.mesh.vertex_count()) +
                            " vertices");
  return assemble_stiffness_impl(space, [&](std::size_t, const std::array<int, 3>& tri) {
    // Linear interpolation evaluated at the centroid.
    return (vertex_values[tri[0]] + vertex_values[tri[1]] + vertex_values[tri[2]]) / 3.0;
  });
}

SparseMat assemble_laplacian(const FeSpace& space) {
  return assemble_stiffness(space, [](double, double) { return 1.0; });
}

Eigen::VectorXd interpolate_at_dofs(const FeSpace& space,
                                    const std::function<double(double, double)>& f) {
  Eigen::VectorXd out(space.dim());
  for (int d = 0; d < space.dim(); ++d) {
    const int v = space.vertex_of_dof[d];
    out[d] = f(space.mesh.vertices(v, 0), space.mesh.vertices(v, 1));
  }
  return out;
}

}  // namespace rocp
