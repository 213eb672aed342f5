#pragma once

#include "mafem/common.hpp"
#include "mafem/linalg.hpp"
#include "mafem/mesh.hpp"

#include <Eigen/Core>

#include <functional>
#include <vector>

namespace mafem {

/// Piecewise-constant permittivity and permeability. Values are attached to
/// the tets of the initial mesh and inherited through bisection; empty arrays
/// mean the uniform defaults.
struct Material {
  double eps_uniform = 1.0;
  double mu_uniform = 1.0;
  std::vector<double> eps_by_root;
  std::vector<double> mu_by_root;

  static Material uniform(double eps, double mu);

  double eps(const Tet& t) const {
    return eps_by_root.empty() ? eps_uniform : eps_by_root[t.lineage.root];
  }
  double mu(const Tet& t) const {
    return mu_by_root.empty() ? mu_uniform : mu_by_root[t.lineage.root];
  }
  bool is_uniform() const { return eps_by_root.empty() && mu_by_root.empty(); }
};

/// Affine data of one tet: corners, barycentric gradients and volume.
struct ElementGeometry {
  std::array<Vec3, 4> corners;
  std::array<Vec3, 4> grad_lambda;
  double volume = 0.0;

  std::array<double, 4> barycentric(const Vec3& x) const;
};

ElementGeometry element_geometry(const std::array<Vec3, 4>& corners);
ElementGeometry element_geometry(const Mesh& mesh, int t);

/// Lowest-order Nedelec basis functions on one element in local edge
/// orientation (local vertex a -> b for kLocalEdges[e] = {a, b}).
std::array<Vec3, 6> local_basis_values(const ElementGeometry& g, const std::array<double, 4>& bary);
std::array<Vec3, 6> local_basis_curls(const ElementGeometry& g);

using Matrix6 = Eigen::Matrix<double, 6, 6>;

struct LocalMatrices {
  Matrix6 stiffness; ///< (mu^-1 curl phi_i, curl phi_j)
  Matrix6 mass;      ///< (eps phi_i, phi_j)
};

/// Element curl-curl and mass matrices in local edge orientation.
LocalMatrices local_matrices(const std::array<Vec3, 4>& corners, double eps, double mu);

/// Global edge dofs: one per edge not on the boundary (tangential trace
/// vanishes there). Global edge direction runs from the lower to the higher
/// vertex index.
struct EdgeSpace {
  std::vector<int> dof_of_edge; ///< -1 for boundary edges
  std::vector<int> edge_of_dof;
  std::vector<std::array<int, 6>> tet_dofs;     ///< -1 for boundary edges
  std::vector<std::array<double, 6>> tet_signs; ///< local-to-global orientation
  int n_dofs = 0;

  static EdgeSpace build(const Mesh& mesh);
};

/// Continuous piecewise-linear space on interior vertices.
struct NodalSpace {
  std::vector<int> dof_of_vertex; ///< -1 for boundary vertices
  std::vector<int> vertex_of_dof;
  int n_dofs = 0;

  static NodalSpace build(const Mesh& mesh);
};

struct SystemMatrices {
  SparseSym stiffness; ///< A
  SparseSym mass;      ///< M
};

SystemMatrices assemble(const Mesh& mesh, const EdgeSpace& space, const Material& material);

/// Edge dofs of grad(psi) for a nodal vector psi: G psi.
SparseRect discrete_gradient(const Mesh& mesh, const NodalSpace& nodal, const EdgeSpace& edge);

/// Element coefficients in local orientation (zeros on boundary edges).
std::array<double, 6> local_coefficients(const EdgeSpace& space, const Vector& u, int t);

/// Constant curl of the discrete field on tet t.
Vec3 curl_eval(const Mesh& mesh, const EdgeSpace& space, const Vector& u, int t);
/// Field value at x inside tet t; throws ArgumentError when x lies outside.
Vec3 field_eval(const Mesh& mesh, const EdgeSpace& space, const Vector& u, int t, const Vec3& x);

/// The field a + b x x represented on one element.
struct LinearField {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();

  Vec3 operator()(const Vec3& x) const { return a + b.cross(x); }
  Vec3 curl() const { return 2.0 * b; }
};

LinearField element_field(const ElementGeometry& g, const std::array<double, 6>& local);
LinearField element_field(const Mesh& mesh, const EdgeSpace& space, const Vector& u, int t);

using VectorFunction = std::function<Vec3(const Vec3&)>;

/// Edge-moment interpolant: dof = integral over the edge of f . t, with
/// Gauss-Legendre quadrature of `points` nodes along each edge.
Vector interpolate(const Mesh& mesh, const EdgeSpace& space, const VectorFunction& f,
                   int points = 3);

} // namespace mafem
