#include "mafem/fem.hpp"

#include "mafem/parallel.hpp"
#include "mafem/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace mafem {

Material Material::uniform(double eps, double mu) {
  if (!(eps > 0.0) || !(mu > 0.0)) throw ArgumentError("eps and mu must be positive");
  Material m;
  m.eps_uniform = eps;
  m.mu_uniform = mu;
  return m;
}

std::array<double, 4> ElementGeometry::barycentric(const Vec3& x) const {
  std::array<double, 4> l{};
  double s = 0.0;
  for (int i = 1; i < 4; ++i) {
    l[i] = grad_lambda[i].dot(x - corners[0]);
    s += l[i];
  }
  l[0] = 1.0 - s;
  return l;
}

ElementGeometry element_geometry(const std::array<Vec3, 4>& corners) {
  ElementGeometry g;
  g.corners = corners;
  Eigen::Matrix3d j;
  j << corners[1] - corners[0], corners[2] - corners[0], corners[3] - corners[0];
  const double det = j.determinant();
  if (!(std::abs(det) > 0.0)) throw GeometryError("degenerate element");
  g.volume = std::abs(det) / 6.0;
  const Eigen::Matrix3d inv = j.inverse();
  g.grad_lambda[0] = Vec3::Zero();
  for (int i = 1; i < 4; ++i) {
    g.grad_lambda[i] = inv.row(i - 1).transpose();
    g.grad_lambda[0] -= g.grad_lambda[i];
  }
  return g;
}

ElementGeometry element_geometry(const Mesh& mesh, int t) {
  return element_geometry(mesh.corners(t));
}

std::array<Vec3, 6> local_basis_values(const ElementGeometry& g,
                                       const std::array<double, 4>& bary) {
  std::array<Vec3, 6> phi;
  for (int e = 0; e < 6; ++e) {
    const int a = kLocalEdges[e][0];
    const int b = kLocalEdges[e][1];
    phi[e] = bary[a] * g.grad_lambda[b] - bary[b] * g.grad_lambda[a];
  }
  return phi;
}

std::array<Vec3, 6> local_basis_curls(const ElementGeometry& g) {
  std::array<Vec3, 6> c;
  for (int e = 0; e < 6; ++e) {
    c[e] = 2.0 * g.grad_lambda[kLocalEdges[e][0]].cross(g.grad_lambda[kLocalEdges[e][1]]);
  }
  return c;
}

LocalMatrices local_matrices(const std::array<Vec3, 4>& corners, double eps, double mu) {
  if (!(eps > 0.0) || !(mu > 0.0)) throw ArgumentError("eps and mu must be positive");
  const ElementGeometry g = element_geometry(corners);
  LocalMatrices lm;
  const auto curls = local_basis_curls(g);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) lm.stiffness(i, j) = g.volume / mu * curls[i].dot(curls[j]);
  }
  lm.mass.setZero();
  const TetRule& rule = tet_rule_degree2();
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const auto phi = local_basis_values(g, rule.points[q]);
    const double w = eps * g.volume * rule.weights[q];
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) lm.mass(i, j) += w * phi[i].dot(phi[j]);
    }
  }
  return lm;
}

EdgeSpace EdgeSpace::build(const Mesh& mesh) {
  EdgeSpace s;
  s.dof_of_edge.assign(mesh.num_edges(), -1);
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    if (!mesh.boundary_edges()[e]) {
      s.dof_of_edge[e] = s.n_dofs++;
      s.edge_of_dof.push_back(static_cast<int>(e));
    }
  }
  s.tet_dofs.resize(mesh.num_tets());
  s.tet_signs.resize(mesh.num_tets());
  for (std::size_t t = 0; t < mesh.num_tets(); ++t) {
    const auto& v = mesh.tets()[t].verts;
    for (int le = 0; le < 6; ++le) {
      s.tet_dofs[t][le] = s.dof_of_edge[mesh.tet_edges()[t][le]];
      s.tet_signs[t][le] = v[kLocalEdges[le][0]] < v[kLocalEdges[le][1]] ? 1.0 : -1.0;
    }
  }
  return s;
}

NodalSpace NodalSpace::build(const Mesh& mesh) {
  NodalSpace s;
  s.dof_of_vertex.assign(mesh.num_vertices(), -1);
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    if (!mesh.boundary_vertices()[v]) {
      s.dof_of_vertex[v] = s.n_dofs++;
      s.vertex_of_dof.push_back(static_cast<int>(v));
    }
  }
  return s;
}

SystemMatrices assemble(const Mesh& mesh, const EdgeSpace& space, const Material& material) {
  const std::size_t nt = mesh.num_tets();
  std::vector<LocalMatrices> local(nt);
  parallel_for(nt, [&](std::size_t t) {
    const Tet& tet = mesh.tets()[t];
    local[t] = local_matrices(mesh.corners(static_cast<int>(t)), material.eps(tet),
                              material.mu(tet));
  });

  using Triplet = Eigen::Triplet<double, int>;
  std::vector<Triplet> ka;
  std::vector<Triplet> ma;
  ka.reserve(36 * nt);
  ma.reserve(36 * nt);
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& dofs = space.tet_dofs[t];
    const auto& sg = space.tet_signs[t];
    for (int i = 0; i < 6; ++i) {
      if (dofs[i] < 0) continue;
      for (int j = 0; j < 6; ++j) {
        if (dofs[j] < 0) continue;
        const double s = sg[i] * sg[j];
        ka.emplace_back(dofs[i], dofs[j], s * local[t].stiffness(i, j));
        ma.emplace_back(dofs[i], dofs[j], s * local[t].mass(i, j));
      }
    }
  }
  SystemMatrices sys;
  sys.stiffness.resize(space.n_dofs, space.n_dofs);
  sys.mass.resize(space.n_dofs, space.n_dofs);
  sys.stiffness.setFromTriplets(ka.begin(), ka.end());
  sys.mass.setFromTriplets(ma.begin(), ma.end());
  sys.stiffness.makeCompressed();
  sys.mass.makeCompressed();
  return sys;
}

SparseRect discrete_gradient(const Mesh& mesh, const NodalSpace& nodal, const EdgeSpace& edge) {
  using Triplet = Eigen::Triplet<double, int>;
  std::vector<Triplet> trip;
  trip.reserve(2 * static_cast<std::size_t>(edge.n_dofs));
  for (int d = 0; d < edge.n_dofs; ++d) {
    const auto& e = mesh.edges()[edge.edge_of_dof[d]];
    // Edge runs e[0] -> e[1] (ascending ids), so its moment is psi(e1) - psi(e0).
    if (const int c = nodal.dof_of_vertex[e[0]]; c >= 0) trip.emplace_back(d, c, -1.0);
    if (const int c = nodal.dof_of_vertex[e[1]]; c >= 0) trip.emplace_back(d, c, 1.0);
  }
  SparseRect g(edge.n_dofs, nodal.n_dofs);
  g.setFromTriplets(trip.begin(), trip.end());
  g.makeCompressed();
  return g;
}

std::array<double, 6> local_coefficients(const EdgeSpace& space, const Vector& u, int t) {
  std::array<double, 6> c{};
  for (int le = 0; le < 6; ++le) {
    const int d = space.tet_dofs[t][le];
    c[le] = d < 0 ? 0.0 : space.tet_signs[t][le] * u(d);
  }
  return c;
}

Vec3 curl_eval(const Mesh& mesh, const EdgeSpace& space, const Vector& u, int t) {
  const ElementGeometry g = element_geometry(mesh, t);
  const auto c = local_coefficients(space, u, t);
  const auto curls = local_basis_curls(g);
  Vec3 out = Vec3::Zero();
  for (int e = 0; e < 6; ++e) out += c[e] * curls[e];
  return out;
}

Vec3 field_eval(const Mesh& mesh, const EdgeSpace& space, const Vector& u, int t,
                const Vec3& x) {
  if (!mesh.contains(t, x, 1e-10)) throw ArgumentError("evaluation point outside element");
  const ElementGeometry g = element_geometry(mesh, t);
  const auto c = local_coefficients(space, u, t);
  const auto phi = local_basis_values(g, g.barycentric(x));
  Vec3 out = Vec3::Zero();
  for (int e = 0; e < 6; ++e) out += c[e] * phi[e];
  return out;
}

LinearField element_field(const ElementGeometry& g, const std::array<double, 6>& local) {
  const auto curls = local_basis_curls(g);
  LinearField f;
  Vec3 curl = Vec3::Zero();
  for (int e = 0; e < 6; ++e) curl += local[e] * curls[e];
  f.b = 0.5 * curl;
  const auto phi = local_basis_values(g, {1.0, 0.0, 0.0, 0.0});
  Vec3 u0 = Vec3::Zero();
  for (int e = 0; e < 6; ++e) u0 += local[e] * phi[e];
  f.a = u0 - f.b.cross(g.corners[0]);
  return f;
}

LinearField element_field(const Mesh& mesh, const EdgeSpace& space, const Vector& u, int t) {
  return element_field(element_geometry(mesh, t), local_coefficients(space, u, t));
}

Vector interpolate(const Mesh& mesh, const EdgeSpace& space, const VectorFunction& f,
                   int points) {
  // Gauss-Legendre nodes on [0, 1] for small orders.
  std::vector<double> x;
  std::vector<double> w;
  switch (points) {
  case 1:
    x = {0.5};
    w = {1.0};
    break;
  case 2:
    x = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
    w = {0.5, 0.5};
    break;
  case 3:
    x = {0.5 - 0.5 * std::sqrt(0.6), 0.5, 0.5 + 0.5 * std::sqrt(0.6)};
    w = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    break;
  default:
    throw ArgumentError("interpolate supports 1..3 points per edge");
  }
  Vector u(space.n_dofs);
  for (int d = 0; d < space.n_dofs; ++d) {
    const auto& e = mesh.edges()[space.edge_of_dof[d]];
    const Vec3& p0 = mesh.vertices()[e[0]];
    const Vec3 dir = mesh.vertices()[e[1]] - p0;
    double s = 0.0;
    for (std::size_t q = 0; q < x.size(); ++q) s += w[q] * f(p0 + x[q] * dir).dot(dir);
    u(d) = s;
  }
  return u;
}

} // namespace mafem
