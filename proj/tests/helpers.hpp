#pragma once

#include "mafem/eigensolve.hpp"
#include "mafem/fem.hpp"
#include "mafem/mesh.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <random>
#include <vector>

namespace testing {

inline Eigen::MatrixXd dense(const mafem::SparseSym& s) { return Eigen::MatrixXd(s); }

inline mafem::Mesh reference_tet() {
  std::vector<mafem::Vec3> v{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  std::vector<mafem::Tet> t(1);
  t[0].verts = {0, 1, 2, 3};
  return mafem::build_topology(t, v);
}

inline mafem::Mesh two_tets() {
  std::vector<mafem::Vec3> v{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}};
  std::vector<mafem::Tet> t(2);
  t[0].verts = {0, 1, 2, 3};
  t[1].verts = {1, 2, 3, 4};
  t[1].lineage.root = 1;
  return mafem::build_topology(t, v);
}

/// Positive eigenvalues of the dense pencil (A, M), ascending, with those
/// below `zero_tol` times the largest dropped.
inline std::vector<double> dense_positive_spectrum(const mafem::SparseSym& a,
                                                   const mafem::SparseSym& m,
                                                   double zero_tol = 1e-8) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(a), dense(m));
  const Eigen::VectorXd ev = es.eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  std::vector<double> out;
  for (int i = 0; i < ev.size(); ++i) {
    if (ev(i) > zero_tol * scale) out.push_back(ev(i));
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Edge space with a dof on every edge, boundary ones included.
inline mafem::EdgeSpace free_space(const mafem::Mesh& mesh) {
  mafem::EdgeSpace s;
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    s.dof_of_edge.push_back(s.n_dofs++);
    s.edge_of_dof.push_back(static_cast<int>(e));
  }
  s.tet_dofs.resize(mesh.num_tets());
  s.tet_signs.resize(mesh.num_tets());
  for (std::size_t t = 0; t < mesh.num_tets(); ++t) {
    const auto& v = mesh.tets()[t].verts;
    for (int le = 0; le < 6; ++le) {
      s.tet_dofs[t][le] = s.dof_of_edge[mesh.tet_edges()[t][le]];
      s.tet_signs[t][le] =
          v[mafem::kLocalEdges[le][0]] < v[mafem::kLocalEdges[le][1]] ? 1.0 : -1.0;
    }
  }
  return s;
}

struct Problem {
  mafem::Mesh mesh;
  mafem::EdgeSpace space;
  mafem::NodalSpace nodal;
  mafem::SystemMatrices sys;
  mafem::SparseRect grad;
};

inline Problem make_problem(mafem::Mesh mesh,
                            const mafem::Material& mat = mafem::Material::uniform(1, 1)) {
  Problem p;
  p.mesh = std::move(mesh);
  p.space = mafem::EdgeSpace::build(p.mesh);
  p.nodal = mafem::NodalSpace::build(p.mesh);
  p.sys = mafem::assemble(p.mesh, p.space, mat);
  p.grad = mafem::discrete_gradient(p.mesh, p.nodal, p.space);
  return p;
}

inline std::vector<mafem::EigenPair> solve(const Problem& p, int k, double shift = 1.0) {
  mafem::EigenConfig cfg;
  cfg.k = k;
  cfg.shift = shift;
  auto pairs = mafem::solve_smallest_positive(p.sys.stiffness, p.sys.mass, p.grad, cfg);
  for (auto& e : pairs) mafem::fix_sign(e, p.sys.mass);
  return pairs;
}

inline mafem::Vector random_vector(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  mafem::Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = d(rng);
  return v;
}

/// Uniformly distributed point inside tet t.
inline mafem::Vec3 random_point(const mafem::Mesh& mesh, int t, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  double b[4];
  double s = 0.0;
  for (double& x : b) {
    x = -std::log(std::max(d(rng), 1e-300));
    s += x;
  }
  const auto c = mesh.corners(t);
  mafem::Vec3 x = mafem::Vec3::Zero();
  for (int i = 0; i < 4; ++i) x += (b[i] / s) * c[i];
  return x;
}

} // namespace testing
