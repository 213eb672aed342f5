#include "mafem/reference.hpp"

#include "mafem/adapt.hpp"
#include "mafem/parallel.hpp"
#include "mafem/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace mafem {

Vector project_onto_curls(const Mesh& mesh, const EdgeSpace& space, const SparseSym& stiffness,
                          const std::vector<Vec3>& integrals, const Material& material) {
  if (integrals.size() != mesh.num_tets()) throw ArgumentError("projection: one integral per tet");
  Vector b = Vector::Zero(space.n_dofs);
  for (std::size_t t = 0; t < mesh.num_tets(); ++t) {
    const ElementGeometry g = element_geometry(mesh, static_cast<int>(t));
    const auto curls = local_basis_curls(g);
    const double w = 1.0 / std::sqrt(material.mu(mesh.tets()[t]));
    for (int le = 0; le < 6; ++le) {
      const int d = space.tet_dofs[t][le];
      if (d >= 0) b(d) += space.tet_signs[t][le] * w * curls[le].dot(integrals[t]);
    }
  }
  // A is singular (gradients), but b is orthogonal to its kernel, so CG
  // converges to a solution; only its curl is used.
  const int maxit = 20 * space.n_dofs + 100;
  return pcg(stiffness, b, jacobi_preconditioner(stiffness), 1e-12, maxit).x;
}

namespace {

double projection_defect(const SparseSym& stiffness, const Vector& x, const EigenPair& pair,
                         double sign) {
  const Vector d = x + sign * pair.u / std::sqrt(pair.lambda);
  return std::sqrt(std::max(0.0, d.dot(stiffness * d)));
}

class CubeReference : public Reference {
public:
  explicit CubeReference(const Material& m) : eps_(m.eps_uniform), mu_(m.mu_uniform) {
    if (!m.is_uniform()) throw ArgumentError("analytic cube reference needs uniform eps and mu");
    lambda_ = 2.0 * std::numbers::pi * std::numbers::pi / (eps_ * mu_);
  }

  double lambda() const override { return lambda_; }

  Comparison compare(const Mesh& mesh, const EdgeSpace& space, const EigenPair& pair,
                     const Material& material) const override {
    if (!material.is_uniform() || material.eps_uniform != eps_ || material.mu_uniform != mu_) {
      throw ArgumentError("analytic cube reference: material mismatch");
    }
    const TetRule rule = tet_rule_collapsed(5);
    const std::size_t nt = mesh.num_tets();

    // Coefficients of u_h against the normalized eigenspace basis.
    std::vector<Vec3> ct(nt, Vec3::Zero());
    parallel_for(nt, [&](std::size_t t) {
      const ElementGeometry g = element_geometry(mesh, static_cast<int>(t));
      const LinearField f = element_field(g, local_coefficients(space, pair.u, static_cast<int>(t)));
      Vec3 c = Vec3::Zero();
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Vec3 x = map_point(g.corners, rule.points[q]);
        c += rule.weights[q] * basis_dot(x, f(x));
      }
      ct[t] = g.volume * eps_ * c;
    });
    Vec3 c = Vec3::Zero();
    for (const Vec3& v : ct) c += v;
    if (c.norm() < 0.1) {
      throw ArgumentError("analytic cube reference: pair is not close to the lowest cavity mode");
    }
    const Vec3 a = c.normalized();

    const double omega = std::sqrt(lambda_);
    const double omega_h = std::sqrt(pair.lambda);
    struct Acc {
      double u[2]{}, curl[2]{}, sigma[2]{}, p[2]{};
      Vec3 pint = Vec3::Zero();
    };
    std::vector<Acc> acc(nt);
    parallel_for(nt, [&](std::size_t t) {
      const ElementGeometry g = element_geometry(mesh, static_cast<int>(t));
      const LinearField f = element_field(g, local_coefficients(space, pair.u, static_cast<int>(t)));
      const Vec3 curl_h = f.curl();
      const Vec3 p_h = -curl_h / (std::sqrt(mu_) * omega_h);
      Acc& r = acc[t];
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Vec3 x = map_point(g.corners, rule.points[q]);
        const double w = rule.weights[q] * g.volume;
        const Vec3 u = field(a, x);
        const Vec3 cu = curl(a, x);
        const Vec3 p = -cu / (std::sqrt(mu_) * omega);
        const Vec3 uh = f(x);
        for (int k = 0; k < 2; ++k) {
          const double s = k == 0 ? 1.0 : -1.0;
          r.u[k] += w * eps_ * (u - s * uh).squaredNorm();
          r.curl[k] += w / mu_ * (cu - s * curl_h).squaredNorm();
          r.sigma[k] += w * eps_ * (omega * u - s * omega_h * uh).squaredNorm();
          r.p[k] += w * (p - s * p_h).squaredNorm();
        }
        r.pint += w * p;
      }
    });
    Acc tot;
    std::vector<Vec3> pint(nt);
    for (std::size_t t = 0; t < nt; ++t) {
      for (int k = 0; k < 2; ++k) {
        tot.u[k] += acc[t].u[k];
        tot.curl[k] += acc[t].curl[k];
        tot.sigma[k] += acc[t].sigma[k];
        tot.p[k] += acc[t].p[k];
      }
      pint[t] = acc[t].pint;
    }

    Comparison out;
    out.lambda_ref = lambda_;
    out.sign = 1.0;
    out.u_sq = tot.u[0];
    out.curl_sq = tot.curl[0];
    out.sigma_sq = tot.sigma[0];
    out.p_sq = tot.p[0];
    out.gap_curl = std::sqrt(std::min(tot.u[0] + tot.curl[0], tot.u[1] + tot.curl[1]));
    out.gap_mixed = std::sqrt(std::min(tot.sigma[0] + tot.p[0], tot.sigma[1] + tot.p[1]));
    const SparseSym stiffness = assemble(mesh, space, material).stiffness;
    const Vector x = project_onto_curls(mesh, space, stiffness, pint, material);
    out.projection_defect = projection_defect(stiffness, x, pair, out.sign);
    return out;
  }

private:
  // Eigenspace basis E1 = (s_y s_z, 0, 0), E2 = (0, s_x s_z, 0),
  // E3 = (0, 0, s_x s_y), normalized in the eps-weighted L2 norm.
  double scale() const { return 2.0 / std::sqrt(eps_); }

  Vec3 basis_dot(const Vec3& x, const Vec3& v) const {
    const double pi = std::numbers::pi;
    const double sx = std::sin(pi * x(0)), sy = std::sin(pi * x(1)), sz = std::sin(pi * x(2));
    return scale() * Vec3(v(0) * sy * sz, v(1) * sx * sz, v(2) * sx * sy);
  }

  Vec3 field(const Vec3& a, const Vec3& x) const {
    const double pi = std::numbers::pi;
    const double sx = std::sin(pi * x(0)), sy = std::sin(pi * x(1)), sz = std::sin(pi * x(2));
    return scale() * Vec3(a(0) * sy * sz, a(1) * sx * sz, a(2) * sx * sy);
  }

  Vec3 curl(const Vec3& a, const Vec3& x) const {
    const double pi = std::numbers::pi;
    const double sx = std::sin(pi * x(0)), sy = std::sin(pi * x(1)), sz = std::sin(pi * x(2));
    const double cx = std::cos(pi * x(0)), cy = std::cos(pi * x(1)), cz = std::cos(pi * x(2));
    const Vec3 c1(0.0, sy * cz, -cy * sz);
    const Vec3 c2(-sx * cz, 0.0, cx * sz);
    const Vec3 c3(sx * cy, -cx * sy, 0.0);
    return scale() * pi * (a(0) * c1 + a(1) * c2 + a(2) * c3);
  }

  double eps_;
  double mu_;
  double lambda_;
};

} // namespace

std::unique_ptr<Reference> make_cube_reference(const Material& material) {
  return std::make_unique<CubeReference>(material);
}

FineReference::FineReference(Mesh fine, const Material& material, int target_index,
                             const EigenConfig& eigen, const Vector* start)
    : mesh_(std::move(fine)) {
  if (target_index < 1) throw ArgumentError("reference: target index must be >= 1");
  space_ = EdgeSpace::build(mesh_);
  sys_ = assemble(mesh_, space_, material);
  const NodalSpace nodal = NodalSpace::build(mesh_);
  const SparseRect g = discrete_gradient(mesh_, nodal, space_);
  EigenConfig cfg = eigen;
  cfg.k = target_index;
  const auto pairs = solve_smallest_positive(sys_.stiffness, sys_.mass, g, cfg, start);
  pair_ = pairs.back();
  if (start) fix_sign(pair_, sys_.mass, start);
}

Comparison FineReference::compare(const Mesh& mesh, const EdgeSpace& space, const EigenPair& pair,
                                  const Material& material) const {
  const std::vector<int> ancestor = coarse_ancestor_map(mesh, mesh_);
  const Vector v = prolong(pair.u, mesh, mesh_, space, space_, ancestor);
  const SparseSym& a = sys_.stiffness;
  const SparseSym& m = sys_.mass;
  const double omega = std::sqrt(pair_.lambda);
  const double omega_h = std::sqrt(pair.lambda);

  Comparison out;
  out.lambda_ref = pair_.lambda;
  out.sign = pair_.u.dot(m * v) < 0.0 ? -1.0 : 1.0;
  auto mnorm = [&](const Vector& x) { return x.dot(m * x); };
  auto anorm = [&](const Vector& x) { return x.dot(a * x); };
  double u_sq[2], curl_sq[2], sigma_sq[2], p_sq[2];
  for (int k = 0; k < 2; ++k) {
    const double s = (k == 0 ? 1.0 : -1.0) * out.sign;
    const Vector du = pair_.u - s * v;
    u_sq[k] = mnorm(du);
    curl_sq[k] = anorm(du);
    sigma_sq[k] = mnorm(omega * pair_.u - s * omega_h * v);
    p_sq[k] = anorm(pair_.u / omega - s * v / omega_h);
  }
  out.u_sq = u_sq[0];
  out.curl_sq = curl_sq[0];
  out.sigma_sq = sigma_sq[0];
  out.p_sq = p_sq[0];
  out.gap_curl = std::sqrt(std::min(u_sq[0] + curl_sq[0], u_sq[1] + curl_sq[1]));
  out.gap_mixed = std::sqrt(std::min(sigma_sq[0] + p_sq[0], sigma_sq[1] + p_sq[1]));

  std::vector<Vec3> pint(mesh.num_tets(), Vec3::Zero());
  for (std::size_t t = 0; t < mesh_.num_tets(); ++t) {
    const int k = static_cast<int>(t);
    const double mu = material.mu(mesh_.tets()[t]);
    const Vec3 p = -curl_eval(mesh_, space_, pair_.u, k) / (std::sqrt(mu) * omega);
    pint[ancestor[t]] += mesh_.volume(k) * p;
  }
  const SparseSym coarse_a = assemble(mesh, space, material).stiffness;
  const Vector x = project_onto_curls(mesh, space, coarse_a, pint, material);
  out.projection_defect = projection_defect(coarse_a, x, pair, out.sign);
  return out;
}

std::unique_ptr<Reference> make_fine_reference(Mesh fine, const Material& material,
                                               int target_index, const EigenConfig& eigen,
                                               const Vector* start) {
  return std::make_unique<FineReference>(std::move(fine), material, target_index, eigen, start);
}

} // namespace mafem
