#include "mafem/mixed.hpp"

#include "mafem/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace mafem {

MixedSolution to_mixed(const Mesh& mesh, const EdgeSpace& space, const EigenPair& pair,
                       const Material& material) {
  if (!(pair.lambda > 0.0)) throw ArgumentError("to_mixed: eigenvalue must be positive");
  if (pair.u.size() != space.n_dofs) throw ArgumentError("to_mixed: coefficient length mismatch");
  MixedSolution m;
  m.lambda = pair.lambda;
  m.omega = std::sqrt(pair.lambda);
  m.sigma = m.omega * pair.u;
  m.p.resize(mesh.num_tets());
  parallel_for(mesh.num_tets(), [&](std::size_t t) {
    const double mu = material.mu(mesh.tets()[t]);
    m.p[t] = -curl_eval(mesh, space, pair.u, static_cast<int>(t)) / (std::sqrt(mu) * m.omega);
  });
  return m;
}

double piecewise_l2_sq(const Mesh& mesh, const std::vector<Vec3>& p) {
  if (p.size() != mesh.num_tets()) throw ArgumentError("piecewise field length mismatch");
  double s = 0.0;
  for (std::size_t t = 0; t < p.size(); ++t) s += mesh.volume(static_cast<int>(t)) * p[t].squaredNorm();
  return s;
}

double curl_identity_defect(const Mesh& mesh, const EdgeSpace& space, const MixedSolution& mixed,
                            const Material& material) {
  double defect = 0.0;
  double scale = 0.0;
  for (std::size_t t = 0; t < mesh.num_tets(); ++t) {
    const int k = static_cast<int>(t);
    const double mu = material.mu(mesh.tets()[t]);
    const Vec3 lhs = curl_eval(mesh, space, mixed.sigma, k) / std::sqrt(mu);
    const Vec3 rhs = mixed.lambda * mixed.p[t];
    defect = std::max(defect, (lhs + rhs).norm());
    scale = std::max(scale, rhs.norm());
  }
  return scale > 0.0 ? defect / scale : defect;
}

} // namespace mafem
