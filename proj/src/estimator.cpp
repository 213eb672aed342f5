#include "mafem/estimator.hpp"

#include "mafem/parallel.hpp"
#include "mafem/quadrature.hpp"

#include <cmath>

namespace mafem {

double IndicatorField::sum(const std::vector<int>& tets) const {
  double s = 0.0;
  for (int t : tets) s += eta_sq.at(static_cast<std::size_t>(t));
  return s;
}

namespace {

/// Per-tet data entering the residual: a constant vector whose tangential
/// jump is measured, and a linear field whose normal jump is measured.
struct ElementTraces {
  std::vector<Vec3> tangential;
  std::vector<LinearField> normal;
  std::vector<double> volume_sq; // ||normal field||_K^2
};

struct FaceTerms {
  double tangential_sq = 0.0;
  double normal_sq = 0.0;
};

double linear_field_l2_sq(const ElementGeometry& g, const LinearField& f) {
  const TetRule& rule = tet_rule_degree2();
  double s = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    s += rule.weights[q] * f(map_point(g.corners, rule.points[q])).squaredNorm();
  }
  return g.volume * s;
}

std::vector<FaceTerms> jump_terms(const Mesh& mesh, const ElementTraces& tr) {
  const auto& faces = mesh.faces();
  std::vector<FaceTerms> out(faces.size());
  const TriangleRule& rule = triangle_rule_degree2();
  parallel_for(faces.size(), [&](std::size_t f) {
    const auto& nb = mesh.face_tets()[f];
    if (nb[1] < 0) return;
    const std::array<Vec3, 3> x{mesh.vertices()[faces[f][0]], mesh.vertices()[faces[f][1]],
                                mesh.vertices()[faces[f][2]]};
    const Vec3 cross = (x[1] - x[0]).cross(x[2] - x[0]);
    const double area = 0.5 * cross.norm();
    const Vec3 n = cross.normalized();
    const Vec3 tj = (tr.tangential[nb[0]] - tr.tangential[nb[1]]).cross(n);
    out[f].tangential_sq = area * tj.squaredNorm();
    double s = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec3 p = map_point(x, rule.points[q]);
      const double j = (tr.normal[nb[0]](p) - tr.normal[nb[1]](p)).dot(n);
      s += rule.weights[q] * j * j;
    }
    out[f].normal_sq = area * s;
  });
  return out;
}

IndicatorField combine(const Mesh& mesh, const ElementTraces& tr, IndicatorKind kind) {
  const auto faces = jump_terms(mesh, tr);
  std::vector<double> face_part(faces.size(), 0.0);
  for (std::size_t f = 0; f < faces.size(); ++f) {
    face_part[f] = 0.5 * mesh.face_diameter(static_cast<int>(f)) *
                   (faces[f].tangential_sq + faces[f].normal_sq);
  }
  IndicatorField field;
  field.kind = kind;
  field.eta_sq.assign(mesh.num_tets(), 0.0);
  parallel_for(mesh.num_tets(), [&](std::size_t t) {
    const double h = mesh.diameter(static_cast<int>(t));
    // On each element the field is a + b x x with constant eps and mu, so
    // curl(mu^-1 curl .) and div(eps .) vanish identically.
    double eta = h * h * tr.volume_sq[t];
    for (int f : mesh.tet_faces()[t]) eta += face_part[f];
    field.eta_sq[t] = eta;
  });
  for (double e : field.eta_sq) field.total += e;
  return field;
}

ElementTraces standard_traces(const Mesh& mesh, const EdgeSpace& space, const EigenPair& pair,
                              const Material& material) {
  if (!(pair.lambda > 0.0)) throw ArgumentError("indicator: eigenvalue must be positive");
  if (pair.u.size() != space.n_dofs) throw ArgumentError("indicator: coefficient length mismatch");
  const std::size_t nt = mesh.num_tets();
  ElementTraces tr{std::vector<Vec3>(nt), std::vector<LinearField>(nt), std::vector<double>(nt)};
  parallel_for(nt, [&](std::size_t t) {
    const Tet& tet = mesh.tets()[t];
    const ElementGeometry g = element_geometry(mesh, static_cast<int>(t));
    LinearField f = element_field(g, local_coefficients(space, pair.u, static_cast<int>(t)));
    tr.tangential[t] = f.curl() / (material.mu(tet) * pair.lambda);
    const double eps = material.eps(tet);
    f.a *= eps;
    f.b *= eps;
    tr.normal[t] = f;
    tr.volume_sq[t] = linear_field_l2_sq(g, f);
  });
  return tr;
}

} // namespace

std::vector<FaceJump> face_jumps(const Mesh& mesh, const EdgeSpace& space, const EigenPair& pair,
                                 const Material& material) {
  const auto terms = jump_terms(mesh, standard_traces(mesh, space, pair, material));
  std::vector<FaceJump> out;
  for (std::size_t f = 0; f < terms.size(); ++f) {
    if (mesh.face_tets()[f][1] < 0) continue;
    out.push_back({static_cast<int>(f), std::sqrt(terms[f].tangential_sq),
                   std::sqrt(terms[f].normal_sq)});
  }
  return out;
}

IndicatorField indicator_standard(const Mesh& mesh, const EdgeSpace& space, const EigenPair& pair,
                                  const Material& material) {
  return combine(mesh, standard_traces(mesh, space, pair, material), IndicatorKind::standard);
}

IndicatorField indicator_mixed(const Mesh& mesh, const EdgeSpace& space, const MixedSolution& mixed,
                               const Material& material) {
  if (!(mixed.lambda > 0.0)) throw ArgumentError("indicator: eigenvalue must be positive");
  if (mixed.sigma.size() != space.n_dofs || mixed.p.size() != mesh.num_tets()) {
    throw ArgumentError("indicator: mixed solution does not match the mesh");
  }
  const std::size_t nt = mesh.num_tets();
  ElementTraces tr{std::vector<Vec3>(nt), std::vector<LinearField>(nt), std::vector<double>(nt)};
  parallel_for(nt, [&](std::size_t t) {
    const Tet& tet = mesh.tets()[t];
    const ElementGeometry g = element_geometry(mesh, static_cast<int>(t));
    LinearField f = element_field(g, local_coefficients(space, mixed.sigma, static_cast<int>(t)));
    tr.tangential[t] = mixed.p[t] / std::sqrt(material.mu(tet));
    const double eps = material.eps(tet);
    f.a *= eps;
    f.b *= eps;
    tr.normal[t] = f;
    // curl of the elementwise constant mu^-1/2 p_h is zero.
    tr.volume_sq[t] = linear_field_l2_sq(g, f);
  });
  return combine(mesh, tr, IndicatorKind::mixed);
}

IndicatorField indicator_mixed(const Mesh& mesh, const EdgeSpace& space, const EigenPair& pair,
                               const Material& material) {
  return indicator_mixed(mesh, space, to_mixed(mesh, space, pair, material), material);
}

} // namespace mafem
