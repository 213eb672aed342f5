#include "mafem/mesh.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace mafem {

Lineage Lineage::child(int which) const {
  if (gen >= max_generation) {
    throw RefinementError("bisection generation limit exceeded");
  }
  return Lineage{root, gen + 1, (path << 1) | static_cast<std::uint64_t>(which & 1)};
}

Lineage Lineage::ancestor(std::uint32_t g) const {
  const std::uint32_t up = gen - g;
  return Lineage{root, g, up >= 64 ? 0 : (path >> up)};
}

std::size_t LineageHash::operator()(const Lineage& l) const noexcept {
  std::uint64_t h = l.path * 0x9E3779B97F4A7C15ull;
  h ^= (static_cast<std::uint64_t>(l.root) << 8) ^ l.gen;
  h *= 0xBF58476D1CE4E5B9ull;
  return static_cast<std::size_t>(h ^ (h >> 31));
}

namespace {

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

double signed_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).dot((c - a).cross(d - a)) / 6.0;
}

} // namespace

std::array<Vec3, 4> Mesh::corners(int t) const {
  const auto& v = tets_[t].verts;
  return {vertices_[v[0]], vertices_[v[1]], vertices_[v[2]], vertices_[v[3]]};
}

double Mesh::volume(int t) const {
  const auto p = corners(t);
  return std::abs(signed_volume(p[0], p[1], p[2], p[3]));
}

Vec3 Mesh::barycenter(int t) const {
  const auto p = corners(t);
  return 0.25 * (p[0] + p[1] + p[2] + p[3]);
}

double Mesh::diameter(int t) const {
  const auto p = corners(t);
  double h = 0.0;
  for (const auto& e : kLocalEdges) h = std::max(h, (p[e[0]] - p[e[1]]).norm());
  return h;
}

double Mesh::face_diameter(int f) const {
  const auto& v = faces_[f];
  const Vec3& a = vertices_[v[0]];
  const Vec3& b = vertices_[v[1]];
  const Vec3& c = vertices_[v[2]];
  return std::max({(a - b).norm(), (a - c).norm(), (b - c).norm()});
}

double Mesh::face_area(int f) const {
  const auto& v = faces_[f];
  const Vec3& a = vertices_[v[0]];
  return 0.5 * (vertices_[v[1]] - a).cross(vertices_[v[2]] - a).norm();
}

double Mesh::quality(int t) const {
  const auto p = corners(t);
  const double vol = std::abs(signed_volume(p[0], p[1], p[2], p[3]));
  double area = 0.0;
  for (const auto& f : kLocalFaces) {
    area += 0.5 * (p[f[1]] - p[f[0]]).cross(p[f[2]] - p[f[0]]).norm();
  }
  const double inradius = 3.0 * vol / area;
  // Circumcenter c solves 2 (p_i - p_0) . c = |p_i|^2 - |p_0|^2.
  Eigen::Matrix3d m;
  Vec3 rhs;
  for (int i = 0; i < 3; ++i) {
    m.row(i) = 2.0 * (p[i + 1] - p[0]).transpose();
    rhs(i) = p[i + 1].squaredNorm() - p[0].squaredNorm();
  }
  const Vec3 c = m.partialPivLu().solve(rhs);
  const double circumradius = (c - p[0]).norm();
  return 3.0 * inradius / circumradius;
}

double Mesh::min_quality() const {
  double q = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < tets_.size(); ++t) q = std::min(q, quality(static_cast<int>(t)));
  return q;
}

double Mesh::total_volume() const {
  double v = 0.0;
  for (std::size_t t = 0; t < tets_.size(); ++t) v += volume(static_cast<int>(t));
  return v;
}

int Mesh::find_edge(int a, int b) const {
  if (a > b) std::swap(a, b);
  const std::array<int, 2> key{a, b};
  const auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
  if (it == edges_.end() || *it != key) return -1;
  return static_cast<int>(it - edges_.begin());
}

bool Mesh::contains(int t, const Vec3& x, double tol) const {
  const auto p = corners(t);
  Eigen::Matrix3d j;
  j << p[1] - p[0], p[2] - p[0], p[3] - p[0];
  const Vec3 l = j.partialPivLu().solve(x - p[0]);
  const double l0 = 1.0 - l.sum();
  return l0 >= -tol && l(0) >= -tol && l(1) >= -tol && l(2) >= -tol;
}

Mesh build_topology(std::vector<Tet> tets, std::vector<Vec3> vertices, int level) {
  if (tets.empty()) throw TopologyError("mesh has no tetrahedra");
  const int nv = static_cast<int>(vertices.size());
  for (const auto& v : vertices) {
    if (!v.allFinite()) throw GeometryError("non-finite vertex coordinate");
  }

  for (std::size_t t = 0; t < tets.size(); ++t) {
    const auto& tv = tets[t].verts;
    for (int i = 0; i < 4; ++i) {
      if (tv[i] < 0 || tv[i] >= nv) {
        throw TopologyError("tet " + std::to_string(t) + " has an invalid vertex index");
      }
      for (int j = 0; j < i; ++j) {
        if (tv[i] == tv[j]) {
          throw TopologyError("tet " + std::to_string(t) + " repeats a vertex");
        }
      }
    }
    if (tets[t].tag < 1 || tets[t].tag > 3) {
      throw TopologyError("tet " + std::to_string(t) + " has an invalid bisection tag");
    }
    const double vol = std::abs(signed_volume(vertices[tv[0]], vertices[tv[1]],
                                              vertices[tv[2]], vertices[tv[3]]));
    double h = 0.0;
    for (const auto& e : kLocalEdges) {
      h = std::max(h, (vertices[tv[e[0]]] - vertices[tv[e[1]]]).norm());
    }
    if (!(vol > 1e-14 * h * h * h) || h == 0.0) {
      throw GeometryError("tet " + std::to_string(t) + " is degenerate");
    }
  }

  Mesh m;
  m.level_ = level;
  const std::size_t nt = tets.size();

  std::vector<std::array<int, 2>> edges;
  edges.reserve(6 * nt);
  std::vector<std::array<int, 3>> faces;
  faces.reserve(4 * nt);
  for (const auto& t : tets) {
    for (const auto& e : kLocalEdges) {
      std::array<int, 2> k{t.verts[e[0]], t.verts[e[1]]};
      std::sort(k.begin(), k.end());
      edges.push_back(k);
    }
    for (const auto& f : kLocalFaces) {
      std::array<int, 3> k{t.verts[f[0]], t.verts[f[1]], t.verts[f[2]]};
      std::sort(k.begin(), k.end());
      faces.push_back(k);
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  std::sort(faces.begin(), faces.end());
  faces.erase(std::unique(faces.begin(), faces.end()), faces.end());

  m.tet_edges_.resize(nt);
  m.tet_faces_.resize(nt);
  m.face_tets_.assign(faces.size(), {-1, -1});
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& tv = tets[t].verts;
    for (int le = 0; le < 6; ++le) {
      std::array<int, 2> k{tv[kLocalEdges[le][0]], tv[kLocalEdges[le][1]]};
      std::sort(k.begin(), k.end());
      m.tet_edges_[t][le] =
          static_cast<int>(std::lower_bound(edges.begin(), edges.end(), k) - edges.begin());
    }
    for (int lf = 0; lf < 4; ++lf) {
      std::array<int, 3> k{tv[kLocalFaces[lf][0]], tv[kLocalFaces[lf][1]], tv[kLocalFaces[lf][2]]};
      std::sort(k.begin(), k.end());
      const int f =
          static_cast<int>(std::lower_bound(faces.begin(), faces.end(), k) - faces.begin());
      m.tet_faces_[t][lf] = f;
      auto& ft = m.face_tets_[f];
      if (ft[0] < 0) {
        ft[0] = static_cast<int>(t);
      } else if (ft[1] < 0) {
        ft[1] = static_cast<int>(t);
      } else {
        throw TopologyError("face shared by more than two tetrahedra");
      }
    }
  }

  m.boundary_faces_.assign(faces.size(), 0);
  m.boundary_edges_.assign(edges.size(), 0);
  m.boundary_vertices_.assign(vertices.size(), 0);
  for (std::size_t f = 0; f < faces.size(); ++f) {
    if (m.face_tets_[f][1] >= 0) continue;
    m.boundary_faces_[f] = 1;
    const auto& fv = faces[f];
    for (int i = 0; i < 3; ++i) m.boundary_vertices_[fv[i]] = 1;
  }
  for (std::size_t t = 0; t < nt; ++t) {
    for (int lf = 0; lf < 4; ++lf) {
      if (!m.boundary_faces_[m.tet_faces_[t][lf]]) continue;
      // Edges of face lf are the local edges not touching local vertex lf.
      for (int le = 0; le < 6; ++le) {
        if (kLocalEdges[le][0] != lf && kLocalEdges[le][1] != lf) {
          m.boundary_edges_[m.tet_edges_[t][le]] = 1;
        }
      }
    }
  }

  m.vertices_ = std::move(vertices);
  m.tets_ = std::move(tets);
  m.edges_ = std::move(edges);
  m.faces_ = std::move(faces);
  return m;
}

namespace {

/// Mutable bisection workspace: tets with liveness flags, an edge-to-tets
/// incidence map and the midpoints created so far.
class BisectionWorkspace {
public:
  explicit BisectionWorkspace(const Mesh& mesh)
      : vertices_(mesh.vertices()), tets_(mesh.tets()), alive_(tets_.size(), 1) {
    for (std::size_t t = 0; t < tets_.size(); ++t) attach(static_cast<int>(t));
  }

  bool alive(int t) const { return alive_[t] != 0; }

  void bisect_one(int t) {
    const auto [a, b] = tets_[t].refinement_edge();
    split(t, midpoint(a, b));
  }

  /// Recursive closure: every tet sharing the refinement edge of t is first
  /// brought to the same refinement edge, then the whole patch is bisected.
  void refine_tet(int t, int depth, int max_depth) {
    const auto [a, b] = tets_[t].refinement_edge();
    refine_edge(a, b, depth, max_depth);
  }

  Mesh finish(int level) {
    std::vector<Tet> out;
    out.reserve(tets_.size());
    for (std::size_t t = 0; t < tets_.size(); ++t) {
      if (alive_[t]) out.push_back(tets_[t]);
    }
    return build_topology(std::move(out), std::move(vertices_), level);
  }

private:
  void refine_edge(int a, int b, int depth, int max_depth) {
    if (depth > max_depth) {
      throw RefinementError("bisection closure exceeded depth bound " +
                            std::to_string(max_depth));
    }
    const std::uint64_t key = edge_key(a, b);
    for (;;) {
      const auto it = edge_tets_.find(key);
      if (it == edge_tets_.end() || it->second.empty()) return;
      int incompatible = -1;
      for (int t : it->second) {
        const auto [c, d] = tets_[t].refinement_edge();
        if (edge_key(c, d) != key) {
          incompatible = t;
          break;
        }
      }
      if (incompatible < 0) break;
      refine_tet(incompatible, depth + 1, max_depth);
    }
    const std::vector<int> patch = edge_tets_[key];
    const int z = midpoint(a, b);
    for (int t : patch) split(t, z);
  }

  int midpoint(int a, int b) {
    const std::uint64_t key = edge_key(a, b);
    if (const auto it = midpoints_.find(key); it != midpoints_.end()) return it->second;
    const int z = static_cast<int>(vertices_.size());
    vertices_.push_back(0.5 * (vertices_[a] + vertices_[b]));
    midpoints_.emplace(key, z);
    return z;
  }

  void split(int t, int z) {
    const Tet parent = tets_[t];
    detach(t);
    alive_[t] = 0;
    const int k = parent.tag;
    const auto& x = parent.verts;
    Tet c0;
    Tet c1;
    // Maubach bisection: (x0..x_{k-1}, z, x_{k+1}..x3) and (x1..x_k, z, x_{k+1}..x3).
    int i0 = 0;
    for (int i = 0; i < k; ++i) c0.verts[i0++] = x[i];
    c0.verts[i0++] = z;
    for (int i = k + 1; i < 4; ++i) c0.verts[i0++] = x[i];
    int i1 = 0;
    for (int i = 1; i <= k; ++i) c1.verts[i1++] = x[i];
    c1.verts[i1++] = z;
    for (int i = k + 1; i < 4; ++i) c1.verts[i1++] = x[i];
    const int tag = k > 1 ? k - 1 : 3;
    c0.tag = c1.tag = tag;
    c0.lineage = parent.lineage.child(0);
    c1.lineage = parent.lineage.child(1);
    for (const Tet& c : {c0, c1}) {
      tets_.push_back(c);
      alive_.push_back(1);
      attach(static_cast<int>(tets_.size() - 1));
    }
  }

  void attach(int t) {
    const auto& v = tets_[t].verts;
    for (const auto& e : kLocalEdges) edge_tets_[edge_key(v[e[0]], v[e[1]])].push_back(t);
  }

  void detach(int t) {
    const auto& v = tets_[t].verts;
    for (const auto& e : kLocalEdges) {
      auto& list = edge_tets_[edge_key(v[e[0]], v[e[1]])];
      list.erase(std::find(list.begin(), list.end(), t));
    }
  }

  std::vector<Vec3> vertices_;
  std::vector<Tet> tets_;
  std::vector<char> alive_;
  std::unordered_map<std::uint64_t, std::vector<int>> edge_tets_;
  std::unordered_map<std::uint64_t, int> midpoints_;
};

} // namespace

Mesh bisect(const Mesh& mesh, int tet_id) {
  if (tet_id < 0 || tet_id >= static_cast<int>(mesh.num_tets())) {
    throw ArgumentError("tet id out of range");
  }
  BisectionWorkspace ws(mesh);
  ws.bisect_one(tet_id);
  return ws.finish(mesh.level() + 1);
}

Mesh refine(const Mesh& mesh, const std::vector<int>& marked, int max_depth) {
  if (marked.empty()) return mesh;
  std::vector<int> order(marked);
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());
  for (int t : order) {
    if (t < 0 || t >= static_cast<int>(mesh.num_tets())) {
      throw ArgumentError("marked tet id out of range");
    }
  }
  BisectionWorkspace ws(mesh);
  for (int t : order) {
    if (ws.alive(t)) ws.refine_tet(t, 0, max_depth);
  }
  return ws.finish(mesh.level() + 1);
}

Mesh refine_uniform(const Mesh& mesh) {
  std::vector<int> all(mesh.num_tets());
  std::iota(all.begin(), all.end(), 0);
  return refine(mesh, all);
}

std::vector<int> ancestors_not_in(const Mesh& coarse, const Mesh& fine) {
  // Validates nestedness as a side effect.
  const std::vector<int> anc = coarse_ancestor_map(coarse, fine);
  std::vector<char> survives(coarse.num_tets(), 0);
  for (std::size_t t = 0; t < fine.num_tets(); ++t) {
    if (fine.tets()[t].lineage == coarse.tets()[anc[t]].lineage) survives[anc[t]] = 1;
  }
  std::vector<int> out;
  for (std::size_t t = 0; t < coarse.num_tets(); ++t) {
    if (!survives[t]) out.push_back(static_cast<int>(t));
  }
  return out;
}

std::vector<int> coarse_ancestor_map(const Mesh& coarse, const Mesh& fine) {
  std::unordered_map<Lineage, int, LineageHash> index;
  index.reserve(coarse.num_tets());
  std::uint32_t max_gen = 0;
  for (std::size_t t = 0; t < coarse.num_tets(); ++t) {
    index.emplace(coarse.tets()[t].lineage, static_cast<int>(t));
    max_gen = std::max(max_gen, coarse.tets()[t].lineage.gen);
  }
  std::vector<int> out(fine.num_tets(), -1);
  std::vector<double> covered(coarse.num_tets(), 0.0);
  for (std::size_t t = 0; t < fine.num_tets(); ++t) {
    const Lineage& l = fine.tets()[t].lineage;
    for (std::int64_t g = std::min<std::int64_t>(l.gen, max_gen); g >= 0; --g) {
      const auto it = index.find(l.ancestor(static_cast<std::uint32_t>(g)));
      if (it != index.end()) {
        out[t] = it->second;
        break;
      }
    }
    if (out[t] < 0) throw LineageError("fine mesh is not a refinement of the coarse mesh");
    covered[out[t]] += fine.volume(static_cast<int>(t));
  }
  for (std::size_t t = 0; t < coarse.num_tets(); ++t) {
    const double v = coarse.volume(static_cast<int>(t));
    if (std::abs(covered[t] - v) > 1e-10 * std::max(v, 1e-300)) {
      throw LineageError("coarse tet not exactly covered by its descendants");
    }
  }
  return out;
}

namespace {

// Kuhn simplices of the cube with lower corner `o` and side `h`: one per
// permutation of the axes, ordered corner, +e_p0, +e_p0+e_p1, opposite corner.
void add_kuhn_cube(const Vec3& o, double h, const std::function<int(const Vec3&)>& vertex,
                   std::vector<Tet>& tets) {
  std::array<int, 3> perm{0, 1, 2};
  do {
    Vec3 p = o;
    Tet t;
    t.verts[0] = vertex(p);
    for (int i = 0; i < 3; ++i) {
      p(perm[i]) += h;
      t.verts[i + 1] = vertex(p);
    }
    t.tag = 3;
    t.lineage = Lineage{static_cast<std::uint32_t>(tets.size()), 0, 0};
    tets.push_back(t);
  } while (std::next_permutation(perm.begin(), perm.end()));
}

Mesh generate_from_cubes(const std::vector<Vec3>& origins, double side, int n) {
  std::vector<Vec3> vertices;
  std::map<std::array<long long, 3>, int> ids;
  // Vertices sit on a lattice of spacing side/n; index them by integer coords.
  const double step = side / n;
  auto vertex = [&](const Vec3& p) {
    std::array<long long, 3> k{std::llround(p(0) / step), std::llround(p(1) / step),
                               std::llround(p(2) / step)};
    const auto [it, inserted] = ids.emplace(k, static_cast<int>(vertices.size()));
    if (inserted) {
      vertices.emplace_back(static_cast<double>(k[0]) * step, static_cast<double>(k[1]) * step,
                            static_cast<double>(k[2]) * step);
    }
    return it->second;
  };
  std::vector<Tet> tets;
  for (const Vec3& o : origins) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
          add_kuhn_cube(o + step * Vec3(i, j, k), step, vertex, tets);
        }
      }
    }
  }
  return build_topology(std::move(tets), std::move(vertices), 0);
}

} // namespace

Mesh generate_cube(int n) {
  if (n < 1) throw ArgumentError("cube subdivisions must be >= 1");
  return generate_from_cubes({Vec3(0, 0, 0)}, 1.0, n);
}

Mesh generate_fichera(int n) {
  if (n < 1) throw ArgumentError("fichera subdivisions must be >= 1");
  std::vector<Vec3> origins;
  for (int i = -1; i <= 0; ++i) {
    for (int j = -1; j <= 0; ++j) {
      for (int k = -1; k <= 0; ++k) {
        if (i == 0 && j == 0 && k == 0) continue;
        origins.emplace_back(i, j, k);
      }
    }
  }
  return generate_from_cubes(origins, 1.0, n);
}

bool is_conforming(const Mesh& mesh) {
  std::vector<int> incidence(mesh.num_faces(), 0);
  for (const auto& tf : mesh.tet_faces()) {
    for (int f : tf) ++incidence[f];
  }
  for (int c : incidence) {
    if (c < 1 || c > 2) return false;
  }
  // A hanging node of a bisection mesh sits exactly at the midpoint of some
  // edge, so an edge midpoint that coincides with a vertex breaks conformity.
  struct Hash {
    std::size_t operator()(const std::array<double, 3>& p) const noexcept {
      std::size_t h = 0;
      for (double x : p) h = h * 1000003u ^ std::hash<double>{}(x);
      return h;
    }
  };
  std::unordered_set<std::array<double, 3>, Hash> points;
  for (const auto& v : mesh.vertices()) points.insert({v(0), v(1), v(2)});
  for (const auto& e : mesh.edges()) {
    const Vec3 m = 0.5 * (mesh.vertices()[e[0]] + mesh.vertices()[e[1]]);
    if (points.count({m(0), m(1), m(2)})) return false;
  }
  return true;
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
  os << mesh.num_tets() << ' ' << mesh.num_vertices() << '\n';
  os << std::setprecision(17);
  for (const auto& v : mesh.vertices()) os << v(0) << ' ' << v(1) << ' ' << v(2) << '\n';
  for (const auto& t : mesh.tets()) {
    os << t.verts[0] << ' ' << t.verts[1] << ' ' << t.verts[2] << ' ' << t.verts[3] << ' '
       << t.tag << '\n';
  }
}

Mesh read_mesh(std::istream& is) {
  long long nt = 0;
  long long nv = 0;
  if (!(is >> nt >> nv) || nt <= 0 || nv <= 0) throw IoError("bad mesh header");
  std::vector<Vec3> vertices(static_cast<std::size_t>(nv));
  for (auto& v : vertices) {
    if (!(is >> v(0) >> v(1) >> v(2))) throw IoError("truncated vertex list");
  }
  std::vector<Tet> tets(static_cast<std::size_t>(nt));
  for (std::size_t t = 0; t < tets.size(); ++t) {
    auto& tet = tets[t];
    if (!(is >> tet.verts[0] >> tet.verts[1] >> tet.verts[2] >> tet.verts[3] >> tet.tag)) {
      throw IoError("truncated tetrahedron list");
    }
    tet.lineage = Lineage{static_cast<std::uint32_t>(t), 0, 0};
  }
  return build_topology(std::move(tets), std::move(vertices), 0);
}

void write_mesh_file(const std::string& path, const Mesh& mesh) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write_mesh(os, mesh);
  if (!os) throw IoError("write failed: " + path);
}

Mesh read_mesh_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  return read_mesh(is);
}

} // namespace mafem
