#pragma once

#include "mafem/common.hpp"

#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace mafem {

/// Position of a tetrahedron inside the bisection forest rooted at the
/// initial mesh: `path` holds one bit per bisection (most recent in the low
/// bit), so the ancestor `g` generations up is obtained by shifting.
struct Lineage {
  std::uint32_t root = 0;
  std::uint32_t gen = 0;
  std::uint64_t path = 0;

  static constexpr std::uint32_t max_generation = 63;

  Lineage child(int which) const;
  /// Ancestor at generation `g <= gen`.
  Lineage ancestor(std::uint32_t g) const;
  bool operator==(const Lineage&) const = default;
};

struct LineageHash {
  std::size_t operator()(const Lineage& l) const noexcept;
};

/// Tetrahedron in bisection-canonical order. The refinement edge is
/// (verts[0], verts[tag]); tag cycles 3 -> 2 -> 1 -> 3 under bisection.
struct Tet {
  std::array<int, 4> verts{};
  int tag = 3;
  Lineage lineage;

  int gen() const { return static_cast<int>(lineage.gen); }
  std::pair<int, int> refinement_edge() const { return {verts[0], verts[tag]}; }
};

/// Local edge numbering shared by the mesh tables and the edge elements.
inline constexpr std::array<std::array<int, 2>, 6> kLocalEdges{
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

/// Local face i is opposite local vertex i.
inline constexpr std::array<std::array<int, 3>, 4> kLocalFaces{
    {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}}};

/// Conforming tetrahedral mesh with derived edge/face tables. Immutable once
/// built: refinement returns a new mesh.
class Mesh {
public:
  Mesh() = default;

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Tet>& tets() const { return tets_; }
  const std::vector<std::array<int, 2>>& edges() const { return edges_; }
  const std::vector<std::array<int, 3>>& faces() const { return faces_; }
  /// Neighbors of each face; the second entry is -1 on the boundary.
  const std::vector<std::array<int, 2>>& face_tets() const { return face_tets_; }
  const std::vector<std::array<int, 6>>& tet_edges() const { return tet_edges_; }
  const std::vector<std::array<int, 4>>& tet_faces() const { return tet_faces_; }
  const std::vector<char>& boundary_faces() const { return boundary_faces_; }
  const std::vector<char>& boundary_edges() const { return boundary_edges_; }
  const std::vector<char>& boundary_vertices() const { return boundary_vertices_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_tets() const { return tets_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t num_faces() const { return faces_.size(); }
  int level() const { return level_; }

  std::array<Vec3, 4> corners(int t) const;
  double volume(int t) const;
  Vec3 barycenter(int t) const;
  /// Diameter of a tetrahedron: its longest edge.
  double diameter(int t) const;
  /// Diameter of a face: its longest edge.
  double face_diameter(int f) const;
  double face_area(int f) const;
  /// Normalized inradius/circumradius ratio (1 for the regular tetrahedron).
  double quality(int t) const;
  double min_quality() const;
  double total_volume() const;

  /// Index of the edge (a, b) or -1.
  int find_edge(int a, int b) const;

  bool contains(int t, const Vec3& x, double tol = 1e-12) const;

private:
  friend Mesh build_topology(std::vector<Tet> tets, std::vector<Vec3> vertices,
                             int level);

  std::vector<Vec3> vertices_;
  std::vector<Tet> tets_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<int, 3>> faces_;
  std::vector<std::array<int, 2>> face_tets_;
  std::vector<std::array<int, 6>> tet_edges_;
  std::vector<std::array<int, 4>> tet_faces_;
  std::vector<char> boundary_faces_;
  std::vector<char> boundary_edges_;
  std::vector<char> boundary_vertices_;
  int level_ = 0;
};

/// Derives edges, faces, incidence and boundary flags. Throws TopologyError
/// for a face shared by more than two tets or bad indices, GeometryError for
/// a degenerate tet.
Mesh build_topology(std::vector<Tet> tets, std::vector<Vec3> vertices, int level = 0);

/// Bisects one tet (and nothing else). The result may contain a hanging
/// node; use refine() for conforming refinement.
Mesh bisect(const Mesh& mesh, int tet_id);

/// Smallest conforming refinement in which no marked tet survives.
Mesh refine(const Mesh& mesh, const std::vector<int>& marked, int max_depth = 64);

/// refine() with every tet marked.
Mesh refine_uniform(const Mesh& mesh);

/// Tets of `coarse` that are not tets of `fine` (the refined ones).
std::vector<int> ancestors_not_in(const Mesh& coarse, const Mesh& fine);

/// For every tet of `fine`, the index of the tet of `coarse` containing it.
/// Throws LineageError when the meshes are not nested.
std::vector<int> coarse_ancestor_map(const Mesh& coarse, const Mesh& fine);

/// Kuhn decomposition of (0,1)^3 into n^3 cubes of 6 tets each.
Mesh generate_cube(int n);
/// Fichera corner (-1,1)^3 minus [0,1)^3, 7 cubes of side 1 each split into
/// n^3 Kuhn cubes.
Mesh generate_fichera(int n);

/// Checks the face incidence invariant (each face has one or two tets).
bool is_conforming(const Mesh& mesh);

/// Text format: `ntet nvert`, then `x y z` lines, then `v0 v1 v2 v3 tag`.
void write_mesh(std::ostream& os, const Mesh& mesh);
Mesh read_mesh(std::istream& is);
void write_mesh_file(const std::string& path, const Mesh& mesh);
Mesh read_mesh_file(const std::string& path);

} // namespace mafem
