#include "doctest.h"
#include "helpers.hpp"

#include "mafem/mesh.hpp"

#include <numeric>
#include <random>
#include <set>
#include <sstream>

using namespace mafem;

namespace {

std::set<std::array<int, 4>> tet_keys(const Mesh& m) {
  std::set<std::array<int, 4>> keys;
  for (const Tet& t : m.tets()) {
    std::array<int, 4> k = t.verts;
    std::sort(k.begin(), k.end());
    keys.insert(k);
  }
  return keys;
}

std::array<int, 4> sorted_key(const Tet& t) {
  std::array<int, 4> k = t.verts;
  std::sort(k.begin(), k.end());
  return k;
}

int count_interior_faces(const Mesh& m) {
  int n = 0;
  for (const auto& ft : m.face_tets()) n += ft[1] >= 0;
  return n;
}

} // namespace

TEST_CASE("single reference tet has 6 boundary edges and 4 boundary faces") {
  const Mesh m = testing::reference_tet();
  CHECK(m.num_edges() == 6);
  CHECK(m.num_faces() == 4);
  for (char b : m.boundary_faces()) CHECK(b);
  for (char b : m.boundary_edges()) CHECK(b);
  CHECK(m.volume(0) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
}

TEST_CASE("two tets glued on a face") {
  const Mesh m = testing::two_tets();
  CHECK(m.num_edges() == 9);
  CHECK(m.num_faces() == 7);
  CHECK(count_interior_faces(m) == 1);
  CHECK(is_conforming(m));
}

TEST_CASE("Kuhn cube tables equal the brute-force entity sets") {
  const Mesh m = generate_cube(1);
  CHECK(m.num_tets() == 6);
  CHECK(m.num_vertices() == 8);
  CHECK(m.num_edges() == 19);
  CHECK(m.num_faces() == 18);
  CHECK(is_conforming(m));
  std::set<std::array<int, 2>> edges;
  std::set<std::array<int, 3>> faces;
  for (const Tet& t : m.tets()) {
    for (const auto& e : kLocalEdges) {
      std::array<int, 2> k{t.verts[e[0]], t.verts[e[1]]};
      std::sort(k.begin(), k.end());
      edges.insert(k);
    }
    for (const auto& f : kLocalFaces) {
      std::array<int, 3> k{t.verts[f[0]], t.verts[f[1]], t.verts[f[2]]};
      std::sort(k.begin(), k.end());
      faces.insert(k);
    }
  }
  std::set<std::array<int, 2>> mesh_edges;
  for (auto e : m.edges()) {
    std::sort(e.begin(), e.end());
    mesh_edges.insert(e);
  }
  std::set<std::array<int, 3>> mesh_faces;
  for (auto f : m.faces()) {
    std::sort(f.begin(), f.end());
    mesh_faces.insert(f);
  }
  CHECK(edges == mesh_edges);
  CHECK(faces == mesh_faces);
  CHECK(m.total_volume() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("generator counts") {
  CHECK(generate_cube(2).num_tets() == 48);
  CHECK(generate_cube(2).num_vertices() == 27);
  CHECK(generate_fichera(1).num_tets() == 42);
  CHECK(generate_fichera(1).total_volume() == doctest::Approx(7.0).epsilon(1e-14));
  CHECK(is_conforming(generate_fichera(2)));
  CHECK_THROWS_AS(generate_cube(0), ArgumentError);
}

TEST_CASE("bisection of a single tet") {
  const Mesh m = testing::reference_tet();
  const Mesh b = bisect(m, 0);
  CHECK(b.num_tets() == 2);
  CHECK(b.num_vertices() == 5);
  CHECK(b.volume(0) + b.volume(1) == doctest::Approx(m.volume(0)).epsilon(1e-14));
  for (const Tet& t : b.tets()) CHECK(t.gen() == 1);

  Mesh g = m;
  for (int gen = 0; gen < 3; ++gen) {
    const int n = static_cast<int>(g.num_tets());
    for (int t = n - 1; t >= 0; --t) g = bisect(g, t);
  }
  CHECK(g.num_tets() == 8);
  CHECK(g.total_volume() == doctest::Approx(m.volume(0)).epsilon(1e-14));
  for (const Tet& t : g.tets()) CHECK(t.gen() == 3);
}

TEST_CASE("refine with an empty marking is the identity") {
  const Mesh m = generate_cube(1);
  const Mesh r = refine(m, {});
  CHECK(r.num_tets() == m.num_tets());
  CHECK(tet_keys(r) == tet_keys(m));
  CHECK(ancestors_not_in(m, r).empty());
}

TEST_CASE("refine with every tet marked") {
  const Mesh m = generate_cube(1);
  std::vector<int> all(m.num_tets());
  std::iota(all.begin(), all.end(), 0);
  const Mesh r = refine(m, all);
  CHECK(is_conforming(r));
  for (const Tet& t : r.tets()) CHECK(t.gen() >= 1);
  CHECK(ancestors_not_in(m, r).size() == m.num_tets());
  CHECK(refine_uniform(m).num_tets() == r.num_tets());
}

TEST_CASE("refining one tet of the Kuhn cube closes conformingly") {
  const Mesh m = generate_cube(1);
  for (int t = 0; t < 6; ++t) {
    const Mesh r = refine(m, {t});
    CHECK(is_conforming(r));
    CHECK(r.num_tets() >= m.num_tets() + 2);
    CHECK(tet_keys(r).count(sorted_key(m.tets()[t])) == 0);
    const auto gone = ancestors_not_in(m, r);
    CHECK(std::find(gone.begin(), gone.end(), t) != gone.end());
    // Every interior face is shared by exactly two tets.
    for (std::size_t f = 0; f < r.num_faces(); ++f) {
      CHECK((r.boundary_faces()[f] != 0) == (r.face_tets()[f][1] < 0));
    }
  }
}

TEST_CASE("ancestors_not_in") {
  const Mesh m = generate_cube(1);
  CHECK(ancestors_not_in(m, m).empty());
  const Mesh one = bisect(m, 2);
  CHECK(ancestors_not_in(m, one) == std::vector<int>{2});
}

TEST_CASE("nestedness and marked-element elimination over adaptive-like refinements") {
  std::mt19937_64 rng(7);
  Mesh m = generate_fichera(1);
  std::vector<double> quality{m.min_quality()};
  for (int level = 0; level < 10; ++level) {
    // Mark the tets touching the reentrant corner plus a few random ones.
    std::vector<int> marked;
    std::uniform_int_distribution<int> pick(0, static_cast<int>(m.num_tets()) - 1);
    for (std::size_t t = 0; t < m.num_tets(); ++t) {
      if (m.barycenter(static_cast<int>(t)).norm() < 0.6) marked.push_back(static_cast<int>(t));
    }
    for (int i = 0; i < 3; ++i) marked.push_back(pick(rng));
    std::sort(marked.begin(), marked.end());
    marked.erase(std::unique(marked.begin(), marked.end()), marked.end());

    const Mesh r = refine(m, marked);
    REQUIRE(is_conforming(r));
    const auto keys = tet_keys(r);
    for (int t : marked) CHECK(keys.count(sorted_key(m.tets()[t])) == 0);
    const auto anc = coarse_ancestor_map(m, r);
    for (std::size_t t = 0; t < r.num_tets(); ++t) {
      for (const Vec3& x : r.corners(static_cast<int>(t))) CHECK(m.contains(anc[t], x, 1e-12));
    }
    CHECK(r.total_volume() == doctest::Approx(7.0).epsilon(1e-12));
    m = r;
    quality.push_back(m.min_quality());
  }
  const double early = *std::min_element(quality.begin(), quality.begin() + 4);
  const double late = *std::min_element(quality.begin() + 4, quality.end());
  CHECK(late >= 0.999 * early);
}

TEST_CASE("coarse_ancestor_map rejects meshes that are not nested") {
  CHECK_THROWS_AS(coarse_ancestor_map(generate_cube(2), generate_cube(1)), LineageError);
}

TEST_CASE("build_topology input errors") {
  std::vector<Vec3> v{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  std::vector<Tet> bad(1);
  bad[0].verts = {0, 1, 2, 7};
  CHECK_THROWS_AS(build_topology(bad, v), TopologyError);
  std::vector<Vec3> flat{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}};
  std::vector<Tet> t(1);
  t[0].verts = {0, 1, 2, 3};
  CHECK_THROWS_AS(build_topology(t, flat), GeometryError);
  // Three tets on one face.
  std::vector<Vec3> w{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, 0, -1}, {1, 1, 1}};
  std::vector<Tet> three(3);
  three[0].verts = {0, 1, 2, 3};
  three[1].verts = {0, 1, 2, 4};
  three[2].verts = {0, 1, 2, 5};
  CHECK_THROWS_AS(build_topology(three, w), TopologyError);
}

TEST_CASE("lineage child and ancestor") {
  Lineage l;
  l.root = 5;
  const Lineage c = l.child(1).child(0).child(1);
  CHECK(c.gen == 3);
  CHECK(c.root == 5);
  CHECK(c.ancestor(0) == l);
  CHECK(c.ancestor(1) == l.child(1));
  CHECK(c.ancestor(2) == l.child(1).child(0));
}

TEST_CASE("mesh text round trip") {
  const Mesh m = refine(generate_cube(1), {0});
  std::stringstream ss;
  write_mesh(ss, m);
  const Mesh r = read_mesh(ss);
  REQUIRE(r.num_tets() == m.num_tets());
  REQUIRE(r.num_vertices() == m.num_vertices());
  for (std::size_t i = 0; i < m.num_vertices(); ++i) CHECK(r.vertices()[i] == m.vertices()[i]);
  for (std::size_t t = 0; t < m.num_tets(); ++t) {
    CHECK(r.tets()[t].verts == m.tets()[t].verts);
    CHECK(r.tets()[t].tag == m.tets()[t].tag);
  }
  std::stringstream junk("2 4\n0 0 0\n");
  CHECK_THROWS_AS(read_mesh(junk), IoError);
}
