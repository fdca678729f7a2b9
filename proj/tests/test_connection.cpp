#include <catch2/catch_amalgamated.hpp>

#include "qdimer/connection.hpp"
#include "qdimer/enumerate.hpp"
#include "qdimer/lattice.hpp"

using namespace qdimer;

static Connection one_zipper(Zipper z) {
  Connection c;
  c.zippers.push_back(std::move(z));
  return c;
}

TEST_CASE("vertical zipper crosses one column strip") {
  Temperleyan t = temperleyan_graph(build_rectangle(3, 3));
  std::mt19937_64 rng(3);
  Matrix2 a = random_sl2(rng);
  Zipper z = vertical_zipper_down(t.g, 2, 4, a);
  CHECK(z.edges.size() == 5);  // y2 = 4,3,2,1,0
  for (size_t i = 0; i + 1 < z.edges.size(); ++i) {
    const Edge& hi = t.g.edges[z.edges[i]];
    const Edge& lo = t.g.edges[z.edges[i + 1]];
    CHECK(t.g.vertices[hi.u].y2 > t.g.vertices[lo.u].y2);
  }
  // a ray through the whole graph leaves every interior face flat and every
  // contractible loop trivial
  Connection c = one_zipper(z);
  Diagnostics d = check_flat(t.g, c);
  INFO(d.summary());
  CHECK(d.ok);
}

TEST_CASE("hole zipper is flat away from the hole") {
  RegionSpec s;
  s.nx = s.ny = 6;
  s.holes.push_back({2, 2, 1, 1, std::nullopt});
  Temperleyan t = temperleyan_graph(build_grid_region(s));
  std::mt19937_64 rng(4);
  Matrix2 a = random_sl2(rng);
  Connection c = one_zipper(vertical_zipper_down(t.g, 5, 4, a));

  // find the hole face: stamped boundary, positive area
  FaceId hole = -1, outer = -1;
  for (const Face& f : t.g.faces)
    if (f.boundary) (f.area > 0 ? hole : outer) = f.id;
  REQUIRE(hole >= 0);
  REQUIRE(outer >= 0);

  Diagnostics d = check_flat(t.g, c);
  INFO(d.summary());
  CHECK(d.ok);

  // walking around the hole crosses the zipper once
  Matrix2 w = face_monodromy(t.g, c, hole);
  CHECK(std::abs(w.trace() - a.trace()) < 1e-12);
  CHECK(std::abs(w.det() - 1.0) < 1e-12);
}

TEST_CASE("monodromy trace ignores direction and basepoint") {
  RegionSpec s;
  s.nx = s.ny = 6;
  s.holes.push_back({2, 2, 1, 1, std::nullopt});
  Temperleyan t = temperleyan_graph(build_grid_region(s));
  std::mt19937_64 rng(5);
  Connection c = one_zipper(vertical_zipper_down(t.g, 5, 4, random_sl2(rng)));
  FaceId hole = -1;
  for (const Face& f : t.g.faces)
    if (f.boundary && f.area > 0) hole = f.id;

  const Face& f = t.g.faces[hole];
  std::vector<EdgeId> walk;
  for (int h : f.half_edges) walk.push_back(t.g.hedge(h));
  VertexId v0 = t.g.hsrc(f.half_edges.front());
  cplx tr = monodromy(t.g, c, v0, walk).trace();

  std::vector<EdgeId> rev(walk.rbegin(), walk.rend());
  CHECK(std::abs(monodromy(t.g, c, v0, rev).trace() - tr) < 1e-12);

  // rotate the walk to a different basepoint
  std::vector<EdgeId> rot(walk.begin() + 1, walk.end());
  rot.push_back(walk.front());
  VertexId v1 = t.g.other(walk.front(), v0);
  CHECK(std::abs(monodromy(t.g, c, v1, rot).trace() - tr) < 1e-12);
}

TEST_CASE("gauge transforms preserve loop traces") {
  Temperleyan t = temperleyan_graph(build_rectangle(4, 4));
  std::mt19937_64 rng(6);
  Connection c = one_zipper(vertical_zipper_down(t.g, 3, 6, random_sl2(rng)));
  std::vector<Matrix2> psi;
  for (size_t i = 0; i < t.g.vertices.size(); ++i) psi.push_back(random_sl2(rng));
  Connection cg = gauge_transform(c, psi);

  for (FaceId f : t.g.interior_faces()) {
    cplx t0 = face_monodromy(t.g, c, f).trace();
    cplx t1 = face_monodromy(t.g, cg, f).trace();
    CHECK(std::abs(t0 - t1) < 1e-10);
  }
  // transports themselves do change
  bool changed = false;
  for (const Edge& e : t.g.edges)
    if (dist(transport(t.g, c, e.id, e.u), transport(t.g, cg, e.id, e.u)) > 1e-6)
      changed = true;
  CHECK(changed);
}

TEST_CASE("cylinder axial zipper catches exactly the winding") {
  PlanarGraph g = cylinder_graph(3, 2);
  std::mt19937_64 rng(7);
  Matrix2 a = random_sl2(rng);
  Connection c = one_zipper(cylinder_axial_zipper(g, 2, a));

  Diagnostics d = check_flat(g, c);
  INFO(d.summary());
  CHECK(d.ok);

  // girth loop around the bottom row crosses the zipper once
  std::vector<EdgeId> walk;
  for (int x = 0; x < 6; ++x) walk.push_back(cylinder_hedge(g, x, 1));
  Matrix2 w = monodromy(g, c, 0, walk);
  CHECK(std::abs(w.trace() - a.trace()) < 1e-12);

  // a doubled circuit picks up the square
  std::vector<EdgeId> twice = walk;
  twice.insert(twice.end(), walk.begin(), walk.end());
  CHECK(std::abs(monodromy(g, c, 0, twice).trace() - (a * a).trace()) < 1e-12);
}

TEST_CASE("parallel edges on the thin cylinder") {
  PlanarGraph g = cylinder_graph(1, 1);
  std::mt19937_64 rng(8);
  Matrix2 a = random_sl2(rng);
  Connection c = one_zipper(cylinder_axial_zipper(g, 0, a));
  // the two parallel edges form a winding loop
  Matrix2 w = monodromy(g, c, 0, {0, 1});
  CHECK(std::abs(w.trace() - a.trace()) < 1e-12);
}

TEST_CASE("connection path deforms geodesically") {
  PlanarGraph g = cylinder_graph(3, 2);
  std::mt19937_64 rng(9);
  Matrix2 a = random_sl2(rng);
  Connection c = one_zipper(cylinder_axial_zipper(g, 0, a));
  CHECK(dist(connection_path(c, 0.0).zippers[0].matrix, Matrix2::identity()) < 1e-12);
  CHECK(dist(connection_path(c, 1.0).zippers[0].matrix, a) < 1e-10);
  Matrix2 h = connection_path(c, 0.5).zippers[0].matrix;
  CHECK(dist(h * h, a) < 1e-10);
}

TEST_CASE("connection json round trip") {
  Temperleyan t = temperleyan_graph(build_rectangle(3, 3));
  std::mt19937_64 rng(10);
  Connection c = one_zipper(vertical_zipper_down(t.g, 2, 4, random_sl2(rng)));
  c.marked.insert(3);
  Connection back = connection_from_json(to_json(c));
  CHECK(back.zippers.size() == 1);
  CHECK(back.zippers[0].edges == c.zippers[0].edges);
  CHECK(back.zippers[0].signs == c.zippers[0].signs);
  CHECK(dist(back.zippers[0].matrix, c.zippers[0].matrix) < 1e-15);
  CHECK(back.marked == c.marked);
}
