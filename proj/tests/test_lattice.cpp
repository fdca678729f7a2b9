#include <catch2/catch_amalgamated.hpp>

#include "qdimer/lattice.hpp"

using namespace qdimer;

TEST_CASE("plain rectangle region") {
  GridRegion r = build_rectangle(3, 3);
  CHECK(r.graph.vertices.size() == 9);
  CHECK(r.graph.edges.size() == 12);
  CHECK(r.cells.size() == 4);
  CHECK(r.x0 == std::make_pair(0, 0));
  Diagnostics d = validate_embedding(r.graph);
  INFO(d.summary());
  CHECK(d.ok);
  CHECK(r.graph.interior_faces().size() == 4);
  CHECK(r.graph.boundary_face_count() == 1);
  for (FaceId f : r.graph.interior_faces()) CHECK(r.graph.faces[f].area > 0.0);
}

TEST_CASE("derived graph of the 2x2 rectangle") {
  Temperleyan t = temperleyan_graph(build_rectangle(2, 2));
  CHECK(t.g.vertices.size() == 8);
  CHECK(t.g.whites().size() == 4);
  CHECK(t.g.blacks().size() == 4);
  Diagnostics d = validate_embedding(t.g);
  INFO(d.summary());
  CHECK(d.ok);
  // x0 = (0,0) removed: no site at half-step (0,0)
  CHECK_FALSE(t.has(0, 0));
  CHECK(t.has(2, 0));
  CHECK(t.g.vertices[t.id(1, 1)].cls == VertexClass::B1);
  CHECK(t.g.vertices[t.id(1, 0)].cls == VertexClass::W0);
  CHECK(t.g.vertices[t.id(0, 1)].cls == VertexClass::W1);
}

TEST_CASE("derived graph of the 3x3 rectangle") {
  Temperleyan t = temperleyan_graph(build_rectangle(3, 3));
  // 8 kept vertices + 4 cells vs 6 horizontal + 6 vertical edges
  CHECK(t.g.blacks().size() == 12);
  CHECK(t.g.whites().size() == 12);
  Diagnostics d = validate_embedding(t.g);
  INFO(d.summary());
  CHECK(d.ok);
}

TEST_CASE("one-cell hole") {
  RegionSpec s;
  s.nx = s.ny = 6;
  s.holes.push_back({2, 2, 1, 1, std::nullopt});
  GridRegion r = build_grid_region(s);
  // a unit hole removes no vertices or edges, only the cell
  CHECK(r.graph.vertices.size() == 36);
  CHECK(r.graph.edges.size() == 60);
  CHECK(r.cells.size() == 24);
  CHECK_FALSE(r.has_cell(2, 2));
  CHECK(r.graph.boundary_face_count() == 2);
  Diagnostics d = validate_embedding(r.graph);
  INFO(d.summary());
  CHECK(d.ok);
  CHECK(r.removed_edges == std::vector<std::pair<int, int>>{{2, 3}});

  Temperleyan t = temperleyan_graph(r);
  CHECK(t.g.blacks().size() == 35 + 24);
  CHECK(t.g.whites().size() == 29 + 30);
  CHECK_FALSE(t.has(2 * 2 + 1, 2 * 3));  // removed edge site is absent
  Diagnostics dt = validate_embedding(t.g);
  INFO(dt.summary());
  CHECK(dt.ok);
  CHECK(t.g.boundary_face_count() == 2);
}

TEST_CASE("two-by-two hole removes the center vertex") {
  RegionSpec s;
  s.nx = s.ny = 7;
  s.holes.push_back({2, 2, 2, 2, std::nullopt});
  GridRegion r = build_grid_region(s);
  CHECK(r.graph.vertices.size() == 48);
  CHECK(r.graph.edges.size() == 80);
  CHECK(r.cells.size() == 32);
  CHECK_FALSE(r.has_vertex(3, 3));
  Diagnostics d = validate_embedding(r.graph);
  INFO(d.summary());
  CHECK(d.ok);
  CHECK(r.graph.boundary_face_count() == 2);

  Temperleyan t = temperleyan_graph(r);
  CHECK(t.g.blacks().size() == 47 + 32);
  CHECK(t.g.whites().size() == 79 - 40 + 40);  // 39 horizontal + 40 vertical
  Diagnostics dt = validate_embedding(t.g);
  INFO(dt.summary());
  CHECK(dt.ok);
}

TEST_CASE("region validation errors") {
  RegionSpec bad;
  bad.nx = 1;
  bad.ny = 5;
  CHECK_THROWS(build_grid_region(bad));

  RegionSpec touch;
  touch.nx = touch.ny = 5;
  touch.holes.push_back({0, 2, 1, 1, std::nullopt});  // touches outer boundary
  CHECK_THROWS(build_grid_region(touch));

  RegionSpec pair;
  pair.nx = pair.ny = 9;
  pair.holes.push_back({2, 2, 1, 1, std::nullopt});
  pair.holes.push_back({3, 2, 1, 1, std::nullopt});  // adjacent to the first
  CHECK_THROWS(build_grid_region(pair));

  RegionSpec mark;
  mark.nx = mark.ny = 5;
  mark.outer_mark = {{2, 2}};  // interior vertex cannot be x0
  CHECK_THROWS(build_grid_region(mark));

  RegionSpec edge;
  edge.nx = edge.ny = 6;
  edge.holes.push_back({2, 2, 1, 1, 3});  // removed edge not on hole top side
  CHECK_THROWS(build_grid_region(edge));
}

TEST_CASE("cylinder graphs") {
  PlanarGraph c11 = cylinder_graph(1, 1);
  CHECK(c11.vertices.size() == 2);
  CHECK(c11.edges.size() == 2);
  CHECK(c11.interior_faces().empty());
  CHECK(c11.boundary_face_count() == 2);
  Diagnostics d11 = validate_embedding(c11);
  INFO(d11.summary());
  CHECK(d11.ok);

  PlanarGraph c32 = cylinder_graph(3, 2);
  CHECK(c32.vertices.size() == 12);
  CHECK(c32.edges.size() == 18);
  CHECK(c32.interior_faces().size() == 6);
  CHECK(c32.boundary_face_count() == 2);
  Diagnostics d32 = validate_embedding(c32);
  INFO(d32.summary());
  CHECK(d32.ok);
  // edge id helpers agree with endpoints
  EdgeId h = cylinder_hedge(c32, 5, 1);
  CHECK(((c32.edges[h].u == 5 && c32.edges[h].v == 0)));
  EdgeId v = cylinder_vedge(c32, 2, 1);
  CHECK(c32.edges[v].u == 2);
  CHECK(c32.edges[v].v == 8);

  CHECK_THROWS(cylinder_graph(2, 2));  // even circumference parameter
  CHECK_THROWS(cylinder_graph(3, 0));
}

TEST_CASE("json round trip") {
  Temperleyan t = temperleyan_graph(build_rectangle(4, 3));
  PlanarGraph back = graph_from_json(to_json(t.g));
  CHECK(back.vertices.size() == t.g.vertices.size());
  CHECK(back.edges.size() == t.g.edges.size());
  CHECK(back.faces.size() == t.g.faces.size());
  CHECK(validate_embedding(back).ok);
  for (size_t i = 0; i < back.vertices.size(); ++i) {
    CHECK(back.vertices[i].x2 == t.g.vertices[i].x2);
    CHECK(back.vertices[i].cls == t.g.vertices[i].cls);
  }

  PlanarGraph c = cylinder_graph(3, 2);
  PlanarGraph cb = graph_from_json(to_json(c));
  CHECK(cb.cyl_n == 3);
  CHECK(cb.cyl_m == 2);
  CHECK(validate_embedding(cb).ok);
}
