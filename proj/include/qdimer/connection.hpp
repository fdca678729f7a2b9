#pragma once

// SL2 connections presented by zippers: each zipper is a dual path (a line
// segment avoiding vertices) with a matrix A; parallel transport across a
// crossed edge picks up A or A^{-1} by the crossing orientation. A single
// zipper from a hole to the outer boundary is flat away from those two faces,
// and a cylinder axial zipper is flat away from the rims.

#include <set>

#include <nlohmann/json.hpp>

#include "matrix2.hpp"
#include "planar_graph.hpp"

namespace qdimer {

struct Zipper {
  Matrix2 matrix = Matrix2::identity();
  std::vector<EdgeId> edges;  // crossed edges, in order along the zipper
  std::vector<int> signs;     // +1: white-to-black transport multiplies by A
};

struct Connection {
  std::vector<Zipper> zippers;
  std::vector<Matrix2> gauge;   // per-vertex; empty means trivial
  std::set<FaceId> marked;      // faces where curvature is allowed
};

// Orientation of a crossing: +1 when the white-to-black direction crosses the
// zipper from its left side to its right side (cross product negative).
inline int crossing_sign(int zdx, int zdy, int wbdx, int wbdy) {
  int cr = zdx * wbdy - zdy * wbdx;
  if (cr == 0) throw std::runtime_error("crossing_sign: edge parallel to zipper");
  return cr < 0 ? 1 : -1;
}

namespace detail {

inline std::pair<int, int> white_to_black_step(const PlanarGraph& g, EdgeId e) {
  const Edge& ed = g.edges[e];
  int d = is_white(g.vertices[ed.u].cls) ? ed.dir : (ed.dir + 2) % 4;
  const int dx[4] = {1, 0, -1, 0}, dy[4] = {0, 1, 0, -1};
  return {dx[d], dy[d]};
}

}  // namespace detail

// Zipper along a downward vertical line starting just below y2_top, crossing
// every horizontal edge departing column x2_left eastward (edge spans of 1
// and 2 both occur among the builders). On a region or its derived graph the
// line reaches the outer face; start inside a hole face to connect the hole
// to the outer boundary.
inline Zipper vertical_zipper_down(const PlanarGraph& g, int x2_left, int y2_top,
                                   const Matrix2& a) {
  if (g.surface == Surface::Cylinder)
    throw std::runtime_error("vertical_zipper_down: use cylinder_axial_zipper");
  Zipper z;
  z.matrix = a;
  std::vector<std::pair<int, EdgeId>> hits;  // (y2 of crossing, edge)
  for (const Edge& e : g.edges) {
    const Vertex &u = g.vertices[e.u], &v = g.vertices[e.v];
    if (u.y2 != v.y2) continue;  // horizontal edges only
    if (std::min(u.x2, v.x2) != x2_left) continue;
    if (u.y2 > y2_top) continue;
    hits.push_back({u.y2, e.id});
  }
  std::sort(hits.begin(), hits.end(), std::greater<>());  // top to bottom
  for (auto& [y, e] : hits) {
    (void)y;
    auto [dx, dy] = detail::white_to_black_step(g, e);
    z.edges.push_back(e);
    z.signs.push_back(crossing_sign(0, -1, dx, dy));
  }
  if (z.edges.empty()) throw std::runtime_error("vertical_zipper_down: crosses nothing");
  return z;
}

// Axial zipper on a cylinder: runs from the bottom rim to the top rim through
// the column strip between x = column_x and column_x + 1, crossing one
// horizontal edge per row. Loops around the cylinder cross it exactly once
// per winding.
inline Zipper cylinder_axial_zipper(const PlanarGraph& g, int column_x, const Matrix2& a) {
  if (g.surface != Surface::Cylinder)
    throw std::runtime_error("cylinder_axial_zipper: not a cylinder");
  Zipper z;
  z.matrix = a;
  for (int y = 1; y <= g.cyl_m; ++y) {
    EdgeId e = cylinder_hedge(g, column_x, y);
    const Edge& ed = g.edges[e];
    // unrolled step from u to v is east; white-to-black is east iff u is white
    int wbdx = is_white(g.vertices[ed.u].cls) ? 1 : -1;
    z.edges.push_back(e);
    z.signs.push_back(crossing_sign(0, 1, wbdx, 0));
  }
  return z;
}

// Parallel transport across edge e in the direction from -> other end.
inline Matrix2 transport(const PlanarGraph& g, const Connection& c, EdgeId e, VertexId from) {
  const Edge& ed = g.edges[e];
  if (from != ed.u && from != ed.v) throw std::runtime_error("transport: vertex not on edge");
  VertexId w = is_white(g.vertices[ed.u].cls) ? ed.u : ed.v;
  VertexId b = g.other(e, w);
  Matrix2 m = Matrix2::identity();
  for (const Zipper& z : c.zippers)
    for (size_t i = 0; i < z.edges.size(); ++i)
      if (z.edges[i] == e) m = (z.signs[i] > 0 ? z.matrix : z.matrix.inverse()) * m;
  if (!c.gauge.empty()) m = c.gauge[b] * m * c.gauge[w].inverse();
  if (from == w) return m;
  return m.inverse();
}

// Monodromy of a closed edge walk starting at `start`. Edges are given
// explicitly so parallel edges stay unambiguous; consecutive edges must share
// a vertex and the walk must return to `start`. Factors compose so that the
// first step acts first.
inline Matrix2 monodromy(const PlanarGraph& g, const Connection& c, VertexId start,
                         const std::vector<EdgeId>& walk) {
  Matrix2 m = Matrix2::identity();
  VertexId cur = start;
  for (EdgeId e : walk) {
    m = transport(g, c, e, cur) * m;
    cur = g.other(e, cur);
  }
  if (cur != start) throw std::runtime_error("monodromy: walk does not close");
  return m;
}

// New connection whose transports are psi_v phi psi_u^{-1}; traces of closed
// walks are unchanged up to conjugation at the basepoint.
inline Connection gauge_transform(const Connection& c, std::vector<Matrix2> psi) {
  Connection out = c;
  if (out.gauge.empty()) {
    out.gauge = std::move(psi);
  } else {
    if (out.gauge.size() != psi.size())
      throw std::runtime_error("gauge_transform: size mismatch");
    for (size_t i = 0; i < psi.size(); ++i) out.gauge[i] = psi[i] * out.gauge[i];
  }
  return out;
}

// Monodromy around the interior face left of its half-edge orbit.
inline Matrix2 face_monodromy(const PlanarGraph& g, const Connection& c, FaceId f) {
  const Face& face = g.faces[f];
  std::vector<EdgeId> walk;
  for (int h : face.half_edges) walk.push_back(g.hedge(h));
  return monodromy(g, c, g.hsrc(face.half_edges.front()), walk);
}

// Flat means trivial monodromy around every interior, unmarked face.
inline Diagnostics check_flat(const PlanarGraph& g, const Connection& c, double tol = 1e-9) {
  Diagnostics d;
  for (const Face& f : g.faces) {
    if (f.boundary || c.marked.count(f.id)) continue;
    double dev = dist(face_monodromy(g, c, f.id), Matrix2::identity());
    if (dev > tol)
      d.fail("face " + std::to_string(f.id) + " has curvature " + std::to_string(dev));
  }
  return d;
}

// One-parameter family of connections: every zipper matrix moves along its
// geodesic exp(t log A); gauge and marks are kept.
inline Connection connection_path(const Connection& c, double t) {
  Connection out = c;
  for (Zipper& z : out.zippers) z.matrix = sl2_path(z.matrix, t);
  return out;
}

inline nlohmann::json to_json(const Matrix2& m) {
  auto pair = [](cplx z) { return nlohmann::json::array({z.real(), z.imag()}); };
  return nlohmann::json::array({pair(m.a), pair(m.b), pair(m.c), pair(m.d)});
}

inline Matrix2 matrix2_from_json(const nlohmann::json& j) {
  auto ent = [&](int k) { return cplx(j.at(k).at(0), j.at(k).at(1)); };
  return {ent(0), ent(1), ent(2), ent(3)};
}

inline nlohmann::json to_json(const Connection& c) {
  nlohmann::json j;
  j["zippers"] = nlohmann::json::array();
  for (const Zipper& z : c.zippers)
    j["zippers"].push_back({{"matrix", to_json(z.matrix)},
                            {"edges", z.edges},
                            {"signs", z.signs}});
  if (!c.gauge.empty()) {
    j["gauge"] = nlohmann::json::array();
    for (const Matrix2& m : c.gauge) j["gauge"].push_back(to_json(m));
  }
  j["marked"] = std::vector<FaceId>(c.marked.begin(), c.marked.end());
  return j;
}

inline Connection connection_from_json(const nlohmann::json& j) {
  Connection c;
  for (const auto& jz : j.at("zippers")) {
    Zipper z;
    z.matrix = matrix2_from_json(jz.at("matrix"));
    z.edges = jz.at("edges").get<std::vector<EdgeId>>();
    z.signs = jz.at("signs").get<std::vector<int>>();
    if (z.edges.size() != z.signs.size())
      throw std::runtime_error("connection_from_json: edges/signs mismatch");
    c.zippers.push_back(std::move(z));
  }
  if (j.contains("gauge"))
    for (const auto& jm : j.at("gauge")) c.gauge.push_back(matrix2_from_json(jm));
  if (j.contains("marked"))
    for (FaceId f : j.at("marked").get<std::vector<FaceId>>()) c.marked.insert(f);
  return c;
}

}  // namespace qdimer
