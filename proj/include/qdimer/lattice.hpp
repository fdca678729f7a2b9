#pragma once

// Grid regions (rectangles with rectangular holes), the derived bipartite
// graph whose dimer covers biject with rooted spanning trees, and cylinder
// grids with odd circumference parameter.
//
// Region coordinates: vertices at integer (i,j), 0 <= i < nx, 0 <= j < ny;
// cell (i,j) is the unit square with corners (i,j) and (i+1,j+1). Holes are
// open unions of cells, strictly inside the rectangle; vertices and edges on
// a hole boundary remain part of the region.

#include <map>
#include <optional>
#include <set>
#include <utility>

#include "planar_graph.hpp"

namespace qdimer {

struct HoleSpec {
  int cx, cy, cw, ch;  // cell rectangle [cx,cx+cw) x [cy,cy+ch)
  std::optional<int> removed_edge_x;  // left endpoint of e_j on the top side
};

struct RegionSpec {
  int nx = 0, ny = 0;
  std::vector<HoleSpec> holes;
  std::optional<std::pair<int, int>> outer_mark;  // vertex coords for x0
};

struct GridRegion {
  RegionSpec spec;
  PlanarGraph graph;  // plain grid graph of the region, black/white by parity
  std::map<std::pair<int, int>, VertexId> vertex_at;  // (i,j) -> id
  std::map<std::pair<int, int>, EdgeId> hedge_at;     // horizontal edge, left endpoint
  std::map<std::pair<int, int>, EdgeId> vedge_at;     // vertical edge, bottom endpoint
  std::set<std::pair<int, int>> cells;                // cells that are faces
  std::pair<int, int> x0;                             // removed vertex (corner by default)
  std::vector<std::pair<int, int>> removed_edges;     // e_j left endpoints, one per hole

  bool has_vertex(int i, int j) const { return vertex_at.count({i, j}) > 0; }
  bool has_cell(int i, int j) const { return cells.count({i, j}) > 0; }
};

namespace detail {

inline bool strictly_inside(const HoleSpec& h, double x, double y) {
  return x > h.cx && x < h.cx + h.cw && y > h.cy && y < h.cy + h.ch;
}

}  // namespace detail

inline GridRegion build_grid_region(const RegionSpec& spec) {
  if (spec.nx < 2 || spec.ny < 2)
    throw std::runtime_error("build_grid_region: region has no edges");
  for (const HoleSpec& h : spec.holes) {
    if (h.cw < 1 || h.ch < 1) throw std::runtime_error("build_grid_region: empty hole");
    if (h.cx < 1 || h.cy < 1 || h.cx + h.cw > spec.nx - 2 || h.cy + h.ch > spec.ny - 2)
      throw std::runtime_error("build_grid_region: hole must be strictly interior");
  }
  for (size_t a = 0; a < spec.holes.size(); ++a)
    for (size_t b = a + 1; b < spec.holes.size(); ++b) {
      const HoleSpec &p = spec.holes[a], &q = spec.holes[b];
      bool gap = p.cx + p.cw + 1 <= q.cx || q.cx + q.cw + 1 <= p.cx ||
                 p.cy + p.ch + 1 <= q.cy || q.cy + q.ch + 1 <= p.cy;
      if (!gap) throw std::runtime_error("build_grid_region: holes touch");
    }

  GridRegion r;
  r.spec = spec;
  PlanarGraph& g = r.graph;
  g.surface = spec.holes.empty() ? Surface::Disk : Surface::MultiplyConnected;

  auto inside_hole = [&](double x, double y) {
    for (const HoleSpec& h : spec.holes)
      if (detail::strictly_inside(h, x, y)) return true;
    return false;
  };

  for (int j = 0; j < spec.ny; ++j)
    for (int i = 0; i < spec.nx; ++i) {
      if (inside_hole(i, j)) continue;
      Vertex v;
      v.id = (VertexId)g.vertices.size();
      v.x2 = 2 * i;
      v.y2 = 2 * j;
      v.cls = ((i + j) % 2 == 0) ? VertexClass::Black : VertexClass::White;
      g.vertices.push_back(v);
      r.vertex_at[{i, j}] = v.id;
    }

  auto add_edge = [&](int i, int j, bool horizontal) {
    int i2 = i + (horizontal ? 1 : 0), j2 = j + (horizontal ? 0 : 1);
    if (!r.has_vertex(i, j) || !r.has_vertex(i2, j2)) return;
    double mx = 0.5 * (i + i2), my = 0.5 * (j + j2);
    if (inside_hole(mx, my)) return;
    Edge e;
    e.id = (EdgeId)g.edges.size();
    e.u = r.vertex_at[{i, j}];
    e.v = r.vertex_at[{i2, j2}];
    e.dir = horizontal ? 0 : 1;
    g.edges.push_back(e);
    (horizontal ? r.hedge_at : r.vedge_at)[{i, j}] = e.id;
  };
  for (int j = 0; j < spec.ny; ++j)
    for (int i = 0; i < spec.nx; ++i) {
      if (i + 1 < spec.nx) add_edge(i, j, true);
      if (j + 1 < spec.ny) add_edge(i, j, false);
    }

  auto is_hole_cell = [&](int i, int j) {
    for (const HoleSpec& h : spec.holes)
      if (i >= h.cx && i < h.cx + h.cw && j >= h.cy && j < h.cy + h.ch) return true;
    return false;
  };
  for (int j = 0; j + 1 < spec.ny; ++j)
    for (int i = 0; i + 1 < spec.nx; ++i)
      if (!is_hole_cell(i, j) && r.hedge_at.count({i, j}) && r.hedge_at.count({i, j + 1}) &&
          r.vedge_at.count({i, j}) && r.vedge_at.count({i + 1, j}))
        r.cells.insert({i, j});

  r.x0 = spec.outer_mark.value_or(std::make_pair(0, 0));
  auto [xi, xj] = r.x0;
  if (!r.has_vertex(xi, xj) ||
      !(xi == 0 || xi == spec.nx - 1 || xj == 0 || xj == spec.ny - 1))
    throw std::runtime_error("build_grid_region: x0 mark must sit on the outer boundary");

  for (const HoleSpec& h : spec.holes) {
    int ex = h.removed_edge_x.value_or(h.cx + (h.cw - 1) / 2);
    if (ex < h.cx || ex >= h.cx + h.cw)
      throw std::runtime_error("build_grid_region: removed edge mark not on hole top side");
    r.removed_edges.push_back({ex, h.cy + h.ch});  // horizontal edge on top side
  }

  g.finalize();
  // Hole faces are bounded, hence traced counterclockwise like interior
  // faces; stamp them via a half-edge known to have the hole on its left
  // (westward along the hole's top side).
  for (const HoleSpec& h : spec.holes) {
    EdgeId top = r.hedge_at.at({h.cx, h.cy + h.ch});
    g.faces[g.face_at(2 * top + 1)].boundary = true;
  }
  return r;
}

inline GridRegion build_rectangle(int nx, int ny) {
  RegionSpec s;
  s.nx = nx;
  s.ny = ny;
  return build_grid_region(s);
}

// Derived graph: black vertices are the region vertices (minus x0) and the
// bounded square faces; white vertices are the edges, minus one removed
// horizontal edge per hole. Vertex ids run row-major over half-step
// coordinates, so the layout is deterministic.
struct Temperleyan {
  GridRegion region;
  PlanarGraph g;
  std::map<std::pair<int, int>, VertexId> at;  // half-step coords -> id
  bool has(int x2, int y2) const { return at.count({x2, y2}) > 0; }
  VertexId id(int x2, int y2) const { return at.at({x2, y2}); }
};

inline Temperleyan temperleyan_graph(const GridRegion& region) {
  if (region.removed_edges.size() != region.spec.holes.size())
    throw std::runtime_error("temperleyan_graph: each hole needs a removed edge mark");
  Temperleyan t;
  t.region = region;
  PlanarGraph& g = t.g;
  g.surface = region.graph.surface;

  std::set<std::pair<int, int>> removed;  // W0 sites removed near holes
  for (auto [i, j] : region.removed_edges) removed.insert({2 * i + 1, 2 * j});
  auto [x0i, x0j] = region.x0;
  std::pair<int, int> x0{2 * x0i, 2 * x0j};

  // Collect candidate sites with classes, then sort row-major.
  std::vector<Vertex> sites;
  for (auto& [ij, vid] : region.vertex_at) {
    (void)vid;
    std::pair<int, int> p{2 * ij.first, 2 * ij.second};
    if (p == x0) continue;
    sites.push_back({0, p.first, p.second, VertexClass::B0});
  }
  for (auto [ij, c] : region.cells) {
    (void)c;
  }
  for (auto& c : region.cells)
    sites.push_back({0, 2 * c.first + 1, 2 * c.second + 1, VertexClass::B1});
  for (auto& [ij, eid] : region.hedge_at) {
    (void)eid;
    std::pair<int, int> p{2 * ij.first + 1, 2 * ij.second};
    if (removed.count(p)) continue;
    sites.push_back({0, p.first, p.second, VertexClass::W0});
  }
  for (auto& [ij, eid] : region.vedge_at) {
    (void)eid;
    sites.push_back({0, 2 * ij.first, 2 * ij.second + 1, VertexClass::W1});
  }
  std::sort(sites.begin(), sites.end(), [](const Vertex& a, const Vertex& b) {
    return std::tie(a.y2, a.x2) < std::tie(b.y2, b.x2);
  });
  for (Vertex& v : sites) {
    v.id = (VertexId)g.vertices.size();
    g.vertices.push_back(v);
    t.at[{v.x2, v.y2}] = v.id;
  }

  // Edges from each white site to its existing black neighbors, one half step
  // in each axis direction.
  const int dx[4] = {1, 0, -1, 0}, dy[4] = {0, 1, 0, -1};
  for (const Vertex& v : g.vertices) {
    if (!is_white(v.cls)) continue;
    for (int d = 0; d < 4; ++d) {
      int nx2 = v.x2 + dx[d], ny2 = v.y2 + dy[d];
      auto it = t.at.find({nx2, ny2});
      if (it == t.at.end()) continue;
      if (!is_black(g.vertices[it->second].cls)) continue;
      Edge e;
      e.id = (EdgeId)g.edges.size();
      e.u = v.id;
      e.v = it->second;
      e.dir = d;
      g.edges.push_back(e);
    }
  }
  g.finalize();
  // Stamp hole faces: eastward along a hole's bottom side the hole lies on
  // the left. The bottom side never carries the removed edge site.
  for (const HoleSpec& h : region.spec.holes) {
    int hh = g.rot[t.id(2 * h.cx + 1, 2 * h.cy)][0];
    if (hh < 0) throw std::runtime_error("temperleyan_graph: hole bottom side broken");
    g.faces[g.face_at(hh)].boundary = true;
  }
  return t;
}

// Cylinder grid: circumference 2n (n odd so that no extra sign corrections
// are needed), rows y = 1..m, columns x = 0..2n-1 with wraparound. For n = 1
// each row carries two parallel edges between its two vertices.
inline PlanarGraph cylinder_graph(int n, int m) {
  if (n < 1 || n % 2 == 0) throw std::runtime_error("cylinder_graph: n must be odd and positive");
  if (m < 1) throw std::runtime_error("cylinder_graph: m must be positive");
  PlanarGraph g;
  g.surface = Surface::Cylinder;
  g.cyl_n = n;
  g.cyl_m = m;
  auto vid = [&](int x, int y) { return (y - 1) * 2 * n + x; };
  for (int y = 1; y <= m; ++y)
    for (int x = 0; x < 2 * n; ++x) {
      Vertex v;
      v.id = vid(x, y);
      v.x2 = 2 * x;
      v.y2 = 2 * y;
      v.cls = ((x + y) % 2 == 0) ? VertexClass::Black : VertexClass::White;
      g.vertices.push_back(v);
    }
  for (int y = 1; y <= m; ++y)
    for (int x = 0; x < 2 * n; ++x) {
      Edge e;
      e.id = (EdgeId)g.edges.size();
      e.u = vid(x, y);
      e.v = vid((x + 1) % (2 * n), y);
      e.dir = 0;  // east, in the unrolled frame
      g.edges.push_back(e);
    }
  for (int y = 1; y < m; ++y)
    for (int x = 0; x < 2 * n; ++x) {
      Edge e;
      e.id = (EdgeId)g.edges.size();
      e.u = vid(x, y);
      e.v = vid(x, y + 1);
      e.dir = 1;  // north
      g.edges.push_back(e);
    }
  g.finalize();
  return g;
}

}  // namespace qdimer
