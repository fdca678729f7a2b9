#pragma once

// Embedded graphs on the disk, the multiply connected disk, or the cylinder.
// Edges carry exact axis direction codes at their source vertex; the rotation
// system is derived from those codes, faces are traced from the rotation
// system, and boundary faces (outer face, hole faces, cylinder rims) are the
// orbits with nonpositive signed area.
//
// Half-edge h of edge e: h = 2e runs u -> v, h = 2e+1 runs v -> u.
// Direction codes 0,1,2,3 = E,N,W,S in counterclockwise order; the departure
// code at v is always opposite(code at u), which stays valid for cylinder
// wrap edges read in the unrolled frame.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace qdimer {

using VertexId = int;
using EdgeId = int;
using FaceId = int;

enum class VertexClass { B0, B1, W0, W1, Black, White };

inline bool is_black(VertexClass c) {
  return c == VertexClass::B0 || c == VertexClass::B1 || c == VertexClass::Black;
}
inline bool is_white(VertexClass c) { return !is_black(c); }

inline std::string class_name(VertexClass c) {
  switch (c) {
    case VertexClass::B0: return "B0";
    case VertexClass::B1: return "B1";
    case VertexClass::W0: return "W0";
    case VertexClass::W1: return "W1";
    case VertexClass::Black: return "black";
    default: return "white";
  }
}

inline VertexClass class_from_name(const std::string& s) {
  if (s == "B0") return VertexClass::B0;
  if (s == "B1") return VertexClass::B1;
  if (s == "W0") return VertexClass::W0;
  if (s == "W1") return VertexClass::W1;
  if (s == "black") return VertexClass::Black;
  if (s == "white") return VertexClass::White;
  throw std::runtime_error("unknown vertex class: " + s);
}

enum class Surface { Disk, MultiplyConnected, Cylinder };

inline std::string surface_name(Surface s) {
  switch (s) {
    case Surface::Disk: return "disk";
    case Surface::MultiplyConnected: return "multiply_connected";
    default: return "cylinder";
  }
}

struct Vertex {
  VertexId id;
  int x2, y2;  // half-step integer coordinates (lattice points sit at even pairs)
  VertexClass cls;
};

struct Edge {
  EdgeId id;
  VertexId u, v;
  int dir;  // departure direction code at u; departure at v is (dir+2)%4
};

struct Face {
  FaceId id;
  std::vector<int> half_edges;  // traversal order, face on the left
  bool boundary;
  double area;  // signed, in half-step units
  int wind = 0;  // cylinder only: net x displacement of the orbit, in columns
};

struct Diagnostics {
  bool ok = true;
  std::vector<std::string> messages;
  void fail(const std::string& m) {
    ok = false;
    messages.push_back(m);
  }
  std::string summary() const {
    std::string s;
    for (const std::string& m : messages) {
      if (!s.empty()) s += "; ";
      s += m;
    }
    return s;
  }
};

struct PlanarGraph {
  Surface surface = Surface::Disk;
  int cyl_n = 0, cyl_m = 0;  // cylinder only: circumference 2*cyl_n, height cyl_m
  std::vector<Vertex> vertices;
  std::vector<Edge> edges;
  std::vector<Face> faces;
  std::vector<std::array<int, 4>> rot;  // per vertex, outgoing half-edge per code
  std::vector<FaceId> face_of_half;     // face lying to the left of each half-edge

  EdgeId hedge(int h) const { return h >> 1; }
  VertexId hsrc(int h) const { const Edge& e = edges[h >> 1]; return (h & 1) ? e.v : e.u; }
  VertexId hdst(int h) const { const Edge& e = edges[h >> 1]; return (h & 1) ? e.u : e.v; }
  int hdir(int h) const { const Edge& e = edges[h >> 1]; return (h & 1) ? (e.dir + 2) % 4 : e.dir; }
  int twin(int h) const { return h ^ 1; }

  VertexId other(EdgeId e, VertexId v) const {
    return edges[e].u == v ? edges[e].v : edges[e].u;
  }

  std::vector<EdgeId> incident(VertexId v) const {
    std::vector<EdgeId> out;
    for (int d = 0; d < 4; ++d)
      if (rot[v][d] >= 0) out.push_back(rot[v][d] >> 1);
    return out;
  }

  int degree(VertexId v) const {
    int k = 0;
    for (int d = 0; d < 4; ++d) k += rot[v][d] >= 0;
    return k;
  }

  EdgeId find_edge(VertexId a, VertexId b) const {
    EdgeId found = -1;
    for (int d = 0; d < 4; ++d) {
      int h = rot[a][d];
      if (h >= 0 && hdst(h) == b) {
        if (found >= 0) throw std::runtime_error("find_edge: parallel edges, pass edge ids");
        found = h >> 1;
      }
    }
    if (found < 0) throw std::runtime_error("find_edge: edge absent");
    return found;
  }

  // Planar position used for signed areas; cylinders unroll onto an annulus.
  // The angle runs clockwise with x so the annulus map preserves orientation.
  std::pair<double, double> embed_pos(VertexId v) const {
    if (surface != Surface::Cylinder) return {0.5 * vertices[v].x2, 0.5 * vertices[v].y2};
    double th = -M_PI * (0.5 * vertices[v].x2) / cyl_n;
    double r = 1.0 + 0.5 * vertices[v].y2;
    return {r * std::cos(th), r * std::sin(th)};
  }

  void build_rotation() {
    rot.assign(vertices.size(), {-1, -1, -1, -1});
    for (const Edge& e : edges) {
      int du = e.dir, dv = (e.dir + 2) % 4;
      if (rot[e.u][du] >= 0 || rot[e.v][dv] >= 0)
        throw std::runtime_error("build_rotation: two edges leave one vertex in the same direction");
      rot[e.u][du] = 2 * e.id;
      rot[e.v][dv] = 2 * e.id + 1;
    }
  }

  // Next half-edge of the face lying to the left of h: at the head of h,
  // rotate clockwise from the reversed half-edge.
  int face_next(int h) const {
    VertexId v = hdst(h);
    int d = (hdir(h) + 2) % 4;  // departure code of twin(h) at v
    for (int k = 1; k <= 4; ++k) {
      int cand = rot[v][(d + 4 - k) % 4];
      if (cand >= 0) return cand;
    }
    throw std::runtime_error("face_next: isolated vertex");
  }

  void trace_faces() {
    faces.clear();
    face_of_half.assign(2 * edges.size(), -1);
    for (int h0 = 0; h0 < (int)(2 * edges.size()); ++h0) {
      if (face_of_half[h0] >= 0) continue;
      Face f;
      f.id = (FaceId)faces.size();
      int h = h0;
      double area2 = 0.0;  // twice the shoelace area
      int wind = 0;        // net x displacement in the unrolled frame
      do {
        face_of_half[h] = f.id;
        f.half_edges.push_back(h);
        auto [xa, ya] = embed_pos(hsrc(h));
        auto [xb, yb] = embed_pos(hdst(h));
        area2 += xa * yb - xb * ya;
        int d = hdir(h);
        wind += (d == 0) - (d == 2);
        h = face_next(h);
      } while (h != h0);
      f.area = 0.5 * area2;
      f.wind = wind;
      // Every bounded face is traced counterclockwise (positive area), so the
      // outer face is the one negative orbit. Hole faces are bounded and must
      // be stamped as boundary by the builder that knows where the holes are.
      // Cylinder rims are the two orbits that wind around the axis.
      f.boundary = surface == Surface::Cylinder ? wind != 0 : f.area <= 1e-9;
      faces.push_back(std::move(f));
    }
  }

  // Face to the left of the half-edge.
  FaceId face_at(int h) const { return face_of_half[h]; }

  void finalize() {
    build_rotation();
    trace_faces();
  }

  int boundary_face_count() const {
    int b = 0;
    for (const Face& f : faces) b += f.boundary;
    return b;
  }

  std::vector<FaceId> interior_faces() const {
    std::vector<FaceId> out;
    for (const Face& f : faces)
      if (!f.boundary) out.push_back(f.id);
    return out;
  }

  std::vector<VertexId> whites() const {
    std::vector<VertexId> out;
    for (const Vertex& v : vertices)
      if (is_white(v.cls)) out.push_back(v.id);
    return out;
  }
  std::vector<VertexId> blacks() const {
    std::vector<VertexId> out;
    for (const Vertex& v : vertices)
      if (is_black(v.cls)) out.push_back(v.id);
    return out;
  }
};

// Edge id helpers matching the cylinder builder's layout: horizontal edges
// (x,y)-(x+1,y) come first row by row, then vertical edges (x,y)-(x,y+1).
inline EdgeId cylinder_hedge(const PlanarGraph& g, int x, int y) {
  return (y - 1) * 2 * g.cyl_n + x;
}
inline EdgeId cylinder_vedge(const PlanarGraph& g, int x, int y) {
  return 2 * g.cyl_n * g.cyl_m + (y - 1) * 2 * g.cyl_n + x;
}

inline Diagnostics validate_embedding(const PlanarGraph& g) {
  Diagnostics d;
  if (g.edges.empty()) d.fail("graph has no edges");
  for (const Vertex& v : g.vertices)
    if (g.degree(v.id) == 0) d.fail("isolated vertex " + std::to_string(v.id));

  // Every directed edge must lie in exactly one face cycle.
  std::vector<int> seen(2 * g.edges.size(), 0);
  for (const Face& f : g.faces)
    for (int h : f.half_edges) seen[h]++;
  for (int h = 0; h < (int)seen.size(); ++h)
    if (seen[h] != 1) d.fail("half-edge " + std::to_string(h) + " lies in " +
                             std::to_string(seen[h]) + " faces");

  // Euler count with genus 0 and the declared boundary faces.
  int V = (int)g.vertices.size(), E = (int)g.edges.size();
  int B = g.boundary_face_count();
  int Fi = (int)g.faces.size() - B;
  int expect_b = g.surface == Surface::Cylinder ? 2 : -1;  // -1: any
  if (expect_b >= 0 && B != expect_b)
    d.fail("cylinder must have exactly 2 boundary faces, found " + std::to_string(B));
  if (g.surface == Surface::Disk && B != 1)
    d.fail("disk must have exactly 1 boundary face, found " + std::to_string(B));
  if (g.surface == Surface::MultiplyConnected && B < 2)
    d.fail("multiply connected surface needs hole faces, found B = " + std::to_string(B));
  if (V - E + Fi != 2 - B)
    d.fail("Euler check failed: V-E+F_int = " + std::to_string(V - E + Fi) +
           ", expected " + std::to_string(2 - B));

  // Edges must join a black class to a white class.
  for (const Edge& e : g.edges)
    if (is_black(g.vertices[e.u].cls) == is_black(g.vertices[e.v].cls))
      d.fail("edge " + std::to_string(e.id) + " joins two same-color vertices");

  // Parallel edges only occur on the cylinder.
  if (g.surface != Surface::Cylinder) {
    std::map<std::pair<VertexId, VertexId>, int> mult;
    for (const Edge& e : g.edges)
      mult[{std::min(e.u, e.v), std::max(e.u, e.v)}]++;
    for (auto& [k, c] : mult)
      if (c > 1) d.fail("parallel edges outside cylinder surface");
  }
  return d;
}

inline nlohmann::json to_json(const PlanarGraph& g) {
  nlohmann::json j;
  j["surface"] = surface_name(g.surface);
  if (g.surface == Surface::Cylinder) {
    j["cylinder"] = {{"n", g.cyl_n}, {"m", g.cyl_m}};
  }
  j["vertices"] = nlohmann::json::array();
  for (const Vertex& v : g.vertices)
    j["vertices"].push_back({{"id", v.id},
                             {"x", 0.5 * v.x2},
                             {"y", 0.5 * v.y2},
                             {"class", class_name(v.cls)}});
  j["edges"] = nlohmann::json::array();
  for (const Edge& e : g.edges)
    j["edges"].push_back({{"id", e.id}, {"u", e.u}, {"v", e.v}, {"dir", e.dir}});
  j["faces"] = nlohmann::json::array();
  for (const Face& f : g.faces) {
    nlohmann::json jf;
    jf["id"] = f.id;
    jf["boundary"] = f.boundary;
    jf["edges"] = nlohmann::json::array();
    for (int h : f.half_edges) jf["edges"].push_back(g.hedge(h));
    j["faces"].push_back(jf);
  }
  return j;
}

inline PlanarGraph graph_from_json(const nlohmann::json& j) {
  PlanarGraph g;
  std::string s = j.at("surface");
  if (s == "disk") g.surface = Surface::Disk;
  else if (s == "multiply_connected") g.surface = Surface::MultiplyConnected;
  else if (s == "cylinder") g.surface = Surface::Cylinder;
  else throw std::runtime_error("unknown surface: " + s);
  if (g.surface == Surface::Cylinder) {
    g.cyl_n = j.at("cylinder").at("n");
    g.cyl_m = j.at("cylinder").at("m");
  }
  for (const auto& jv : j.at("vertices")) {
    Vertex v;
    v.id = jv.at("id");
    v.x2 = (int)std::lround(2.0 * (double)jv.at("x"));
    v.y2 = (int)std::lround(2.0 * (double)jv.at("y"));
    v.cls = class_from_name(jv.at("class"));
    g.vertices.push_back(v);
  }
  for (const auto& je : j.at("edges")) {
    Edge e;
    e.id = je.at("id");
    e.u = je.at("u");
    e.v = je.at("v");
    e.dir = je.at("dir");
    g.edges.push_back(e);
  }
  g.finalize();  // faces are reconstructed from the rotation system
  // Orbit order is deterministic, so hole-face stamps can be restored by id.
  if (j.contains("faces") && j.at("faces").size() == g.faces.size())
    for (const auto& jf : j.at("faces")) g.faces[(FaceId)jf.at("id")].boundary = jf.at("boundary");
  return g;
}

}  // namespace qdimer
