#pragma once

// Brute-force reference machinery: enumerate perfect matchings, superpose
// pairs into doubled edges plus disjoint alternating loops, and sum loop
// weights directly. Intended for small graphs; everything here is the oracle
// the determinant machinery is checked against.

#include <cmath>

#include "connection.hpp"
#include "planar_graph.hpp"

namespace qdimer {

using Cover = std::vector<EdgeId>;  // sorted edge ids of a perfect matching

inline std::vector<Cover> all_dimer_covers(const PlanarGraph& g, size_t max_vertices = 96) {
  if (g.vertices.size() > max_vertices)
    throw std::runtime_error("all_dimer_covers: graph too large for enumeration");
  std::vector<Cover> covers;
  std::vector<char> matched(g.vertices.size(), 0);
  Cover cur;
  auto rec = [&](auto&& self, VertexId from) -> void {
    VertexId v = from;
    while (v < (VertexId)g.vertices.size() && matched[v]) ++v;
    if (v == (VertexId)g.vertices.size()) {
      Cover c = cur;
      std::sort(c.begin(), c.end());
      covers.push_back(std::move(c));
      return;
    }
    matched[v] = 1;
    for (int d = 0; d < 4; ++d) {
      int h = g.rot[v][d];
      if (h < 0) continue;
      VertexId u = g.hdst(h);
      if (matched[u]) continue;
      matched[u] = 1;
      cur.push_back(g.hedge(h));
      self(self, v + 1);
      cur.pop_back();
      matched[u] = 0;
    }
    matched[v] = 0;
  };
  rec(rec, 0);
  std::sort(covers.begin(), covers.end());
  return covers;
}

struct Loop {
  VertexId base;               // smallest vertex on the loop
  std::vector<EdgeId> edges;   // closed edge walk from base
};

struct PairConfig {
  std::vector<EdgeId> doubled;  // edges used by both covers
  std::vector<Loop> loops;      // alternating cycles, length >= 2
};

// Superpose two covers. Edges shared by id are doubled; the rest decompose
// into loops that alternate between the covers (parallel edges between the
// same endpoints form honest length-2 loops).
inline PairConfig pair_to_config(const PlanarGraph& g, const Cover& c1, const Cover& c2) {
  std::vector<EdgeId> m1(g.vertices.size(), -1), m2(g.vertices.size(), -1);
  for (EdgeId e : c1) m1[g.edges[e].u] = m1[g.edges[e].v] = e;
  for (EdgeId e : c2) m2[g.edges[e].u] = m2[g.edges[e].v] = e;
  for (VertexId v = 0; v < (VertexId)g.vertices.size(); ++v)
    if (m1[v] < 0 || m2[v] < 0) throw std::runtime_error("pair_to_config: not perfect covers");

  PairConfig cfg;
  std::vector<char> seen(g.vertices.size(), 0);
  for (VertexId v0 = 0; v0 < (VertexId)g.vertices.size(); ++v0) {
    if (seen[v0]) continue;
    if (m1[v0] == m2[v0]) {
      seen[v0] = 1;
      seen[g.other(m1[v0], v0)] = 1;
      cfg.doubled.push_back(m1[v0]);
      continue;
    }
    Loop loop;
    loop.base = v0;
    VertexId v = v0;
    bool use1 = true;
    do {
      seen[v] = 1;
      EdgeId e = use1 ? m1[v] : m2[v];
      loop.edges.push_back(e);
      v = g.other(e, v);
      use1 = !use1;
    } while (v != v0);
    cfg.loops.push_back(std::move(loop));
  }
  return cfg;
}

// Weight of one ordered pair under a connection: product of edge weights of
// both covers times half the monodromy trace per loop. Summing this over all
// ordered pairs yields the loop-measure partition function, because an
// unordered configuration with k loops arises from 2^k ordered pairs.
inline cplx pair_weight(const PlanarGraph& g, const Connection& conn, const Cover& c1,
                        const Cover& c2, const std::vector<double>* nu = nullptr) {
  cplx w = 1.0;
  if (nu) {
    for (EdgeId e : c1) w *= (*nu)[e];
    for (EdgeId e : c2) w *= (*nu)[e];
  }
  PairConfig cfg = pair_to_config(g, c1, c2);
  for (const Loop& l : cfg.loops)
    w *= 0.5 * monodromy(g, conn, l.base, l.edges).trace();
  return w;
}

// Sum of Tr-weighted loop configurations: Z(Phi) = sum over unordered
// superpositions of nu(omega) * prod_loops Tr(monodromy).
inline cplx double_dimer_partition_oracle(const PlanarGraph& g, const Connection& conn,
                                          const std::vector<double>* nu = nullptr) {
  std::vector<Cover> covers = all_dimer_covers(g);
  cplx total = 0.0;
  for (const Cover& a : covers)
    for (const Cover& b : covers) total += pair_weight(g, conn, a, b, nu);
  return total;
}

// Single-dimer partition function with positive weights.
inline double single_dimer_partition_oracle(const PlanarGraph& g,
                                            const std::vector<double>* nu = nullptr) {
  double total = 0.0;
  for (const Cover& c : all_dimer_covers(g)) {
    double w = 1.0;
    if (nu)
      for (EdgeId e : c) w *= (*nu)[e];
    total += w;
  }
  return total;
}

// Net number of axial turns of a loop on a cylinder (0 for planar surfaces).
inline int loop_winding(const PlanarGraph& g, const Loop& loop) {
  if (g.surface != Surface::Cylinder) return 0;
  int dx = 0;
  VertexId v = loop.base;
  for (EdgeId e : loop.edges) {
    const Edge& ed = g.edges[e];
    int step = (ed.dir == 0) - (ed.dir == 2);
    dx += (v == ed.u) ? step : -step;
    v = g.other(e, v);
  }
  if (dx % (2 * g.cyl_n) != 0) throw std::runtime_error("loop_winding: open winding count");
  return dx / (2 * g.cyl_n);
}

// Coefficients N_k of the cylinder loop polynomial: summing N_k X^k over k
// with X the common trace of winding loops reproduces the loop partition
// function. N_k = sum over unordered configurations with k winding loops of
// 2^(number of contractible loops).
inline std::vector<double> cylinder_winding_counts_oracle(const PlanarGraph& g) {
  std::vector<Cover> covers = all_dimer_covers(g);
  std::vector<double> n;
  for (const Cover& a : covers)
    for (const Cover& b : covers) {
      PairConfig cfg = pair_to_config(g, a, b);
      int wind = 0;
      for (const Loop& l : cfg.loops) wind += std::abs(loop_winding(g, l));
      if ((int)n.size() <= wind) n.resize(wind + 1, 0.0);
      n[wind] += std::ldexp(1.0, -wind);  // 2^{-wind} collapses ordered pairs
    }
  return n;
}

}  // namespace qdimer
