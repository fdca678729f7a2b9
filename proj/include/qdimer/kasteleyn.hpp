#pragma once

// Edge phases that make determinants count matchings, the quaternion
// Kasteleyn matrix of an SL2 connection, and three routes to its quaternion
// determinant:
//   - determinant of the doubled (2x2-blocks expanded) white-by-black matrix,
//   - Pfaffian of Z K~ for the self-dual square block matrix K~,
//   - the literal cycle-sum over permutations (tiny matrices only).
// All three agree after normalization and reproduce the loop-weighted
// superposition partition function.

#include <algorithm>
#include <functional>
#include <map>
#include <random>

#include <Eigen/Dense>

#include "connection.hpp"
#include "planar_graph.hpp"

namespace qdimer {

// Phase per edge: on planar surfaces the black neighbor's compass direction
// from the white vertex maps E,N,W,S -> 1,i,-1,-i. On the cylinder,
// horizontal edges carry 1 and vertical edges i; with the circumference
// parameter odd this satisfies the face condition on the bounded rim too.
inline std::vector<cplx> kasteleyn_phases(const PlanarGraph& g) {
  static const cplx table[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  std::vector<cplx> eps(g.edges.size());
  for (const Edge& e : g.edges) {
    if (g.surface == Surface::Cylinder) {
      eps[e.id] = e.dir == 0 ? cplx(1, 0) : cplx(0, 1);
    } else {
      int d = is_white(g.vertices[e.u].cls) ? e.dir : (e.dir + 2) % 4;
      eps[e.id] = table[d];
    }
  }
  return eps;
}

// The flatness condition on phases: around every face with 2k edges that two
// matchings can enclose, the alternating product of entries must be
// (-1)^{k+1}. This covers interior faces, hole faces, and the bounded
// cylinder rim (the orbit winding westward); the unbounded face carries no
// condition.
inline Diagnostics check_kasteleyn_phases(const PlanarGraph& g, const std::vector<cplx>& eps) {
  Diagnostics d;
  for (const Face& f : g.faces) {
    bool bounded = !f.boundary || (g.surface == Surface::Cylinder && f.wind < 0) ||
                   (g.surface != Surface::Cylinder && f.area > 0);
    if (!bounded) continue;
    cplx prod = 1.0;
    for (int h : f.half_edges) {
      cplx v = eps[g.hedge(h)];
      prod *= is_white(g.vertices[g.hsrc(h)].cls) ? v : 1.0 / v;
    }
    int k = (int)f.half_edges.size() / 2;
    cplx want = (k % 2 == 0) ? -1.0 : 1.0;
    if (std::abs(prod - want) > 1e-9)
      d.fail("face " + std::to_string(f.id) + ": alternating phase product " +
             std::to_string(prod.real()) + "+" + std::to_string(prod.imag()) + "i");
  }
  return d;
}

struct KMatrix {
  std::vector<VertexId> whites, blacks;  // ascending vertex id
  std::vector<int> windex, bindex;       // vertex -> slot, -1 elsewhere
  std::vector<cplx> eps;
  std::vector<double> nu;
  Eigen::MatrixXcd scalar;   // whites x blacks: sum of eps*nu over joining edges
  Eigen::MatrixXcd doubled;  // 2w x 2b: sum of eps*nu*transport blocks
  cplx phase = 1.0;          // unit phase of det(scalar); the gauge's footprint
};

// transport_bw(e) must map the black fiber into the white fiber; the matrix
// then acts on sections over black vertices and gauge changes conjugate it
// block-diagonally, leaving every determinant route unchanged.
inline KMatrix assemble_kasteleyn(const PlanarGraph& g,
                                  const std::function<Matrix2(EdgeId)>& transport_bw,
                                  const std::vector<double>* nu = nullptr) {
  KMatrix k;
  k.eps = kasteleyn_phases(g);
  Diagnostics d = check_kasteleyn_phases(g, k.eps);
  if (!d.ok) throw std::runtime_error("assemble_kasteleyn: " + d.summary());
  k.nu.assign(g.edges.size(), 1.0);
  if (nu) {
    if (nu->size() != g.edges.size())
      throw std::runtime_error("assemble_kasteleyn: weight vector size mismatch");
    k.nu = *nu;
  }
  k.windex.assign(g.vertices.size(), -1);
  k.bindex.assign(g.vertices.size(), -1);
  for (const Vertex& v : g.vertices) {
    if (is_white(v.cls)) {
      k.windex[v.id] = (int)k.whites.size();
      k.whites.push_back(v.id);
    } else {
      k.bindex[v.id] = (int)k.blacks.size();
      k.blacks.push_back(v.id);
    }
  }
  int nw = (int)k.whites.size(), nb = (int)k.blacks.size();
  k.scalar = Eigen::MatrixXcd::Zero(nw, nb);
  k.doubled = Eigen::MatrixXcd::Zero(2 * nw, 2 * nb);
  for (const Edge& e : g.edges) {
    VertexId w = is_white(g.vertices[e.u].cls) ? e.u : e.v;
    VertexId b = e.u == w ? e.v : e.u;
    int iw = k.windex[w], ib = k.bindex[b];
    cplx s = k.eps[e.id] * k.nu[e.id];
    k.scalar(iw, ib) += s;  // parallel edges accumulate
    Matrix2 phi = transport_bw(e.id);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) k.doubled(2 * iw + r, 2 * ib + c) += s * phi(r, c);
  }
  if (nw == nb && nw > 0) {
    cplx det = k.scalar.partialPivLu().determinant();
    if (std::abs(det) < 1e-12)
      throw std::runtime_error("assemble_kasteleyn: graph admits no matchings");
    k.phase = det / std::abs(det);
  }
  return k;
}

inline KMatrix assemble_kasteleyn(const PlanarGraph& g, const Connection& conn,
                                  const std::vector<double>* nu = nullptr) {
  return assemble_kasteleyn(
      g,
      [&](EdgeId e) {
        const Edge& ed = g.edges[e];
        VertexId b = is_black(g.vertices[ed.u].cls) ? ed.u : ed.v;
        return transport(g, conn, e, b);
      },
      nu);
}

// Single-dimer partition function: |det scalar|.
inline double single_dimer_partition(const KMatrix& k) {
  return std::abs(k.scalar.partialPivLu().determinant());
}

// Loop-weighted superposition partition function via the doubled matrix. The
// conjugate-squared phase removes the Kasteleyn gauge's global factor; on the
// trivial connection the result is the squared matching count.
inline cplx qdet_doubled_raw(const KMatrix& k) {
  if (k.whites.size() != k.blacks.size())
    throw std::runtime_error("qdet: matrix not square");
  return k.doubled.partialPivLu().determinant();
}

inline cplx qdet(const KMatrix& k) {
  return qdet_doubled_raw(k) * std::conj(k.phase) * std::conj(k.phase);
}

// --- self-dual square form and the other two routes ---

using QMatrix = std::vector<std::vector<Matrix2>>;  // square array of blocks

inline Diagnostics check_self_dual(const QMatrix& q) {
  Diagnostics d;
  for (size_t i = 0; i < q.size(); ++i)
    for (size_t j = 0; j < q.size(); ++j)
      if (dist(q[i][j], q[j][i].qconj()) > 1e-12)
        d.fail("block (" + std::to_string(i) + "," + std::to_string(j) + ") not dual");
  return d;
}

// Whites first, then blacks; off-diagonal blocks are the edge sums and their
// q-conjugates, so the matrix is self-dual by construction.
inline QMatrix self_dual_blocks(const KMatrix& k) {
  int nw = (int)k.whites.size(), nb = (int)k.blacks.size(), n = nw + nb;
  QMatrix q(n, std::vector<Matrix2>(n, Matrix2::zero()));
  for (int iw = 0; iw < nw; ++iw)
    for (int ib = 0; ib < nb; ++ib) {
      Matrix2 block{k.doubled(2 * iw, 2 * ib), k.doubled(2 * iw, 2 * ib + 1),
                    k.doubled(2 * iw + 1, 2 * ib), k.doubled(2 * iw + 1, 2 * ib + 1)};
      q[iw][nw + ib] = block;
      q[nw + ib][iw] = block.qconj();
    }
  return q;
}

// Left-multiply every block row by [[0,1],[-1,0]]; self-dual in, complex
// antisymmetric out.
inline Eigen::MatrixXcd z_doubled(const QMatrix& q) {
  int n = (int)q.size();
  Eigen::MatrixXcd a(2 * n, 2 * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Matrix2& m = q[i][j];
      a(2 * i, 2 * j) = m.c;
      a(2 * i, 2 * j + 1) = m.d;
      a(2 * i + 1, 2 * j) = -m.a;
      a(2 * i + 1, 2 * j + 1) = -m.b;
    }
  return a;
}

// Parlett-Reid: congruence transforms to skew-tridiagonal form with partial
// pivoting, then the product of the even superdiagonal entries.
inline cplx pfaffian(Eigen::MatrixXcd a) {
  const int n = (int)a.rows();
  if (n == 0) return 1.0;
  if (n % 2) return 0.0;
  cplx sign = 1.0;
  for (int k = 0; k + 2 < n; ++k) {
    int piv = k + 1;
    double best = std::abs(a(k + 1, k));
    for (int j = k + 2; j < n; ++j)
      if (std::abs(a(j, k)) > best) {
        best = std::abs(a(j, k));
        piv = j;
      }
    if (best < 1e-300) continue;  // column already clear
    if (piv != k + 1) {
      a.row(piv).swap(a.row(k + 1));
      a.col(piv).swap(a.col(k + 1));
      sign = -sign;
    }
    for (int j = k + 2; j < n; ++j) {
      cplx f = a(j, k) / a(k + 1, k);
      if (f != cplx(0.0)) {
        a.row(j) -= f * a.row(k + 1);
        a.col(j) -= f * a.col(k + 1);
      }
    }
  }
  cplx pf = sign;
  for (int i = 0; i < n; i += 2) pf *= a(i, i + 1);
  return pf;
}

inline cplx qdet_pfaffian_raw(const QMatrix& q) { return pfaffian(z_doubled(q)); }

// Literal cycle sum: sum over permutations of sgn(sigma) times the product
// over cycles of half the trace of the blocks multiplied along the cycle,
// each cycle starting from its smallest element.
inline cplx qdet_definition_raw(const QMatrix& q) {
  int n = (int)q.size();
  if (n > 9) throw std::runtime_error("qdet_definition_raw: too large for the cycle sum");
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  cplx total = 0.0;
  do {
    std::vector<char> seen(n, 0);
    cplx term = 1.0;
    int cycles = 0;
    for (int i = 0; i < n && term != cplx(0.0); ++i) {
      if (seen[i]) continue;
      ++cycles;
      Matrix2 prod = Matrix2::identity();
      int j = i;
      do {
        seen[j] = 1;
        prod = prod * q[j][p[j]];
        j = p[j];
      } while (j != i);
      term *= 0.5 * prod.trace();
    }
    total += ((n - cycles) % 2 ? -1.0 : 1.0) * term;
  } while (std::next_permutation(p.begin(), p.end()));
  return total;
}

// Normalized variants for graph matrices: the whites-first Pfaffian carries
// an extra (-1)^{n_whites} relative to the doubled determinant.
inline cplx qdet_via_pfaffian(const KMatrix& k) {
  cplx raw = qdet_pfaffian_raw(self_dual_blocks(k));
  double s = k.whites.size() % 2 ? -1.0 : 1.0;
  return s * raw * std::conj(k.phase) * std::conj(k.phase);
}

inline cplx qdet_via_definition(const KMatrix& k) {
  cplx raw = qdet_definition_raw(self_dual_blocks(k));
  double s = k.whites.size() % 2 ? -1.0 : 1.0;
  return s * raw * std::conj(k.phase) * std::conj(k.phase);
}

// --- inverse kernels ---

inline Eigen::MatrixXcd scalar_inverse(const KMatrix& k) {
  return k.scalar.partialPivLu().inverse();  // blacks x whites
}

inline Eigen::MatrixXcd doubled_inverse(const KMatrix& k) {
  return k.doubled.partialPivLu().inverse();  // 2b x 2w
}

inline Matrix2 kinv_block(const KMatrix& k, const Eigen::MatrixXcd& inv, VertexId b, VertexId w) {
  int ib = k.bindex[b], iw = k.windex[w];
  if (ib < 0 || iw < 0) throw std::runtime_error("kinv_block: bad colors");
  return {inv(2 * ib, 2 * iw), inv(2 * ib, 2 * iw + 1),
          inv(2 * ib + 1, 2 * iw), inv(2 * ib + 1, 2 * iw + 1)};
}

// Probability that edge e occurs in a nu-weighted random matching.
inline double edge_probability(const PlanarGraph& g, const KMatrix& k,
                               const Eigen::MatrixXcd& sinv, EdgeId e) {
  const Edge& ed = g.edges[e];
  VertexId w = is_white(g.vertices[ed.u].cls) ? ed.u : ed.v;
  VertexId b = g.other(e, w);
  cplx p = k.eps[e] * k.nu[e] * sinv(k.bindex[b], k.windex[w]);
  return p.real();
}

// Sequential determinantal sampler: match whites in order, each time drawing
// a black neighbor with the conditional inclusion probability, then rank-one
// update the inverse kernel.
template <class Rng>
std::vector<EdgeId> sample_dimer_cover(const PlanarGraph& g, Rng& rng,
                                       const std::vector<double>* nu = nullptr) {
  KMatrix k = assemble_kasteleyn(g, [](EdgeId) { return Matrix2::identity(); }, nu);
  if (k.whites.size() != k.blacks.size())
    throw std::runtime_error("sample_dimer_cover: unbalanced colors");
  Eigen::MatrixXcd inv = scalar_inverse(k);  // blacks x whites
  std::vector<char> btaken(k.blacks.size(), 0);
  std::vector<EdgeId> cover;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int iw = 0; iw < (int)k.whites.size(); ++iw) {
    VertexId w = k.whites[iw];
    std::vector<std::pair<EdgeId, double>> cand;
    double total = 0.0;
    for (int d = 0; d < 4; ++d) {
      int h = g.rot[w][d];
      if (h < 0) continue;
      EdgeId e = g.hedge(h);
      int ib = k.bindex[g.hdst(h)];
      if (btaken[ib]) continue;
      cplx p = k.eps[e] * k.nu[e] * inv(ib, iw);
      double pr = std::max(0.0, p.real());
      cand.push_back({e, pr});
      total += pr;
    }
    if (total < 1e-9) throw std::runtime_error("sample_dimer_cover: stuck");
    double u = unif(rng) * total;
    EdgeId chosen = cand.back().first;
    for (auto& [e, pr] : cand) {
      if (u < pr) {
        chosen = e;
        break;
      }
      u -= pr;
    }
    cover.push_back(chosen);
    const Edge& ed = g.edges[chosen];
    int ib = k.bindex[is_black(g.vertices[ed.u].cls) ? ed.u : ed.v];
    btaken[ib] = 1;
    cplx piv = inv(ib, iw);
    for (int jb = 0; jb < (int)k.blacks.size(); ++jb) {
      if (btaken[jb]) continue;
      cplx f = inv(jb, iw) / piv;
      if (f != cplx(0.0)) inv.row(jb) -= f * inv.row(ib);
    }
  }
  std::sort(cover.begin(), cover.end());
  return cover;
}

// Per-edge terms of d/dt log qdet along connection_path(c, t): one
// (edge, tr(K^{-1} dK/dt) block term) pair for each zipper-crossed edge,
// sorted by edge id. Their sum is logdet_path_derivative.
inline std::vector<std::pair<EdgeId, cplx>> logdet_edge_contributions(
    const PlanarGraph& g, const Connection& c, double t,
    const std::vector<double>* nu = nullptr) {
  Connection ct = connection_path(c, t);
  KMatrix k = assemble_kasteleyn(g, ct, nu);
  Eigen::MatrixXcd inv = doubled_inverse(k);

  std::vector<Matrix2> logs;
  for (const Zipper& z : c.zippers) logs.push_back(log2x2(z.matrix));

  // crossings per edge: transport() composes them white-to-black, and the
  // matrix carries the inverse (black-to-white) product, so record each list
  // reversed with flipped signs
  std::map<EdgeId, std::vector<std::pair<int, int>>> crossings;  // edge -> (zipper, sign)
  for (size_t zi = 0; zi < c.zippers.size(); ++zi)
    for (size_t i = 0; i < c.zippers[zi].edges.size(); ++i)
      crossings[c.zippers[zi].edges[i]].push_back({(int)zi, c.zippers[zi].signs[i]});
  for (auto& [e, list] : crossings) {
    std::reverse(list.begin(), list.end());
    for (auto& p : list) p.second = -p.second;
  }

  std::vector<std::pair<EdgeId, cplx>> out;
  for (auto& [e, list] : crossings) {
    const Edge& ed = g.edges[e];
    VertexId w = is_white(g.vertices[ed.u].cls) ? ed.u : ed.v;
    VertexId b = g.other(e, w);
    int m = (int)list.size();
    std::vector<Matrix2> f(m), pre(m + 1), suf(m + 1);
    for (int i = 0; i < m; ++i)
      f[i] = exp2x2(logs[list[i].first] * cplx(list[i].second * t, 0.0));
    pre[0] = Matrix2::identity();
    for (int i = 0; i < m; ++i) pre[i + 1] = f[i] * pre[i];
    suf[m] = Matrix2::identity();
    for (int i = m - 1; i >= 0; --i) suf[i] = suf[i + 1] * f[i];
    Matrix2 dphi = Matrix2::zero();
    for (int i = 0; i < m; ++i)
      dphi = dphi + suf[i + 1] * (logs[list[i].first] * cplx(list[i].second, 0.0)) * pre[i + 1];
    if (!ct.gauge.empty()) dphi = ct.gauge[w] * dphi * ct.gauge[b].inverse();
    Matrix2 dk = dphi * (k.eps[e] * k.nu[e]);
    int iw = k.windex[w], ib = k.bindex[b];
    cplx term = 0.0;
    for (int r = 0; r < 2; ++r)
      for (int col = 0; col < 2; ++col) term += inv(2 * ib + r, 2 * iw + col) * dk(col, r);
    out.push_back({e, term});
  }
  return out;
}

// d/dt log qdet along connection_path(c, t): the trace of K^{-1} dK/dt,
// accumulated edge by edge over zipper crossings.
inline cplx logdet_path_derivative(const PlanarGraph& g, const Connection& c, double t,
                                   const std::vector<double>* nu = nullptr) {
  cplx total = 0.0;
  for (auto& [e, term] : logdet_edge_contributions(g, c, t, nu)) total += term;
  return total;
}

// log of det(a^{-1} b) for nearby matrices; safe against branch jumps when
// the ratio is close to the identity.
inline cplx logdet_ratio(const KMatrix& a, const KMatrix& b) {
  Eigen::MatrixXcd m = a.doubled.partialPivLu().solve(b.doubled);
  return std::log(m.partialPivLu().determinant());
}

}  // namespace qdimer
