#pragma once

// Closed-form loop statistics on the cylinder, half-plane Green potentials,
// lattice Green operators with their Kasteleyn-inverse reconstruction, and
// the exact two-point loop observable on the upper half plane.

#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lattice.hpp"

namespace qdimer {

// ---------------------------------------------------------------------------
// Cylinder closed forms. For the circumference-2n, height-m cylinder the
// determinant of the phased adjacency operator with a trace-X monodromy
// factorizes over transverse modes theta_k = pi k / (m+1):
//   det(X) = prod_k (X + t_k),  t_k = r^{2n} + r^{-2n},
// where r is a root of r^2 + 2 cos(theta_k) r - 1 = 0. The coefficient of X^k
// counts pair configurations with k winding loops, weighted 2^(contractible).

inline std::vector<double> cylinder_detK_t_values(int n, int m) {
  if (n < 1 || n % 2 == 0)
    throw std::runtime_error("cylinder_detK_t_values: n must be odd and positive");
  if (m < 1) throw std::runtime_error("cylinder_detK_t_values: m must be positive");
  std::vector<double> t(m);
  for (int k = 1; k <= m; ++k) {
    double c = std::cos(M_PI * k / (m + 1));
    double s = std::sqrt(1.0 + c * c);
    // Roots -c +- s have product -1; even powers make both terms positive.
    t[k - 1] = std::pow(s - c, 2 * n) + std::pow(s + c, 2 * n);
  }
  return t;
}

inline std::complex<double> cylinder_detK(int n, int m, std::complex<double> lambda) {
  if (std::abs(lambda) == 0.0) throw std::runtime_error("cylinder_detK: lambda must be nonzero");
  std::complex<double> X = lambda + 1.0 / lambda;
  std::complex<double> det = 1.0;
  for (double t : cylinder_detK_t_values(n, m)) det *= X + t;
  return det;
}

// Coefficients N_0..N_m of prod_k (X + t_k), ascending in X. Exact integer
// values at desk scale; the factors overflow double near n, m ~ 180.
inline std::vector<double> cylinder_loop_poly(int n, int m) {
  std::vector<double> coeff{1.0};
  for (double t : cylinder_detK_t_values(n, m)) {
    std::vector<double> next(coeff.size() + 1, 0.0);
    for (size_t i = 0; i < coeff.size(); ++i) {
      next[i] += t * coeff[i];
      next[i + 1] += coeff[i];
    }
    coeff = std::move(next);
  }
  return coeff;
}

// Two normalizations of the winding-loop count distribution. PairMeasure is
// the law of two independent uniform covers, P(k) = N_k 2^k / sum_j N_j 2^j;
// TraceMarking normalizes the plain coefficients, P(k) = N_k / sum_j N_j.
enum class LoopCountConvention { PairMeasure, TraceMarking };

// Probability vector P(0..m). Built by convolving the normalized linear
// factors (t_k + X0 X)/(t_k + X0), X0 = 2 or 1, which keeps every partial
// result in [0, 1] regardless of how large the t_k grow.
inline std::vector<double> cylinder_pgf(int n, int m, LoopCountConvention conv) {
  double X0 = conv == LoopCountConvention::PairMeasure ? 2.0 : 1.0;
  std::vector<double> p{1.0};
  for (double t : cylinder_detK_t_values(n, m)) {
    std::vector<double> next(p.size() + 1, 0.0);
    double u = t / (t + X0), v = X0 / (t + X0);
    for (size_t i = 0; i < p.size(); ++i) {
      next[i] += u * p[i];
      next[i + 1] += v * p[i];
    }
    p = std::move(next);
  }
  return p;
}

struct AsymptoticPgf {
  std::vector<double> coeff;  // P(0..k_max) or longer
  double tail_bound;          // multiplicative deviation bound of the dropped factors
};

// Large-cylinder limit of the loop-count distribution at aspect ratio tau
// (circumference n over rows m, with q = exp(-tau pi)). Even m, trace marking:
//   prod_{j odd} ((1 + q^j X + q^{2j}) / (1 + q^j + q^{2j}))^2.
// Odd m keeps an exact middle factor (2 + X)/3 and runs over even j >= 2.
// The pair-measure convention doubles the X weight per factor and normalizes
// at X = 2, exactly as each finite factor (X0 X + t)/(X0 + t) rewrites to
// (1 + X0 q^j X + q^{2j}) / (1 + X0 q^j + q^{2j}). Factors beyond j_max, or
// with q^j below 1e-18, are dropped; tail_bound bounds |dropped product - 1|
// on |X| <= 2.
inline AsymptoticPgf cylinder_pgf_asymptotic(
    double tau, bool m_even, int k_max,
    LoopCountConvention conv = LoopCountConvention::TraceMarking, int j_max = 512) {
  if (tau <= 0.0) throw std::runtime_error("cylinder_pgf_asymptotic: tau must be positive");
  double x0 = conv == LoopCountConvention::PairMeasure ? 2.0 : 1.0;
  double q = std::exp(-tau * M_PI);
  std::vector<double> p{1.0};
  if (!m_even) p = {2.0 / (2.0 + x0), x0 / (2.0 + x0)};
  int j = m_even ? 1 : 2;
  double qj = std::pow(q, j);
  for (; j <= j_max && qj >= 1e-18; j += 2, qj *= q * q) {
    double d = 1.0 + x0 * qj + qj * qj;
    double a0 = (1.0 + qj * qj) / d, a1 = x0 * qj / d;
    for (int rep = 0; rep < 2; ++rep) {
      std::vector<double> next(p.size() + 1, 0.0);
      for (size_t i = 0; i < p.size(); ++i) {
        next[i] += a0 * p[i];
        next[i + 1] += a1 * p[i];
      }
      p = std::move(next);
    }
  }
  double tail = std::expm1(6.0 * x0 * qj / (1.0 - q * q));
  if ((int)p.size() < k_max + 1) p.resize(k_max + 1, 0.0);
  return {std::move(p), tail};
}

// ---------------------------------------------------------------------------
// Half-plane Green potentials. The analytic potential in v whose real part is
// the Green function for the upper half plane:
//   Dirichlet  -(1/2pi) log((u - v)/(conj(u) - v))
//   Neumann    -(1/2pi) log((u - v) (conj(u) - v))
// The real part is branch free; the imaginary part uses principal logs.

enum class GreenKind { Dirichlet, Neumann };

inline std::complex<double> halfplane_green_potential(std::complex<double> u,
                                                      std::complex<double> v,
                                                      GreenKind kind) {
  if (u.imag() <= 0.0 || v.imag() <= 0.0)
    throw std::runtime_error("halfplane_green_potential: points must be in the open half plane");
  if (std::abs(u - v) == 0.0)
    throw std::runtime_error("halfplane_green_potential: coincident points");
  std::complex<double> a = u - v, b = std::conj(u) - v;
  double c = -1.0 / (2.0 * M_PI);
  return kind == GreenKind::Dirichlet ? c * std::log(a / b) : c * std::log(a * b);
}

// Holomorphic and antiholomorphic derivatives of the Dirichlet potential in
// its first argument. The Neumann potential has the same u-derivative and the
// negated conj(u)-derivative.
inline std::complex<double> halfplane_F_plus(std::complex<double> u, std::complex<double> v) {
  return -1.0 / (2.0 * M_PI * (u - v));
}

inline std::complex<double> halfplane_F_minus(std::complex<double> u, std::complex<double> v) {
  return 1.0 / (2.0 * M_PI * (std::conj(u) - v));
}

// ---------------------------------------------------------------------------
// Lattice Green operators on a grid region. Sites are addressed by the same
// half-step coordinates the derived bipartite graph uses: region vertices at
// (2i, 2j), bounded cells at (2i+1, 2j+1). Queries at absent sites return 0,
// which encodes the grounded boundary (outer face) and the pinned vertex x0.

struct GreenOperator {
  GreenKind kind;
  std::vector<std::pair<int, int>> sites;
  std::map<std::pair<int, int>, int> index;
  Eigen::MatrixXd values;

  bool has(int x2, int y2) const { return index.count({x2, y2}) > 0; }
  double at(std::pair<int, int> a, std::pair<int, int> b) const {
    auto ia = index.find(a), ib = index.find(b);
    if (ia == index.end() || ib == index.end()) return 0.0;
    return values(ia->second, ib->second);
  }
};

// Dense inverse of a reduced combinatorial Laplacian (rows and columns that
// survive grounding or pinning).
inline Eigen::MatrixXd green_solve(const Eigen::MatrixXd& laplacian) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(laplacian);
  if (!lu.isInvertible()) throw std::runtime_error("green_solve: singular Laplacian");
  return lu.inverse();
}

// Dirichlet mode: Green function of the cell (dual) Laplacian, grounded at
// the outer face, so every diagonal Laplacian entry is 4. Neumann mode: Green
// function of the region vertex Laplacian pinned at x0, G(x0, .) = 0.
inline GreenOperator discrete_green(const GridRegion& region, GreenKind kind) {
  GreenOperator g;
  g.kind = kind;
  if (kind == GreenKind::Dirichlet) {
    for (auto& c : region.cells) g.sites.push_back({2 * c.first + 1, 2 * c.second + 1});
  } else {
    for (auto& [ij, vid] : region.vertex_at) {
      (void)vid;
      if (ij == region.x0) continue;
      g.sites.push_back({2 * ij.first, 2 * ij.second});
    }
  }
  std::sort(g.sites.begin(), g.sites.end(), [](auto& a, auto& b) {
    return std::tie(a.second, a.first) < std::tie(b.second, b.first);
  });
  int n = (int)g.sites.size();
  for (int i = 0; i < n; ++i) g.index[g.sites[i]] = i;

  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  if (kind == GreenKind::Dirichlet) {
    for (int i = 0; i < n; ++i) {
      lap(i, i) = 4.0;
      auto [x2, y2] = g.sites[i];
      int ci = (x2 - 1) / 2, cj = (y2 - 1) / 2;
      // East and north neighbors; the separating region edge must exist.
      if (region.vedge_at.count({ci + 1, cj}) && g.index.count({x2 + 2, y2})) {
        int j = g.index.at({x2 + 2, y2});
        lap(i, j) -= 1.0;
        lap(j, i) -= 1.0;
      }
      if (region.hedge_at.count({ci, cj + 1}) && g.index.count({x2, y2 + 2})) {
        int j = g.index.at({x2, y2 + 2});
        lap(i, j) -= 1.0;
        lap(j, i) -= 1.0;
      }
    }
  } else {
    for (const Edge& e : region.graph.edges) {
      const Vertex &u = region.graph.vertices[e.u], &v = region.graph.vertices[e.v];
      auto iu = g.index.find({u.x2, u.y2}), iv = g.index.find({v.x2, v.y2});
      // Degrees count every region edge, including edges into the pin.
      if (iu != g.index.end()) lap(iu->second, iu->second) += 1.0;
      if (iv != g.index.end()) lap(iv->second, iv->second) += 1.0;
      if (iu != g.index.end() && iv != g.index.end()) {
        lap(iu->second, iv->second) -= 1.0;
        lap(iv->second, iu->second) -= 1.0;
      }
    }
  }
  g.values = green_solve(lap);
  return g;
}

// ---------------------------------------------------------------------------
// Kasteleyn inverse of the derived bipartite graph from Green differences.
// For a horizontal edge site w the inverse column takes vertex Green
// differences across w toward vertex blacks and -i times cell Green
// differences across w toward cell blacks; vertical edge sites swap the
// roles. Rows and columns follow the graph's black and white vertex order.
// Requires a hole-free region (no removed edge sites).
inline Eigen::MatrixXcd kinv_via_green(const Temperleyan& t) {
  if (!t.region.spec.holes.empty())
    throw std::runtime_error("kinv_via_green: region must be hole free");
  GreenOperator gn = discrete_green(t.region, GreenKind::Neumann);
  GreenOperator gd = discrete_green(t.region, GreenKind::Dirichlet);
  std::vector<const Vertex*> whites, blacks;
  for (const Vertex& v : t.g.vertices)
    (is_white(v.cls) ? whites : blacks).push_back(&v);
  Eigen::MatrixXcd kinv(blacks.size(), whites.size());
  const std::complex<double> mi(0.0, -1.0);
  for (size_t iw = 0; iw < whites.size(); ++iw) {
    const Vertex& w = *whites[iw];
    for (size_t ib = 0; ib < blacks.size(); ++ib) {
      const Vertex& b = *blacks[ib];
      std::pair<int, int> bp{b.x2, b.y2};
      std::complex<double> val;
      if (w.cls == VertexClass::W0) {
        if (b.cls == VertexClass::B0)
          val = gn.at({w.x2 + 1, w.y2}, bp) - gn.at({w.x2 - 1, w.y2}, bp);
        else
          val = mi * (gd.at({w.x2, w.y2 + 1}, bp) - gd.at({w.x2, w.y2 - 1}, bp));
      } else {
        if (b.cls == VertexClass::B1)
          val = gd.at({w.x2 + 1, w.y2}, bp) - gd.at({w.x2 - 1, w.y2}, bp);
        else
          val = mi * (gn.at({w.x2, w.y2 + 1}, bp) - gn.at({w.x2, w.y2 - 1}, bp));
      }
      kinv(ib, iw) = val;
    }
  }
  return kinv;
}

// ---------------------------------------------------------------------------
// Discrete Cauchy-Riemann residues. A section assigns a complex value to each
// black site (vertex blacks carry the real part u, cell blacks carry i times
// the face part v). The residue at a white site is the phase-weighted sum of
// the neighboring black values, zero exactly where the section is discrete
// analytic; absent neighbors (the pin x0, the outer face) contribute zero.
// In standard form the residue is real at horizontal sites and imaginary at
// vertical sites.

struct DiscreteSection {
  std::map<std::pair<int, int>, std::complex<double>> value;

  std::complex<double> at(int x2, int y2) const {
    auto it = value.find({x2, y2});
    return it == value.end() ? std::complex<double>(0.0) : it->second;
  }
};

inline std::vector<std::complex<double>> check_discrete_CR(const Temperleyan& t,
                                                           const DiscreteSection& f) {
  static const std::complex<double> phase[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  static const int dx[4] = {1, 0, -1, 0}, dy[4] = {0, 1, 0, -1};
  std::vector<std::complex<double>> residue;
  for (const Vertex& v : t.g.vertices) {
    if (!is_white(v.cls)) continue;
    std::complex<double> r = 0.0;
    for (int d = 0; d < 4; ++d) r += phase[d] * f.at(v.x2 + dx[d], v.y2 + dy[d]);
    residue.push_back(r);
  }
  return residue;
}

// ---------------------------------------------------------------------------
// Two-point loop observable on the upper half plane: the expected number of
// loops surrounding both marked points.

inline double two_point_loop_expectation(std::complex<double> z1, std::complex<double> z2) {
  if (z1.imag() <= 0.0 || z2.imag() <= 0.0)
    throw std::runtime_error("two_point_loop_expectation: points must be in the open half plane");
  if (std::abs(z1 - z2) == 0.0)
    throw std::runtime_error("two_point_loop_expectation: coincident points");
  return -(4.0 / (M_PI * M_PI)) * std::log(std::abs(z1 - z2) / std::abs(z1 - std::conj(z2)));
}

// Signed products contributed by one pair of crossing-edge packets, split by
// the orientation case of the two edges (R or L), per unit squared spacing.
// Their total telescopes to -(2/pi^2) Re((z1-z2)^-2 + (z1-conj z2)^-2).
struct TwoPointCases {
  double rr, rl, lr, ll;
  double sum() const { return rr + rl + lr + ll; }
};

inline TwoPointCases two_point_case_table(std::complex<double> z1, std::complex<double> z2) {
  std::complex<double> a2 = 1.0 / (z2 - z1) + 1.0 / (z2 - std::conj(z1));
  std::complex<double> s2 = 1.0 / (z2 - z1) - 1.0 / (z2 - std::conj(z1));
  std::complex<double> a1 = 1.0 / (z1 - z2) + 1.0 / (z1 - std::conj(z2));
  std::complex<double> s1 = 1.0 / (z1 - z2) - 1.0 / (z1 - std::conj(z2));
  double pi2 = M_PI * M_PI;
  return {a2.real() * a1.real() / pi2, -a2.imag() * s1.imag() / pi2,
          -s2.imag() * a1.imag() / pi2, s2.real() * s1.real() / pi2};
}

// Midpoint Riemann sum of the packet-pair table over two vertical crossing
// paths running from the boundary up to each point. The paths must occupy
// distinct columns; when the points come closer than eps^(2/3) the second
// path is displaced east to an integer number of grid columns at least that
// far. The displacement biases the value by O(eps^(2/3)) while the remaining
// near-diagonal lattice excess per row is csch^2(pi d) with d >= eps^(-1/3)
// columns, so the total error still vanishes with eps. The case sum
// integrates to minus half the expectation, hence the -2 assembly factor.
inline double two_point_loop_expectation_discrete(std::complex<double> z1,
                                                  std::complex<double> z2, double eps) {
  if (z1.imag() <= 0.0 || z2.imag() <= 0.0)
    throw std::runtime_error("two_point_loop_expectation_discrete: points must be interior");
  if (eps <= 0.0) throw std::runtime_error("two_point_loop_expectation_discrete: eps > 0 required");
  double x1 = z1.real(), x2 = z2.real();
  double min_sep = std::pow(eps, 2.0 / 3.0);
  if (std::abs(x1 - x2) < min_sep) x2 = x1 + std::ceil(min_sep / eps) * eps;
  int j1 = std::max(1, (int)std::lround(z1.imag() / eps));
  int j2 = std::max(1, (int)std::lround(z2.imag() / eps));
  double total = 0.0;
  for (int j = 0; j < j1; ++j) {
    std::complex<double> p1(x1, (j + 0.5) * eps);
    double row = 0.0;
    for (int l = 0; l < j2; ++l) {
      std::complex<double> p2(x2, (l + 0.5) * eps);
      row += two_point_case_table(p1, p2).sum();
    }
    total += row;
  }
  return -2.0 * eps * eps * total;
}

// Probability that the chordal double-dimer path from boundary point b to
// boundary point w passes left of interior point z: the harmonic measure of
// the boundary interval (b, w) seen from z.
inline double chordal_left_probability(double b, double w, std::complex<double> z) {
  if (z.imag() <= 0.0) throw std::runtime_error("chordal_left_probability: z must be interior");
  return (std::arg(z - w) - std::arg(z - b)) / M_PI;
}

}  // namespace qdimer
