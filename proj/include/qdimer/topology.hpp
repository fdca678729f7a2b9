#pragma once

// Homotopy bookkeeping for superposition loops. A family of pairwise
// disjoint cuts (zippers) from each hole or cylinder end turns the surface
// into a disk, so the signed sequence of cut crossings along a loop reads
// off its class in the free group on the cuts. Free plus cyclic reduction
// gives the conjugacy class; quotienting by inversion forgets orientation.
// A configuration's lamination is the sorted multiset of its nontrivial
// classes, and at desk scale the exact superposition distribution over
// laminations comes from pair enumeration. Haar-moment extraction recovers
// polynomial coefficients in the monodromy trace from values of a partition
// function ratio.

#include <atomic>
#include <cstdlib>
#include <thread>

#include <Eigen/Dense>

#include "connection.hpp"
#include "enumerate.hpp"

namespace qdimer {

using Word = std::vector<int>;  // entries +-(zipper index + 1)

inline Word free_reduce(const Word& w) {
  Word out;
  for (int g : w) {
    if (!out.empty() && out.back() == -g)
      out.pop_back();
    else
      out.push_back(g);
  }
  return out;
}

inline Word cyclic_reduce(Word w) {
  w = free_reduce(w);
  size_t lo = 0, hi = w.size();
  while (hi - lo >= 2 && w[lo] == -w[hi - 1]) {
    ++lo;
    --hi;
  }
  return Word(w.begin() + lo, w.begin() + hi);
}

inline Word inverse_word(const Word& w) {
  Word out(w.rbegin(), w.rend());
  for (int& g : out) g = -g;
  return out;
}

// Canonical representative of the unoriented conjugacy class: the
// lexicographically smallest rotation of the reduced word or its inverse.
inline Word canonical_class(const Word& w) {
  Word r = cyclic_reduce(w);
  if (r.empty()) return r;
  Word best = r;
  for (Word cand : {r, inverse_word(r)}) {
    for (size_t s = 0; s < cand.size(); ++s) {
      std::rotate(cand.begin(), cand.begin() + 1, cand.end());
      if (cand < best) best = cand;
    }
  }
  return best;
}

// Signed crossing sequence of a loop against the connection's zippers,
// walked from the loop's base vertex. Requires the zippers to be pairwise
// edge-disjoint so the order within one edge is unambiguous.
inline Word crossing_word(const PlanarGraph& g, const Connection& c, const Loop& loop) {
  std::map<EdgeId, std::pair<int, int>> cut;  // edge -> (zipper, white-to-black sign)
  for (size_t zi = 0; zi < c.zippers.size(); ++zi)
    for (size_t i = 0; i < c.zippers[zi].edges.size(); ++i) {
      EdgeId e = c.zippers[zi].edges[i];
      if (cut.count(e)) throw std::runtime_error("crossing_word: cuts share an edge");
      cut[e] = {(int)zi, c.zippers[zi].signs[i]};
    }
  Word w;
  VertexId at = loop.base;
  for (EdgeId e : loop.edges) {
    auto it = cut.find(e);
    if (it != cut.end()) {
      auto [zi, sign] = it->second;
      bool from_white = is_white(g.vertices[at].cls);
      w.push_back((from_white ? sign : -sign) * (zi + 1));
    }
    at = g.other(e, at);
  }
  if (at != loop.base) throw std::runtime_error("crossing_word: loop not closed");
  return w;
}

inline Word classify_loop(const PlanarGraph& g, const Connection& c, const Loop& loop) {
  return canonical_class(crossing_word(g, c, loop));
}

// Sorted multiset of nontrivial loop classes of a superposition
// configuration.
using Lamination = std::vector<Word>;

inline Lamination lamination_of(const PlanarGraph& g, const Connection& c,
                                const PairConfig& cfg) {
  Lamination lam;
  for (const Loop& l : cfg.loops) {
    Word w = classify_loop(g, c, l);
    if (!w.empty()) lam.push_back(std::move(w));
  }
  std::sort(lam.begin(), lam.end());
  return lam;
}

// Exact superposition distribution over laminations by enumerating ordered
// cover pairs: an unordered configuration with k loops arises from 2^k
// ordered pairs, which is exactly its doubling weight, so each ordered pair
// contributes nu/Z^2.
inline std::map<Lamination, double> mu0_lamination_distribution_exact(
    const PlanarGraph& g, const Connection& c, const std::vector<double>* nu = nullptr) {
  std::vector<Cover> covers = all_dimer_covers(g);
  auto weight = [&](const Cover& cov) {
    double w = 1.0;
    if (nu)
      for (EdgeId e : cov) w *= (*nu)[e];
    return w;
  };
  std::map<Lamination, double> mass;
  double total = 0.0;
  for (const Cover& a : covers)
    for (const Cover& b : covers) {
      double w = weight(a) * weight(b);
      mass[lamination_of(g, c, pair_to_config(g, a, b))] += w;
      total += w;
    }
  for (auto& [lam, m] : mass) m /= total;
  return mass;
}

// Monodromy trace of a class word given the zipper matrices; invariant under
// rotation and inversion of the word.
inline cplx word_trace(const Word& w, const std::vector<Matrix2>& gens) {
  Matrix2 m = Matrix2::identity();
  for (int g : w) {
    const Matrix2& a = gens[std::abs(g) - 1];
    m = (g > 0 ? a : a.inverse()) * m;
  }
  return m.trace();
}

// --- Haar-moment extraction on the trace variable ---

inline double catalan(int m) {
  double c = 1.0;
  for (int i = 0; i < m; ++i) c = c * 2.0 * (2 * i + 1) / (i + 2);
  return c;
}

// Moments of X = tr(U) under the uniform measure on the unit quaternions:
// odd ones vanish, E[X^{2m}] is the m-th Catalan number.
inline double haar_trace_moment(int p) { return p % 2 ? 0.0 : catalan(p / 2); }

inline Eigen::MatrixXd haar_gram(int kmax) {
  Eigen::MatrixXd gram(kmax + 1, kmax + 1);
  for (int j = 0; j <= kmax; ++j)
    for (int k = 0; k <= kmax; ++k) gram(j, k) = haar_trace_moment(j + k);
  return gram;
}

// Coefficients c with f(X) = sum_k c_k X^k from exact integration: the trace
// of a uniform unit quaternion has the semicircle density on [-2,2], so
// second-kind Chebyshev nodes integrate E[f X^j] exactly for polynomial f,
// and the Gram system in the monomial basis is solved directly.
inline std::vector<double> haar_extract_quadrature(const std::function<double(double)>& f,
                                                   int kmax) {
  int nodes = 2 * kmax + 2;  // exact through degree 2*kmax + 1
  std::vector<double> fx(nodes), x(nodes), wgt(nodes);
  for (int j = 1; j <= nodes; ++j) {
    double th = M_PI * j / (nodes + 1);
    x[j - 1] = 2.0 * std::cos(th);
    wgt[j - 1] = (2.0 / (nodes + 1)) * std::sin(th) * std::sin(th);
    fx[j - 1] = f(x[j - 1]);
  }
  Eigen::VectorXd b(kmax + 1);
  for (int j = 0; j <= kmax; ++j) {
    double s = 0.0;
    for (int n = 0; n < nodes; ++n) s += wgt[n] * fx[n] * std::pow(x[n], j);
    b(j) = s;
  }
  Eigen::VectorXd c = haar_gram(kmax).ldlt().solve(b);
  return std::vector<double>(c.data(), c.data() + kmax + 1);
}

struct HaarEstimate {
  std::vector<double> coeff;  // posterior mean per monomial degree
  std::vector<double> sigma;  // standard error over batches
};

inline int env_thread_count() {
  if (const char* s = std::getenv("QDIMER_THREADS")) {
    int n = std::atoi(s);
    if (n > 0) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? (int)hw : 1;
}

// Monte Carlo variant: sample uniform unit quaternions, average f(U) X^j per
// batch, solve the Gram system per batch, and report mean and standard error
// across batches. Batches are seeded independently so the result does not
// depend on the thread count.
inline HaarEstimate haar_extract_mc(const std::function<double(const Matrix2&)>& f, int kmax,
                                    int samples_per_batch, int batches, std::uint64_t seed) {
  Eigen::MatrixXd gram = haar_gram(kmax);
  std::vector<Eigen::VectorXd> solved(batches);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int bi = next.fetch_add(1); bi < batches; bi = next.fetch_add(1)) {
      std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ull * (bi + 1));
      Eigen::VectorXd b = Eigen::VectorXd::Zero(kmax + 1);
      for (int s = 0; s < samples_per_batch; ++s) {
        Matrix2 u = random_su2(rng);
        double x = u.trace().real();
        double fu = f(u);
        double xp = 1.0;
        for (int j = 0; j <= kmax; ++j) {
          b(j) += fu * xp;
          xp *= x;
        }
      }
      solved[bi] = gram.ldlt().solve(b / samples_per_batch);
    }
  };
  int nthreads = std::min(env_thread_count(), batches);
  std::vector<std::thread> pool;
  for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  HaarEstimate est;
  est.coeff.assign(kmax + 1, 0.0);
  est.sigma.assign(kmax + 1, 0.0);
  for (const auto& c : solved)
    for (int j = 0; j <= kmax; ++j) est.coeff[j] += c(j);
  for (double& c : est.coeff) c /= batches;
  for (const auto& c : solved)
    for (int j = 0; j <= kmax; ++j) {
      double d = c(j) - est.coeff[j];
      est.sigma[j] += d * d;
    }
  for (double& s : est.sigma) s = std::sqrt(s / (batches * std::max(1, batches - 1)));
  return est;
}

}  // namespace qdimer
