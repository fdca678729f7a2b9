#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>

#include "qdimer/kasteleyn.hpp"
#include "qdimer/lattice.hpp"
#include "qdimer/topology.hpp"

using namespace qdimer;

namespace {

Connection one_zipper(Zipper z) {
  Connection c;
  c.zippers.push_back(std::move(z));
  return c;
}

// expectation of the product of half-traces over a lamination distribution
cplx lamination_expectation(const std::map<Lamination, double>& dist,
                            const std::vector<Matrix2>& gens) {
  cplx total = 0.0;
  for (const auto& [lam, p] : dist) {
    cplx prod = p;
    for (const Word& w : lam) prod *= 0.5 * word_trace(w, gens);
    total += prod;
  }
  return total;
}

Matrix2 su2_with_trace(double x) {
  double s = std::sqrt(std::max(0.0, 1.0 - x * x / 4.0));
  return {cplx(x / 2, 0), cplx(-s, 0), cplx(s, 0), cplx(x / 2, 0)};
}

}  // namespace

TEST_CASE("word reduction and canonical classes") {
  CHECK(free_reduce({1, -1}).empty());
  CHECK(free_reduce({1, 2, -2, 3}) == Word{1, 3});
  CHECK(free_reduce({1, 2, -2, -1}).empty());
  CHECK(cyclic_reduce({1, 2, -1}) == Word{2});
  CHECK(cyclic_reduce({2, 1, -1, -2}).empty());

  // rotations, inverses, and conjugates share one canonical form
  Word base = canonical_class({1, 2});
  CHECK(canonical_class({2, 1}) == base);
  CHECK(canonical_class({-2, -1}) == base);
  CHECK(canonical_class({3, 1, 2, -3}) == base);
  CHECK_FALSE(canonical_class({1, -2}) == base);

  // a canonical form is itself reduced and nonempty for nontrivial classes
  CHECK(canonical_class({1, 1}) == Word{-1, -1});
  CHECK(canonical_class({1}) == Word{-1});
}

TEST_CASE("word traces are class functions") {
  std::mt19937 rng(5);
  std::vector<Matrix2> gens = {random_sl2(rng), random_sl2(rng)};
  cplx t = word_trace({1, 2}, gens);
  CHECK(std::abs(word_trace({2, 1}, gens) - t) < 1e-12);
  CHECK(std::abs(word_trace({-2, -1}, gens) - t) < 1e-12);
  CHECK(std::abs(word_trace({2, 1, 2, -2}, gens) - t) < 1e-12);
  CHECK(std::abs(word_trace({1}, gens) - gens[0].trace()) < 1e-12);
}

TEST_CASE("annulus laminations and their superposition distribution") {
  PlanarGraph g = build_grid_region({4, 4, {{1, 1, 1, 1}}}).graph;
  std::mt19937 rng(17);
  Matrix2 u = random_su2(rng);
  Connection c = one_zipper(vertical_zipper_down(g, 2, 2, u));

  auto dist = mu0_lamination_distribution_exact(g, c);
  double total = 0.0;
  for (const auto& [lam, p] : dist) {
    total += p;
    CHECK(p > 0.0);
    for (const Word& w : lam) CHECK(w == Word{-1});  // every loop circles the hole once
  }
  CHECK(total == Catch::Approx(1.0));
  CHECK(dist.count(Lamination{}) == 1);
  CHECK(dist.count(Lamination{{-1}}) == 1);
  CHECK(dist.count(Lamination{{-1}, {-1}}) == 1);  // hole ring plus outer ring

  // the determinant reproduces the lamination expectation of half-traces
  for (double phase : {0.4, 1.1}) {
    Matrix2 v = su2_with_trace(2 * std::cos(phase));
    Connection cv = one_zipper(vertical_zipper_down(g, 2, 2, v));
    cplx lhs = qdet(assemble_kasteleyn(g, cv)) / cplx(36.0 * 36.0);
    cplx rhs = lamination_expectation(dist, {v});
    CHECK(std::abs(lhs - rhs) < 1e-10);
  }
}

TEST_CASE("two holes give free-group laminations") {
  PlanarGraph g = build_grid_region({6, 4, {{1, 1, 1, 1}, {3, 1, 1, 1}}}).graph;
  std::mt19937 rng(29);
  Matrix2 a = random_su2(rng), b = random_su2(rng);
  Connection c;
  c.zippers.push_back(vertical_zipper_down(g, 2, 2, a));
  c.zippers.push_back(vertical_zipper_down(g, 6, 2, b));

  auto dist = mu0_lamination_distribution_exact(g, c);
  double total = 0.0;
  for (const auto& [lam, p] : dist) total += p;
  CHECK(total == Catch::Approx(1.0));
  CHECK(dist.count(Lamination{}) == 1);
  CHECK(dist.count(Lamination{{-1}}) == 1);
  CHECK(dist.count(Lamination{{-2}}) == 1);
  CHECK(dist.count(Lamination{{-2, -1}}) == 1);  // one loop around both holes

  double z = single_dimer_partition(
      assemble_kasteleyn(g, [](EdgeId) { return Matrix2::identity(); }));
  cplx lhs = qdet(assemble_kasteleyn(g, c)) / cplx(z * z);
  cplx rhs = lamination_expectation(dist, {a, b});
  CHECK(std::abs(lhs - rhs) < 1e-10);
}

TEST_CASE("cylinder laminations match the winding distribution") {
  PlanarGraph g = cylinder_graph(3, 2);
  Connection c = one_zipper(cylinder_axial_zipper(g, 0, Matrix2::identity()));
  auto dist = mu0_lamination_distribution_exact(g, c);

  std::vector<double> n = cylinder_winding_counts_oracle(g);
  REQUIRE(n.size() == 3);
  double z2 = 0.0;
  for (size_t k = 0; k < n.size(); ++k) z2 += n[k] * std::ldexp(1.0, (int)k);
  CHECK(z2 == Catch::Approx(400.0));

  for (size_t k = 0; k < n.size(); ++k) {
    Lamination lam(k, Word{-1});
    REQUIRE(dist.count(lam) == 1);
    CHECK(dist.at(lam) == Catch::Approx(n[k] * std::ldexp(1.0, (int)k) / z2));
  }
}

TEST_CASE("haar trace moments and quadrature extraction") {
  CHECK(haar_trace_moment(0) == 1.0);
  CHECK(haar_trace_moment(1) == 0.0);
  CHECK(haar_trace_moment(2) == 1.0);
  CHECK(haar_trace_moment(4) == 2.0);
  CHECK(haar_trace_moment(6) == 5.0);
  CHECK(haar_trace_moment(8) == 14.0);

  auto f = [](double x) { return 0.3 - 0.7 * x + 0.5 * x * x + 0.2 * x * x * x * x; };
  std::vector<double> c = haar_extract_quadrature(f, 5);
  std::vector<double> want = {0.3, -0.7, 0.5, 0.0, 0.2, 0.0};
  REQUIRE(c.size() == want.size());
  for (size_t i = 0; i < c.size(); ++i) CHECK(c[i] == Catch::Approx(want[i]).margin(1e-10));
}

TEST_CASE("haar extraction recovers the cylinder loop polynomial") {
  PlanarGraph g = cylinder_graph(3, 2);
  auto f = [&](double x) {
    Connection c = one_zipper(cylinder_axial_zipper(g, 0, su2_with_trace(x)));
    return qdet(assemble_kasteleyn(g, c)).real();
  };
  std::vector<double> c = haar_extract_quadrature(f, 3);
  CHECK(c[0] == Catch::Approx(324.0));
  CHECK(c[1] == Catch::Approx(36.0));
  CHECK(c[2] == Catch::Approx(1.0));
  CHECK(c[3] == Catch::Approx(0.0).margin(1e-8));
}

TEST_CASE("monte carlo haar extraction") {
  auto f = [](const Matrix2& u) {
    double x = u.trace().real();
    return x * x;
  };
  HaarEstimate est = haar_extract_mc(f, 2, 4000, 50, 2024);
  REQUIRE(est.coeff.size() == 3);
  CHECK(std::abs(est.coeff[2] - 1.0) < 5.0 * est.sigma[2]);
  CHECK(est.sigma[2] < 0.05);
  CHECK(std::abs(est.coeff[0]) < 5.0 * est.sigma[0] + 1e-9);
  CHECK(std::abs(est.coeff[1]) < 5.0 * est.sigma[1] + 1e-9);

  // batch seeding makes the estimate independent of the thread count
  setenv("QDIMER_THREADS", "3", 1);
  HaarEstimate three = haar_extract_mc(f, 2, 1000, 10, 99);
  setenv("QDIMER_THREADS", "1", 1);
  HaarEstimate one = haar_extract_mc(f, 2, 1000, 10, 99);
  unsetenv("QDIMER_THREADS");
  for (int j = 0; j <= 2; ++j) CHECK(three.coeff[j] == one.coeff[j]);
}
