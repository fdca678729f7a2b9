#include <catch2/catch_amalgamated.hpp>

#include "qdimer/enumerate.hpp"
#include "qdimer/lattice.hpp"

using namespace qdimer;

TEST_CASE("cover counts on small graphs") {
  CHECK(all_dimer_covers(build_rectangle(2, 3).graph).size() == 3);
  CHECK(all_dimer_covers(build_rectangle(4, 4).graph).size() == 36);
  // derived graphs count rooted spanning trees of the region
  CHECK(all_dimer_covers(temperleyan_graph(build_rectangle(2, 2)).g).size() == 4);
  CHECK(all_dimer_covers(temperleyan_graph(build_rectangle(3, 3)).g).size() == 192);
  CHECK(all_dimer_covers(cylinder_graph(1, 2)).size() == 5);
  CHECK(all_dimer_covers(cylinder_graph(3, 2)).size() == 20);
  CHECK(all_dimer_covers(cylinder_graph(1, 1)).size() == 2);
}

TEST_CASE("superposition decomposes into doubled edges and loops") {
  PlanarGraph g = build_rectangle(2, 2).graph;  // 4-cycle
  std::vector<Cover> covers = all_dimer_covers(g);
  REQUIRE(covers.size() == 2);

  PairConfig same = pair_to_config(g, covers[0], covers[0]);
  CHECK(same.doubled.size() == 2);
  CHECK(same.loops.empty());

  PairConfig cross = pair_to_config(g, covers[0], covers[1]);
  CHECK(cross.doubled.empty());
  REQUIRE(cross.loops.size() == 1);
  CHECK(cross.loops[0].edges.size() == 4);
  CHECK(cross.loops[0].base == 0);
}

TEST_CASE("thin cylinder superposition winds") {
  PlanarGraph g = cylinder_graph(1, 1);
  std::vector<Cover> covers = all_dimer_covers(g);
  REQUIRE(covers.size() == 2);
  PairConfig cfg = pair_to_config(g, covers[0], covers[1]);
  REQUIRE(cfg.loops.size() == 1);
  CHECK(cfg.loops[0].edges.size() == 2);
  CHECK(std::abs(loop_winding(g, cfg.loops[0])) == 1);
}

TEST_CASE("trivial connection gives the squared matching count") {
  Connection triv;
  auto check_square = [&](const PlanarGraph& g) {
    double z = single_dimer_partition_oracle(g);
    cplx zdd = double_dimer_partition_oracle(g, triv);
    CHECK(std::abs(zdd - z * z) < 1e-9);
  };
  check_square(temperleyan_graph(build_rectangle(2, 2)).g);
  check_square(cylinder_graph(1, 2));
}

TEST_CASE("edge weights multiply through") {
  PlanarGraph g = build_rectangle(2, 2).graph;
  std::vector<double> nu(g.edges.size(), 1.0);
  nu[0] = 2.0;
  nu[2] = 0.5;
  Connection triv;
  double z = single_dimer_partition_oracle(g, &nu);
  cplx zdd = double_dimer_partition_oracle(g, triv, &nu);
  CHECK(std::abs(zdd - z * z) < 1e-12);
}

TEST_CASE("cylinder winding counts") {
  std::vector<double> n12 = cylinder_winding_counts_oracle(cylinder_graph(1, 2));
  REQUIRE(n12.size() == 3);
  CHECK(n12[0] == Catch::Approx(9.0));
  CHECK(n12[1] == Catch::Approx(6.0));
  CHECK(n12[2] == Catch::Approx(1.0));

  std::vector<double> n32 = cylinder_winding_counts_oracle(cylinder_graph(3, 2));
  REQUIRE(n32.size() == 3);
  CHECK(n32[0] == Catch::Approx(324.0));
  CHECK(n32[1] == Catch::Approx(36.0));
  CHECK(n32[2] == Catch::Approx(1.0));

  // the counts resum to the loop partition function at any trace value
  PlanarGraph g = cylinder_graph(3, 2);
  double lam = 1.3;
  Connection c;
  c.zippers.push_back(cylinder_axial_zipper(g, 1, Matrix2::diagonal(lam)));
  double x = lam + 1.0 / lam;
  cplx zdd = double_dimer_partition_oracle(g, c);
  double expect = n32[0] + n32[1] * x + n32[2] * x * x;
  CHECK(std::abs(zdd - expect) < 1e-9);
}

TEST_CASE("loop measure distribution on the thin cylinder") {
  // height-1 circumference-2 cylinder: two covers, superpositions give one
  // winding loop with probability 1/2 under the doubled measure
  std::vector<double> n11 = cylinder_winding_counts_oracle(cylinder_graph(1, 1));
  REQUIRE(n11.size() == 2);
  CHECK(n11[0] == Catch::Approx(2.0));
  CHECK(n11[1] == Catch::Approx(1.0));
  double p1_pairs = n11[1] * 2.0 / (n11[0] + n11[1] * 2.0);
  CHECK(p1_pairs == Catch::Approx(0.5));
  double p1_traces = n11[1] / (n11[0] + n11[1]);
  CHECK(p1_traces == Catch::Approx(1.0 / 3.0));
}
