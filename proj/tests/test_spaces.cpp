#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>
#include <vector>

#include "cotype/errors.hpp"
#include "cotype/measure.hpp"
#include "cotype/rng.hpp"
#include "cotype/space.hpp"
#include "cotype/space_checks.hpp"
#include "oracles.hpp"

using namespace cotype;

namespace {

Point vp(std::initializer_list<double> xs) { return vec_point(std::vector<double>(xs)); }

}  // namespace

// ---------------------------------------------------------------------------
// Coordinate spaces
// ---------------------------------------------------------------------------

TEST_CASE("lp distances match hand values") {
  LpSpace l1(2, 1.0), l2(2, 2.0), l3(2, 3.0), linf(2, infinity());
  const Point a = vp({0.0, 0.0}), b = vp({3.0, 4.0});
  REQUIRE(l1.distance(a, b) == Catch::Approx(7.0));
  REQUIRE(l2.distance(a, b) == Catch::Approx(5.0));
  REQUIRE(l3.distance(a, b) == Catch::Approx(std::pow(27.0 + 64.0, 1.0 / 3.0)));
  REQUIRE(linf.distance(a, b) == Catch::Approx(4.0));
}

TEST_CASE("lp midpoints are metric midpoints for finite p") {
  SplitRng rng(11);
  for (double p : {1.0, 2.0, 4.0}) {
    LpSpace sp(3, p);
    for (int rep = 0; rep < 20; ++rep) {
      SplitRng ra = rng.split(2 * rep), rb = rng.split(2 * rep + 1);
      const Point a = sp.sample_point(ra), b = sp.sample_point(rb);
      const Point m = sp.midpoint(a, b);
      const double d = sp.distance(a, b);
      REQUIRE(sp.distance(a, m) == Catch::Approx(d / 2).margin(1e-12));
      REQUIRE(sp.distance(m, b) == Catch::Approx(d / 2).margin(1e-12));
    }
  }
}

TEST_CASE("dimension mismatches are rejected") {
  LpSpace l2(2, 2.0);
  REQUIRE_THROWS_AS(l2.distance(vp({1.0}), vp({1.0, 2.0})), UsageError);
}

TEST_CASE("metric axioms hold on every backend family") {
  std::vector<SpacePtr> spaces;
  spaces.push_back(std::make_shared<LpSpace>(3, 2.0));
  spaces.push_back(std::make_shared<LpSpace>(2, 1.0));
  spaces.push_back(std::make_shared<LpSpace>(2, infinity()));
  spaces.push_back(std::make_shared<FiniteSpace>(std::vector<std::vector<double>>{
      {0.0, 1.0, 2.0}, {1.0, 0.0, 1.5}, {2.0, 1.5, 0.0}}));
  spaces.push_back(std::make_shared<TreeSpace>(
      4, std::vector<TreeEdge>{{0, 1, 1.0}, {1, 2, 2.0}, {1, 3, 0.5}}));
  spaces.push_back(
      std::make_shared<SnowflakeSpace>(std::make_shared<LpSpace>(2, 2.0), 0.5));
  spaces.push_back(std::make_shared<LpProductSpace>(
      std::vector<SpacePtr>{std::make_shared<LpSpace>(1, 2.0),
                            std::make_shared<LpSpace>(2, 1.0)},
      2.0));
  spaces.push_back(std::make_shared<WassersteinSpace>(
      std::make_shared<FiniteSpace>(std::vector<std::vector<double>>{
          {0.0, 1.0, 2.0}, {1.0, 0.0, 1.0}, {2.0, 1.0, 0.0}}),
      1.0));
  for (const auto& sp : spaces) {
    const AxiomReport rep = verify_metric_axioms(*sp, 16, 3);
    INFO(sp->describe());
    REQUIRE(rep.pass);
    REQUIRE(rep.triples > 0);
  }
}

// ---------------------------------------------------------------------------
// Finite spaces
// ---------------------------------------------------------------------------

TEST_CASE("finite space is a table lookup with validation") {
  FiniteSpace sp({{0.0, 2.0}, {2.0, 0.0}});
  REQUIRE(sp.distance(index_point(0), index_point(1)) == 2.0);
  REQUIRE(sp.enumerable_size() == 2);
  REQUIRE_THROWS_AS(sp.distance(index_point(0), index_point(5)), UsageError);
  // Asymmetric and triangle-violating tables are rejected at construction.
  REQUIRE_THROWS_AS(FiniteSpace({{0.0, 1.0}, {2.0, 0.0}}), UsageError);
  REQUIRE_THROWS_AS(FiniteSpace({{0.0, 1.0, 10.0}, {1.0, 0.0, 1.0}, {10.0, 1.0, 0.0}}),
                    UsageError);
}

// ---------------------------------------------------------------------------
// Trees
// ---------------------------------------------------------------------------

TEST_CASE("tree vertex distances match all-pairs shortest paths") {
  SplitRng rng(31);
  for (int rep = 0; rep < 10; ++rep) {
    SplitRng r = rng.split(rep);
    const std::size_t V = 2 + r.next_below(9);
    std::vector<TreeEdge> edges;
    std::vector<oracles::WeightedEdge> oedges;
    for (std::size_t v = 1; v < V; ++v) {
      // Random recursive tree: attach v below a uniformly chosen earlier vertex.
      const std::size_t u = r.next_below(v);
      const double len = 0.25 + r.next_unit() * 2.0;
      edges.push_back({u, v, len});
      oedges.push_back({u, v, len});
    }
    TreeSpace sp(V, edges);
    const auto want = oracles::tree_vertex_distances(V, oedges);
    for (std::size_t u = 0; u < V; ++u) {
      for (std::size_t v = 0; v < V; ++v) {
        REQUIRE(sp.distance(sp.vertex_point(u), sp.vertex_point(v)) ==
                Catch::Approx(want[u][v]).margin(1e-12));
      }
    }
  }
}

TEST_CASE("tree distances between interior edge positions") {
  // Path 0 -1- 1 -2- 2 with unit lengths; positions half way along each edge.
  TreeSpace sp(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  const Point a(TreePos{0, 0.5});  // between 0 and 1
  const Point b(TreePos{1, 0.5});  // between 1 and 2
  REQUIRE(sp.distance(a, b) == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(sp.distance(a, sp.vertex_point(2)) == Catch::Approx(1.5).margin(1e-12));
  REQUIRE(sp.distance(a, a) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("tree midpoints are metric midpoints") {
  TreeSpace sp(4, {{0, 1, 1.0}, {1, 2, 2.0}, {1, 3, 0.5}});
  SplitRng rng(5);
  for (int rep = 0; rep < 30; ++rep) {
    SplitRng ra = rng.split(2 * rep), rb = rng.split(2 * rep + 1);
    const Point a = sp.sample_point(ra), b = sp.sample_point(rb);
    const Point m = sp.midpoint(a, b);
    const double d = sp.distance(a, b);
    REQUIRE(sp.distance(a, m) == Catch::Approx(d / 2).margin(1e-9));
    REQUIRE(sp.distance(m, b) == Catch::Approx(d / 2).margin(1e-9));
  }
}

TEST_CASE("trees satisfy the nonpositive-curvature quadruple comparison") {
  TreeSpace sp(4, {{0, 1, 1.0}, {1, 2, 2.0}, {1, 3, 0.5}});
  SplitRng rng(17);
  for (int rep = 0; rep < 50; ++rep) {
    SplitRng rx = rng.split(3 * rep), ry = rng.split(3 * rep + 1), rz = rng.split(3 * rep + 2);
    const QuadrupleReport q = cat0_quadruple_check(sp, sp.sample_point(rx), sp.sample_point(ry),
                                                   sp.sample_point(rz));
    REQUIRE(q.slack <= 1e-9);
  }
}

TEST_CASE("hilbert space satisfies the quadruple comparison with equality witnesses") {
  LpSpace sp(2, 2.0);
  SplitRng rng(23);
  for (int rep = 0; rep < 50; ++rep) {
    SplitRng rx = rng.split(3 * rep), ry = rng.split(3 * rep + 1), rz = rng.split(3 * rep + 2);
    const QuadrupleReport q = cat0_quadruple_check(sp, sp.sample_point(rx), sp.sample_point(ry),
                                                   sp.sample_point(rz));
    // Euclidean space attains the comparison with equality (parallelogram law).
    REQUIRE(std::abs(q.slack) <= 1e-9);
  }
}

// ---------------------------------------------------------------------------
// Derived constructions
// ---------------------------------------------------------------------------

TEST_CASE("snowflake raises distances to the exponent") {
  auto base = std::make_shared<LpSpace>(1, 2.0);
  SnowflakeSpace sp(base, 0.5);
  REQUIRE(sp.distance(vp({0.0}), vp({9.0})) == Catch::Approx(3.0));
  REQUIRE_THROWS_AS(SnowflakeSpace(base, 0.0), UsageError);
  REQUIRE_THROWS_AS(SnowflakeSpace(base, 1.5), UsageError);
}

TEST_CASE("disjoint union separates clusters at diameter scale") {
  auto c0 = std::make_shared<FiniteSpace>(
      std::vector<std::vector<double>>{{0.0, 1.0}, {1.0, 0.0}});
  auto c1 = std::make_shared<FiniteSpace>(
      std::vector<std::vector<double>>{{0.0, 3.0}, {3.0, 0.0}});
  DisjointUnionSpace sp({c0, c1});
  const Point a(ClusterPos{0, {index_point(0)}});
  const Point b(ClusterPos{0, {index_point(1)}});
  const Point c(ClusterPos{1, {index_point(0)}});
  REQUIRE(sp.distance(a, b) == Catch::Approx(1.0));   // inside cluster 0
  REQUIRE(sp.distance(a, c) == Catch::Approx(3.0));   // max of the two diameters
  const AxiomReport rep = verify_metric_axioms(sp, 8, 1);
  REQUIRE(rep.pass);
}

TEST_CASE("product spaces combine coordinates with the stated exponent") {
  auto line = std::make_shared<LpSpace>(1, 2.0);
  auto plane = std::make_shared<LpSpace>(2, 2.0);
  LpProductSpace prod({line, plane}, 3.0);
  const Point a(TuplePos{{vp({0.0}), vp({0.0, 0.0})}});
  const Point b(TuplePos{{vp({2.0}), vp({3.0, 4.0})}});
  // Component distances 2 and 5 combine in l_3.
  REQUIRE(prod.distance(a, b) == Catch::Approx(std::pow(8.0 + 125.0, 1.0 / 3.0)));

  PythagoreanProductSpace pyth({line, plane});
  REQUIRE(pyth.distance(a, b) == Catch::Approx(std::sqrt(4.0 + 25.0)));
}

TEST_CASE("wasserstein distance on a finite base matches transport by hand") {
  // Base = 3 points on a line at 0, 1, 2 (distances are the gaps).
  auto base = std::make_shared<FiniteSpace>(std::vector<std::vector<double>>{
      {0.0, 1.0, 2.0}, {1.0, 0.0, 1.0}, {2.0, 1.0, 0.0}});
  WassersteinSpace w1(base, 1.0);
  const Point mu(Histogram{{1.0, 0.0, 0.0}});
  const Point nu(Histogram{{0.0, 0.0, 1.0}});
  REQUIRE(w1.distance(mu, nu) == Catch::Approx(2.0));  // move all mass two steps
  const Point half(Histogram{{0.5, 0.0, 0.5}});
  REQUIRE(w1.distance(mu, half) == Catch::Approx(1.0));

  WassersteinSpace w2(base, 2.0);
  // W_2 pays sqrt of squared-distance mass: moving half the mass distance 2.
  REQUIRE(w2.distance(mu, half) == Catch::Approx(std::sqrt(0.5 * 4.0)));
}

TEST_CASE("frechet means on the line match a grid-scan minimizer") {
  LpSpace line(1, 2.0);
  const BarycenterMap map = BarycenterMap::frechet(3.0);
  const Measure mu = Measure::normalized(
      {{vp({0.0}), 0.2}, {vp({1.0}), 0.5}, {vp({4.0}), 0.3}});
  const Point got = barycenter(line, map, mu);
  const double want = oracles::grid_scan_argmin(
      [&](double x) {
        double s = 0.0;
        for (const auto& a : mu.atoms())
          s += a.weight * std::pow(std::abs(x - a.point.get_if<RealVec>()->x[0]), 3.0);
        return s;
      },
      -1.0, 5.0);
  REQUIRE(got.get_if<RealVec>()->x[0] == Catch::Approx(want).margin(1e-6));
}

TEST_CASE("weighted linear means agree with coordinate arithmetic") {
  LpSpace plane(2, 2.0);
  const std::vector<Point> pts{vp({0.0, 0.0}), vp({2.0, 4.0})};
  const std::vector<double> w{0.25, 0.75};
  const Point m = plane.linear_mean(pts, w);
  REQUIRE(m.get_if<RealVec>()->x[0] == Catch::Approx(1.5));
  REQUIRE(m.get_if<RealVec>()->x[1] == Catch::Approx(3.0));
}
