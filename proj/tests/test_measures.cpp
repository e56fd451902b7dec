#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>
#include <vector>

#include "cotype/errors.hpp"
#include "cotype/measure.hpp"
#include "cotype/rng.hpp"
#include "cotype/space.hpp"

using namespace cotype;

namespace {

Point vp(std::initializer_list<double> xs) { return vec_point(std::vector<double>(xs)); }

SpacePtr plane() { return std::make_shared<LpSpace>(2, 2.0); }

std::shared_ptr<TreeSpace> small_tree() {
  return std::make_shared<TreeSpace>(
      4, std::vector<TreeEdge>{{0, 1, 1.0}, {1, 2, 2.0}, {1, 3, 0.5}});
}

}  // namespace

TEST_CASE("measures normalize weights and reject garbage") {
  const Measure mu = Measure::normalized({{vp({0.0, 0.0}), 2.0}, {vp({1.0, 0.0}), 6.0}});
  REQUIRE(mu.atoms().size() == 2);
  REQUIRE(mu.atoms()[0].weight == Catch::Approx(0.25));
  REQUIRE(mu.atoms()[1].weight == Catch::Approx(0.75));
  REQUIRE_THROWS_AS(Measure::normalized({}), UsageError);
  REQUIRE_THROWS_AS(Measure::normalized({{vp({0.0}), -1.0}, {vp({1.0}), 2.0}}), UsageError);
  REQUIRE_THROWS_AS(Measure::normalized({{vp({0.0}), 0.0}}), UsageError);
}

TEST_CASE("every strategy maps a point mass to its atom") {
  auto sp = plane();
  const Point x = vp({0.7, -0.3});
  for (const BarycenterMap& map :
       {BarycenterMap::linear(), BarycenterMap::frechet(2.0), BarycenterMap::frechet(3.0)}) {
    const Point b = barycenter(*sp, map, Measure::dirac(x));
    REQUIRE(sp->distance(b, x) == Catch::Approx(0.0).margin(1e-15));
  }
  auto tr = small_tree();
  const Point tx(TreePos{1, 0.75});
  const Point tb = barycenter(*tr, BarycenterMap::tree_mean2(), Measure::dirac(tx));
  REQUIRE(tr->distance(tb, tx) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("linear barycenter is the weighted coordinate mean") {
  auto sp = plane();
  const Measure mu = Measure::normalized(
      {{vp({0.0, 0.0}), 1.0}, {vp({4.0, 0.0}), 1.0}, {vp({0.0, 8.0}), 2.0}});
  const Point b = barycenter(*sp, BarycenterMap::linear(), mu);
  REQUIRE(b.get_if<RealVec>()->x[0] == Catch::Approx(1.0));
  REQUIRE(b.get_if<RealVec>()->x[1] == Catch::Approx(4.0));
}

TEST_CASE("tree two-point mean is the metric midpoint") {
  auto tr = small_tree();
  const Point a = tr->vertex_point(0), b = tr->vertex_point(2);
  const Point m = barycenter(*tr, BarycenterMap::tree_mean2(),
                             Measure::two_point(a, b));
  REQUIRE(tr->distance(a, m) == Catch::Approx(1.5).margin(1e-9));
  REQUIRE(tr->distance(m, b) == Catch::Approx(1.5).margin(1e-9));
}

TEST_CASE("hilbert space attains the two-point identity exactly") {
  // For the linear mean in Euclidean space the defining comparison holds with
  // equality: E d(x,Y)^2 = d(x,B)^2 + E d(B,Y)^2 for every x.
  auto sp = plane();
  SplitRng rng(101);
  for (int rep = 0; rep < 100; ++rep) {
    SplitRng r = rng.split(rep);
    const std::size_t k = 2 + r.next_below(3);
    std::vector<WeightedAtom> atoms;
    for (std::size_t i = 0; i < k; ++i) {
      SplitRng ri = r.split(i);
      atoms.push_back({sp->sample_point(ri), 0.1 + ri.next_unit()});
    }
    const Measure mu = Measure::normalized(std::move(atoms));
    SplitRng rx = r.split(99);
    const Point x = sp->sample_point(rx);
    const BarycentricSlack s =
        check_barycentric_inequality(*sp, BarycenterMap::linear(), mu, x, 2.0, 1.0);
    REQUIRE(std::abs(s.slack) <= 1e-9 * std::max(1.0, s.rhs_moment));
  }
}

TEST_CASE("conditional barycenters collapse blocks of the support") {
  auto sp = plane();
  const std::vector<Point> z{vp({0.0, 0.0}), vp({2.0, 0.0}), vp({0.0, 4.0}), vp({0.0, 8.0})};
  const std::vector<double> w{0.25, 0.25, 0.25, 0.25};
  Partition part;
  part.blocks = {{0, 1}, {2, 3}};
  const std::vector<Point> out =
      conditional_barycenter(*sp, BarycenterMap::linear(), w, z, part);
  // Indices in a block all receive that block's barycenter.
  REQUIRE(out[0].get_if<RealVec>()->x[0] == Catch::Approx(1.0));
  REQUIRE(out[0].get_if<RealVec>()->x[1] == Catch::Approx(0.0));
  REQUIRE(sp->distance(out[0], out[1]) == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(out[2].get_if<RealVec>()->x[1] == Catch::Approx(6.0));
  REQUIRE_THROWS_AS(
      conditional_barycenter(*sp, BarycenterMap::linear(), {0.5, 0.5}, z, part), UsageError);
}

TEST_CASE("partitions validate coverage and disjointness") {
  REQUIRE_NOTHROW(Partition::trivial(4).validate(4));
  REQUIRE_NOTHROW(Partition::singletons(3).validate(3));
  Partition bad;
  bad.blocks = {{0, 1}, {1, 2}};
  REQUIRE_THROWS_AS(bad.validate(3), UsageError);
  Partition missing;
  missing.blocks = {{0}, {2}};
  REQUIRE_THROWS_AS(missing.validate(3), UsageError);
}

TEST_CASE("beta estimate on euclidean space pins the sharp constant") {
  auto sp = plane();
  const BetaEstimate est = estimate_beta(*sp, BarycenterMap::linear(), 2.0, 300, 7);
  REQUIRE_FALSE(est.infinite);
  REQUIRE(est.beta_hat >= 1.0 - 1e-9);
  REQUIRE(est.beta_hat <= 1.0 + 1e-9);
}

TEST_CASE("beta estimate on a tree stays at the nonpositive-curvature value") {
  auto tr = small_tree();
  const BetaEstimate est = estimate_beta(*tr, BarycenterMap::tree_mean2(), 2.0, 300, 7);
  REQUIRE_FALSE(est.infinite);
  REQUIRE(est.beta_hat <= 1.0 + 1e-6);
}

TEST_CASE("beta estimate in l3 respects the banach-space constant") {
  auto sp = std::make_shared<LpSpace>(2, 3.0);
  const BetaEstimate est = estimate_beta(*sp, BarycenterMap::linear(), 3.0, 300, 7);
  REQUIRE_FALSE(est.infinite);
  REQUIRE(est.beta_hat <= 2.0 + 1e-6);
}

TEST_CASE("two point bound holds on random pairs in each backend") {
  SplitRng rng(55);
  struct Case {
    SpacePtr sp;
    BarycenterMap map;
    double q;
  };
  std::vector<Case> cases;
  cases.push_back({plane(), BarycenterMap::linear(), 2.0});
  cases.push_back({small_tree(), BarycenterMap::tree_mean2(), 2.0});
  cases.push_back({std::make_shared<LpSpace>(3, 4.0), BarycenterMap::linear(), 4.0});
  for (const auto& c : cases) {
    for (int rep = 0; rep < 60; ++rep) {
      SplitRng ra = rng.split(2 * rep), rb = rng.split(2 * rep + 1);
      const Point a = c.sp->sample_point(ra), b = c.sp->sample_point(rb);
      REQUIRE(two_point_bound_slack(*c.sp, c.map, a, b, c.q) >= -1e-9);
    }
  }
}

TEST_CASE("symmetric two point gap: quadratic case is an identity") {
  for (double s = 0.0; s <= 2.0; s += 0.01) {
    REQUIRE(std::abs(symmetric_two_point_gap(s, 2.0, 1.0)) <= 1e-12);
  }
}

TEST_CASE("symmetric two point gap: exponents below two fail near zero") {
  // For q = 1.5 and beta = 1 the comparison 2 s^q <= (1+s)^q + (1-s)^q - 2
  // must break for some small s; the scan has to surface a negative gap.
  const GapScan scan = scan_symmetric_two_point_gap(1.5, 1.0, 1e-4, 0.1, 1e-4);
  REQUIRE(scan.min_gap < 0.0);
  REQUIRE(scan.argmin > 0.0);
  // The stepping accumulates ~1 ulp at the right endpoint; allow for it.
  REQUIRE(scan.argmin <= 0.1 + 1e-12);
}

TEST_CASE("moment computation matches direct accumulation") {
  auto sp = plane();
  const Measure mu = Measure::normalized({{vp({1.0, 0.0}), 1.0}, {vp({0.0, 2.0}), 3.0}});
  const Point x = vp({0.0, 0.0});
  // 0.25 * 1^3 + 0.75 * 2^3
  REQUIRE(mu.moment(*sp, x, 3.0) == Catch::Approx(0.25 + 6.0));
}
