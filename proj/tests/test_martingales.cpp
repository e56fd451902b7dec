#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>
#include <vector>

#include "cotype/martingale.hpp"
#include "cotype/measure.hpp"
#include "cotype/numeric.hpp"
#include "cotype/rng.hpp"
#include "cotype/space.hpp"
#include "cotype/torus.hpp"

using namespace cotype;

namespace {

Point vp(std::initializer_list<double> xs) { return vec_point(std::vector<double>(xs)); }

SpacePtr plane() { return std::make_shared<LpSpace>(2, 2.0); }

SpacePtr star_tree() {
  // A claw: center 0, leaves 1..3 at unit distance.
  return std::make_shared<TreeSpace>(
      4, std::vector<TreeEdge>{{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 1.0}});
}

}  // namespace

TEST_CASE("two-bit cube martingale agrees with a hand recursion on the plane") {
  auto sp = plane();
  // Terminal values h(eps) indexed by bits (eps_1, eps_2), bit i fixed at
  // level i+1: prefix bit 0 is the first coordinate.
  const std::vector<Point> h{vp({0.0, 0.0}), vp({4.0, 0.0}), vp({0.0, 8.0}), vp({4.0, 8.0})};
  const CubeMartingale m = build_cube_martingale(sp, BarycenterMap::linear(), h);

  // Level 2 stores the inputs verbatim.
  for (std::size_t i = 0; i < 4; ++i) {
    REQUIRE(sp->distance(m.at(2, static_cast<std::uint32_t>(i)), h[i]) ==
            Catch::Approx(0.0).margin(1e-15));
  }
  // Level 1 averages over the last bit: E_1(b) = (h(b,0) + h(b,1)) / 2.
  REQUIRE(sp->distance(m.at(1, 0), vp({0.0, 4.0})) == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(sp->distance(m.at(1, 1), vp({4.0, 4.0})) == Catch::Approx(0.0).margin(1e-12));
  // Level 0 is the global mean.
  REQUIRE(sp->distance(m.at(0, 0), vp({2.0, 4.0})) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("two-bit cube martingale on a star tree via two midpoints") {
  auto tr = star_tree();
  // Level 1 pairs terminal entries {p, p+2} (the high bit is averaged first),
  // so with h = (leaf1, leaf2, leaf1, leaf3): E_1(0) = mid(leaf1, leaf1) =
  // leaf1 and E_1(1) = mid(leaf2, leaf3) = center; the root is then
  // midpoint(leaf1, center), half way down the first edge.
  auto leaf = [&](std::size_t v) {
    return std::static_pointer_cast<const TreeSpace>(tr)->vertex_point(v);
  };
  const std::vector<Point> h{leaf(1), leaf(2), leaf(1), leaf(3)};
  const CubeMartingale m = build_cube_martingale(tr, BarycenterMap::tree_mean2(), h);

  // The interior mean is located by a bracketing search whose comparisons go
  // flat near a quadratic minimum, so positions are good to ~1e-8, not 1e-12;
  // 1e-6 is the working tolerance for tree backends everywhere.
  REQUIRE(tr->distance(m.at(1, 0), leaf(1)) == Catch::Approx(0.0).margin(1e-6));
  REQUIRE(tr->distance(m.at(1, 1), leaf(0)) == Catch::Approx(0.0).margin(1e-6));
  const Point expected_root(TreePos{0, 0.5});
  REQUIRE(tr->distance(m.at(0, 0), expected_root) == Catch::Approx(0.0).margin(1e-6));
}

TEST_CASE("rebuilt interior entries match stored ones") {
  SplitRng rng(9);
  for (std::size_t n : {1, 2, 3, 4}) {
    auto sp = plane();
    std::vector<Point> h(std::size_t{1} << n);
    for (std::size_t i = 0; i < h.size(); ++i) {
      SplitRng r = rng.split(n * 1000 + i);
      h[i] = sp->sample_point(r);
    }
    const CubeMartingale m = build_cube_martingale(sp, BarycenterMap::linear(), h);
    const MartingalePropertyReport rep = verify_martingale_property(m, 1e-12);
    REQUIRE(rep.pass);
    REQUIRE(rep.max_deviation <= 1e-12);
  }
}

TEST_CASE("input size must be a power of two") {
  auto sp = plane();
  SplitRng rng(1);
  std::vector<Point> h(3);
  for (auto& p : h) {
    SplitRng r = rng.split(1);
    p = sp->sample_point(r);
  }
  REQUIRE_THROWS_AS(build_cube_martingale(sp, BarycenterMap::linear(), h), UsageError);
}

TEST_CASE("distance moments to a fixed point are nondecreasing in the level") {
  SplitRng rng(33);
  auto sp = plane();
  for (int rep = 0; rep < 40; ++rep) {
    SplitRng r = rng.split(rep);
    const std::size_t n = 2 + r.next_below(3);
    std::vector<Point> h(std::size_t{1} << n);
    for (std::size_t i = 0; i < h.size(); ++i) {
      SplitRng ri = r.split(i);
      h[i] = sp->sample_point(ri);
    }
    SplitRng rx = r.split(1u << 20);
    const Point x = sp->sample_point(rx);
    const CubeMartingale m = build_cube_martingale(sp, BarycenterMap::linear(), h);
    const MonotonicityReport mr = check_monotonicity(m, x, 2.0, 1e-12);
    REQUIRE(mr.pass);

    // Cross-check every moment against a direct loop.
    for (std::size_t lev = 0; lev <= n; ++lev) {
      double want = 0.0;
      const std::size_t width = std::size_t{1} << lev;
      for (std::size_t p = 0; p < width; ++p) {
        const double d = sp->distance(m.at(lev, static_cast<std::uint32_t>(p)), x);
        want += d * d;
      }
      want /= static_cast<double>(width);
      REQUIRE(mr.moments[lev] == Catch::Approx(want).margin(1e-12));
    }
  }
}

TEST_CASE("hilbert decay comparison is an identity") {
  // With the linear mean, q = 2, beta = 1, the telescoping comparison holds
  // with equality in Euclidean space: the slack must vanish to roundoff.
  SplitRng rng(71);
  auto sp = plane();
  for (int rep = 0; rep < 50; ++rep) {
    SplitRng r = rng.split(rep);
    const std::size_t n = 1 + r.next_below(5);
    std::vector<Point> h(std::size_t{1} << n);
    for (std::size_t i = 0; i < h.size(); ++i) {
      SplitRng ri = r.split(i);
      h[i] = sp->sample_point(ri);
    }
    SplitRng rx = r.split(1u << 20);
    const Point x = sp->sample_point(rx);
    const CubeMartingale m = build_cube_martingale(sp, BarycenterMap::linear(), h);
    const DecayReport dr = check_pisier(m, x, 2.0, 1.0, 1e-9);
    REQUIRE(dr.pass);
    REQUIRE(std::abs(dr.slack) <= 1e-9 * std::max(1.0, dr.rhs));
  }
}

TEST_CASE("tree decay comparison holds with slack") {
  SplitRng rng(72);
  auto tr = star_tree();
  for (int rep = 0; rep < 30; ++rep) {
    SplitRng r = rng.split(rep);
    const std::size_t n = 1 + r.next_below(4);
    std::vector<Point> h(std::size_t{1} << n);
    for (std::size_t i = 0; i < h.size(); ++i) {
      SplitRng ri = r.split(i);
      h[i] = tr->sample_point(ri);
    }
    SplitRng rx = r.split(1u << 20);
    const Point x = tr->sample_point(rx);
    const CubeMartingale m = build_cube_martingale(tr, BarycenterMap::tree_mean2(), h);
    const DecayReport dr = check_pisier(m, x, 2.0, 1.0, 1e-6);
    REQUIRE(dr.slack >= -1e-6 * std::max(1.0, dr.rhs));
  }
}

TEST_CASE("restriction martingales satisfy the translation identity") {
  auto sp = plane();
  const TorusFunction f = make_random_torus_function(2, 2, sp, 404);
  const TranslationIdentityReport rep =
      check_translation_identity(f, BarycenterMap::linear(), 1e-12);
  REQUIRE(rep.pass);
  REQUIRE(rep.max_deviation <= 1e-12);
  REQUIRE(rep.checked > 0);
}
