#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>
#include <vector>

#include "cotype/embedding.hpp"
#include "cotype/errors.hpp"
#include "cotype/rng.hpp"
#include "cotype/space.hpp"
#include "cotype/torus.hpp"
#include "oracles.hpp"

using namespace cotype;

// ---------------------------------------------------------------------------
// Lattice domains
// ---------------------------------------------------------------------------

TEST_CASE("solid grid uses the max metric and knows its diameter") {
  GridSpace g(4, 2);
  REQUIRE(g.enumerable_size() == 16);
  const Point a = g.enumerate_point(0);
  double far = 0.0;
  for (std::size_t i = 0; i < 16; ++i) far = std::max(far, g.distance(a, g.enumerate_point(i)));
  REQUIRE(far == Catch::Approx(3.0));
  REQUIRE(*g.diameter() == Catch::Approx(3.0));
}

TEST_CASE("discrete torus metric equals breadth-first search distance") {
  // BFS over single steps that may move every coordinate by -1/0/+1 realizes
  // the max of cyclic coordinate distances; compare exhaustively.
  for (const auto& [n, m] : std::vector<std::pair<std::size_t, std::size_t>>{
           {1, 2}, {1, 5}, {2, 2}, {2, 3}, {3, 2}}) {
    const std::size_t L = 2 * m;
    TorusGridSpace t(m, n);
    const auto bfs = oracles::torus_linf_bfs(n, L);
    REQUIRE(t.enumerable_size() == bfs.size());
    const Point origin = t.enumerate_point(0);
    for (std::size_t i = 0; i < bfs.size(); ++i) {
      REQUIRE(t.distance(origin, t.enumerate_point(i)) ==
              Catch::Approx(static_cast<double>(bfs[i])).margin(1e-12));
    }
    REQUIRE(*t.diameter() == Catch::Approx(static_cast<double>(m)));
  }
}

TEST_CASE("lattice budgets reject absurd sizes") {
  REQUIRE_THROWS_AS(GridSpace(100, 9, 1e6), BudgetError);
  REQUIRE_THROWS_AS(TorusGridSpace(50, 8, 1e6), BudgetError);
}

// ---------------------------------------------------------------------------
// Distortion bookkeeping
// ---------------------------------------------------------------------------

TEST_CASE("a single stretched pair is a similarity") {
  auto dom = std::make_shared<LpSpace>(1, 2.0);
  auto cod = std::make_shared<LpSpace>(1, 2.0);
  // Scaling one pair by 3 rescales the metric uniformly; distortion ignores
  // global scale, so it is exactly 1.
  const FiniteEmbedding e = make_embedding(
      dom, cod, {vec_point({0.0}), vec_point({1.0})}, {vec_point({0.0}), vec_point({3.0})});
  REQUIRE(distortion(e) == Catch::Approx(1.0));
}

TEST_CASE("distortion multiplies expansion and contraction") {
  auto dom = std::make_shared<LpSpace>(1, 2.0);
  auto cod = std::make_shared<LpSpace>(1, 2.0);
  // Pair (0,1) stretched by 2; pair (0,-1) shrunk by 2 -> distortion 4.
  const FiniteEmbedding e = make_embedding(
      dom, cod, {vec_point({0.0}), vec_point({1.0}), vec_point({-1.0})},
      {vec_point({0.0}), vec_point({2.0}), vec_point({-0.5})});
  REQUIRE(distortion(e) == Catch::Approx(4.0));
}

TEST_CASE("collapsing a pair makes the distortion infinite") {
  auto dom = std::make_shared<LpSpace>(1, 2.0);
  auto cod = std::make_shared<LpSpace>(1, 2.0);
  const FiniteEmbedding e = make_embedding(
      dom, cod, {vec_point({0.0}), vec_point({1.0})}, {vec_point({5.0}), vec_point({5.0})});
  REQUIRE(std::isinf(distortion(e)));
}

TEST_CASE("identity coordinate embedding distorts by the dimension root") {
  // Max-metric cube into l_q coordinates: worst pair moves diagonally.
  REQUIRE(distortion(make_trivial_embedding(TrivialKind::Id, 2, 4, 2.0)) ==
          Catch::Approx(std::pow(4.0, 0.5)).margin(1e-12));
  REQUIRE(distortion(make_trivial_embedding(TrivialKind::Id, 3, 3, 3.0)) ==
          Catch::Approx(std::pow(3.0, 1.0 / 3.0)).margin(1e-12));
}

TEST_CASE("simplex embedding distorts by the diameter") {
  REQUIRE(distortion(make_trivial_embedding(TrivialKind::Forget, 2, 4, 2.0)) ==
          Catch::Approx(1.0).margin(1e-12));
  REQUIRE(distortion(make_trivial_embedding(TrivialKind::Forget, 3, 3, 3.0)) ==
          Catch::Approx(2.0).margin(1e-12));
  // All image pairs sit at the same l_q distance.
  const FiniteEmbedding e = make_trivial_embedding(TrivialKind::Forget, 3, 2, 2.0);
  const double d01 = e.codomain->distance(e.image_points[0], e.image_points[1]);
  const double d07 = e.codomain->distance(e.image_points[0], e.image_points[8]);
  REQUIRE(d01 == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(d07 == Catch::Approx(d01).margin(1e-12));
}

// ---------------------------------------------------------------------------
// The cycle-to-boundary map
// ---------------------------------------------------------------------------

TEST_CASE("cycle walk lands on integer boundary points of the square") {
  for (std::size_t m : {2, 3, 5, 8}) {
    for (std::size_t s = 0; s < 2 * m; ++s) {
      const auto xy = psi_cycle_point(m, s);
      REQUIRE(xy[0] >= 0.0);
      REQUIRE(xy[0] <= static_cast<double>(m));
      REQUIRE(xy[1] >= 0.0);
      REQUIRE(xy[1] <= static_cast<double>(m));
      REQUIRE(xy[0] == std::floor(xy[0]));
      REQUIRE(xy[1] == std::floor(xy[1]));
      // Consecutive sites move exactly two boundary steps.
      const auto nxt = psi_cycle_point(m, (s + 1) % (2 * m));
      const double step = std::max(std::abs(nxt[0] - xy[0]), std::abs(nxt[1] - xy[1]));
      REQUIRE(step <= 2.0 + 1e-12);
      REQUIRE(step >= 1.0 - 1e-12);
    }
  }
}

TEST_CASE("cycle embedding distortion is exactly two from side four onward") {
  REQUIRE(psi_cycle_distortion(1) == Catch::Approx(1.0).margin(1e-12));
  for (std::size_t m = 2; m <= 20; ++m) {
    REQUIRE(psi_cycle_distortion(m) == Catch::Approx(2.0).margin(1e-9));
  }
}

TEST_CASE("product cycle embedding stays within distortion two") {
  for (const auto& [m, n] :
       std::vector<std::pair<std::size_t, std::size_t>>{{2, 2}, {3, 2}, {4, 1}}) {
    const FiniteEmbedding e = psi_embedding(m, n);
    REQUIRE(distortion(e) <= 2.0 + 1e-9);
    // Images live on the integer lattice {0..m}^{2n}.
    for (const Point& p : e.image_points) {
      const auto& v = p.get_if<RealVec>()->x;
      REQUIRE(v.size() == 2 * n);
      for (double c : v) {
        REQUIRE(c == std::floor(c));
        REQUIRE(c >= 0.0);
        REQUIRE(c <= static_cast<double>(m));
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Lower bounds
// ---------------------------------------------------------------------------

TEST_CASE("grid lower bound closed form and worked example") {
  const GridLowerBound b = grid_distortion_lower_bound(2, 4, 2.0, 2.0, 2.0);
  // sqrt(4) * 2 / (2 * (4 * sqrt(4) + 2 * 2)) = 4 / 24
  REQUIRE(b.bound == Catch::Approx(1.0 / 6.0).margin(1e-12));
  REQUIRE(b.asymptote == Catch::Approx(2.0).margin(1e-12));
  REQUIRE(b.limit == Catch::Approx(std::sqrt(4.0) / (2.0 * 2.0)).margin(1e-12));

  SplitRng rng(14);
  for (int rep = 0; rep < 40; ++rep) {
    SplitRng r = rng.split(rep);
    const std::size_t m = 2 + r.next_below(30);
    const std::size_t n = 1 + r.next_below(12);
    const double q = 2.0 + r.next_unit() * 3.0;
    const double psi = 1.0 + r.next_unit() * 2.0;
    const double beta = 1.0 + r.next_unit() * 2.0;
    const GridLowerBound g = grid_distortion_lower_bound(m, n, q, psi, beta);
    const double nq = std::pow(static_cast<double>(n), 1.0 / q);
    const double want = nq * static_cast<double>(m) /
                        (psi * (4.0 * nq + beta * static_cast<double>(m)));
    REQUIRE(g.bound == Catch::Approx(want).margin(1e-12));
    // The bound never exceeds its two asymptotic envelopes.
    REQUIRE(g.bound <= g.asymptote + 1e-12);
  }
  REQUIRE_THROWS_AS(grid_distortion_lower_bound(2, 4, 1.5, 2.0, 2.0), UsageError);
}

TEST_CASE("critical dimension exponent bounds") {
  // Worked case: alpha = 2, n = 16 -> upper = ln 16 / ln 2 = 4.
  const PAlphaBounds b = p_alpha_bounds(4, 16, 2.0);
  REQUIRE(b.upper == Catch::Approx(4.0).margin(1e-12));
  REQUIRE(b.lower <= b.upper + 1e-12);
  REQUIRE(b.lower >= 2.0 - 1e-12);

  // The upper exponent never undercuts 2.
  const PAlphaBounds small = p_alpha_bounds(4, 2, 5.0);
  REQUIRE(small.upper == Catch::Approx(2.0).margin(1e-12));
  REQUIRE(small.lower <= small.upper + 1e-12);

  REQUIRE_THROWS_AS(p_alpha_bounds(4, 16, 1.5), UsageError);
}

// ---------------------------------------------------------------------------
// The obstruction curve
// ---------------------------------------------------------------------------

TEST_CASE("obstruction curve satisfies its two exact identities") {
  for (const auto& [p, m, n] : std::vector<std::tuple<double, std::size_t, std::size_t>>{
           {3.0, 4, 2}, {3.0, 9, 3}, {2.5, 3, 2}}) {
    const ObstructionCurve curve = make_obstruction_curve(p, n, m);
    const ObstructionReport rep = check_obstruction_identities(curve, 128, 5);
    INFO("p=" << p << " m=" << m << " n=" << n);
    REQUIRE(rep.pass);
    REQUIRE(rep.shift_identity_err <= 1e-12 * std::max(1.0, rep.shift_identity));
    REQUIRE(rep.step_identity_err <= 1e-12);
    REQUIRE(rep.step_within_pi);
    // Half-period displacement equals the doubled radius 2 m n^{-1/p}.
    const double want =
        2.0 * static_cast<double>(m) * std::pow(static_cast<double>(n), -1.0 / p);
    REQUIRE(rep.shift_identity == Catch::Approx(want).margin(1e-12));
  }
}

TEST_CASE("moduli envelope brackets every observed pair") {
  auto dom = std::make_shared<LpSpace>(1, 2.0);
  auto cod = std::make_shared<LpSpace>(1, 2.0);
  // Three collinear points with distinct gaps.
  const FiniteEmbedding e = make_embedding(
      dom, cod, {vec_point({0.0}), vec_point({1.0}), vec_point({3.0})},
      {vec_point({0.0}), vec_point({2.0}), vec_point({3.0})});
  const ModuliEnvelope env = moduli_envelope(e);
  // Domain gaps 1, 2, 3 map to image gaps 2, 1, 3.
  REQUIRE(env.t.size() == 3);
  // The lower staircase at t is the smallest image gap over domain gaps >= t.
  REQUIRE(env.omega_at(0.5) == Catch::Approx(1.0));
  REQUIRE(env.omega_at(2.5) == Catch::Approx(3.0));
  REQUIRE(std::isinf(env.omega_at(3.5)));  // vacuous beyond the largest gap
  // The upper staircase at s is the largest image gap over domain gaps <= s.
  REQUIRE(env.Omega_at(0.5) == 0.0);       // nothing below the smallest gap
  REQUIRE(env.Omega_at(1.5) == Catch::Approx(2.0));
  REQUIRE(env.Omega_at(10.0) == Catch::Approx(3.0));
}

TEST_CASE("certificate threshold shrinks as the dimension grows") {
  // t_small = 2 Gamma^{-1} n^{1/q - 1/p} decreases in n when q > p... and
  // grows otherwise; with q = 2, p = 3 the exponent is positive, so the
  // sequence over n = 1, 4, 9, 16 must be strictly increasing.
  double prev = 0.0;
  for (std::size_t n : {1, 4, 9, 16}) {
    const double t = 2.0 / 2.0 * std::pow(static_cast<double>(n), 0.5 - 1.0 / 3.0);
    REQUIRE(t > prev);
    prev = t;
  }
  // And the full certificate is computable on a small instance.
  const ObstructionCurve curve = make_obstruction_curve(3.0, 2, 2);
  auto dom = std::make_shared<TorusGridSpace>(2, 2);
  std::vector<Point> dp(curve.idx.size()), ip(curve.idx.size());
  for (std::size_t i = 0; i < dp.size(); ++i) {
    dp[i] = dom->enumerate_point(i);
    ip[i] = curve.value(i);
  }
  const FiniteEmbedding emb = make_embedding(dom, curve.target, std::move(dp), std::move(ip));
  const ModuliEnvelope env = moduli_envelope(emb);
  const ObstructionCertificate cert = obstruction_certificate(env, 2, 2, 2.0, 3.0, 2.0);
  REQUIRE(cert.t_small == Catch::Approx(std::pow(2.0, 0.5 - 1.0 / 3.0)).margin(1e-12));
  REQUIRE(cert.holds);
}
